#include "gfam/errors.hpp"
#include "gfam/norms.hpp"
#include "gfam/random.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

using namespace gfam;

namespace {

Branch B(const char* s) { return Branch::parse(s); }
Ordinal O(const char* s) { return Ordinal::parse(s); }
Rational Q(const char* s) { return parse_rational(s); }
Branch tau(std::size_t k) { return Branch(std::string(k, '0') + '1', false); }

SeqVector random_seq(SplitMix64& rng, std::uint64_t top, std::size_t size)
{
    SeqVector x;
    while (x.support_size() < size) {
        const auto i = 1 + rng.below(top);
        if (x.get(i) == 0)
            x.set(i, Rational(rng.between(-9, 9) | 1, rng.between(1, 6)));
    }
    return x;
}

Vector random_vector(SplitMix64& rng, const std::vector<Branch>& pool, std::size_t size)
{
    Vector x;
    while (x.support_size() < size) {
        const auto& b = pool[rng.below(pool.size())];
        if (x.get(b) == 0)
            x.set(b, Rational(rng.between(-5, 5) | 1, rng.between(1, 4)));
    }
    return x;
}

} // namespace

TEST_SUITE("norms") {

TEST_CASE("rationals")
{
    CHECK(to_string(Q("6/4")) == "3/2");
    CHECK(to_string(Q("3")) == "3/1");
    CHECK(to_string(Q("-2/4")) == "-1/2");
    CHECK(pow2_inv(3) == Q("1/8"));
    try {
        Q("1/0");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.position() == 2);
    }
    CHECK_THROWS_AS(Q("1/x"), ParseError);
    CHECK_THROWS_AS(Q(""), ParseError);
}

TEST_CASE("vector files")
{
    const auto x = Vector::parse("# comment\n01+0 1/2\n\n1+1 -3\n");
    CHECK(x.support_size() == 2);
    CHECK(x.get(B("01+0")) == Q("1/2"));
    CHECK(Vector::parse(x.to_string()).entries() == x.entries());
    CHECK_THROWS_AS(Vector::parse("01+0 1\n010+0 2\n"), ParseError); // same branch
    try {
        Vector::parse("01+0 1\n0z+0 2\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.position() == 8);
    }
    const auto s = SeqVector::parse("3 1/2\n7 -1\n");
    CHECK(s.get(7) == -1);
    CHECK_THROWS_AS(SeqVector::parse("0 1\n"), ParseError);
}

TEST_CASE("functionals")
{
    const auto t = B("01+0");
    CHECK(functional_apply(BranchSet{t}, Vector::unit(t)) == 1);
    CHECK(functional_apply(BranchSet{B("1+0")}, Vector::unit(t)) == 0);
    Vector x;
    x.set(tau(1), 2);
    x.set(tau(2), -3);
    CHECK(functional_apply(BranchSet{tau(1), tau(2)}, x) == -1);
}

TEST_CASE("single-level norm")
{
    const auto t = B("0110+1");
    const auto n = norm_xn(Vector::unit(t), FamilyParams::plain(1));
    CHECK(n.value == 1);
    CHECK(n.witness == BranchSet{t});

    Vector pair;
    pair.set(tau(2), 1);
    pair.set(tau(3), 1);
    CHECK(norm_xn(pair, FamilyParams::plain(1)).value == 2);

    Vector split;
    split.set(B("0+0"), 1);
    split.set(B("1+0"), -1);
    CHECK(norm_xn(split, FamilyParams::plain(1)).value == 1);

    CHECK(norm_xn(Vector{}, FamilyParams::plain(1)).value == 0);

    Vector wide;
    for (std::size_t k = 1; k <= 21; ++k)
        wide.set(tau(k), 1);
    CHECK_THROWS_AS(norm_xn(wide, FamilyParams::plain(1)), CapExceeded);
}

TEST_CASE("level norms grow and stay between sup and l1")
{
    const auto pool = oracle::all_branches(3);
    SplitMix64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto x = random_vector(rng, pool, 1 + rng.below(6));
        const auto norms = level_norms(x, Ladder::plain(), 3);
        for (std::size_t i = 0; i < norms.size(); ++i) {
            CHECK(norms[i].value >= x.sup());
            CHECK(norms[i].value <= x.l1());
            CHECK(abs(functional_apply(norms[i].witness, x)) == norms[i].value);
            if (i)
                CHECK(norms[i - 1].value <= norms[i].value);
        }
        // Symmetric under x -> -x.
        CHECK(norm_xn(x.scaled(-1), FamilyParams::plain(2)).value ==
              norm_xn(x, FamilyParams::plain(2)).value);
    }
}

TEST_CASE("Tsirelson norm examples")
{
    SeqVector e1;
    e1.set(1, 1);
    CHECK(norm_tsirelson(e1, O("1")).value == 1);
    SeqVector e12 = e1;
    e12.set(2, 1);
    CHECK(norm_tsirelson(e12, O("1")).value == 1);
    SeqVector mid;
    for (std::uint64_t i = 3; i <= 6; ++i)
        mid.set(i, 1);
    const auto r = norm_tsirelson(mid, O("1"));
    CHECK(r.value == Q("3/2"));
    CHECK(evaluate_tsirelson_tree(r.tree, mid, O("1")) == r.value);
    CHECK(norm_tsirelson(SeqVector{}, O("1")).value == 0);
}

TEST_CASE("Tsirelson norm against brute force")
{
    SplitMix64 rng(17);
    for (const char* a : {"1", "2", "w"}) {
        for (int trial = 0; trial < 40; ++trial) {
            const auto x = random_seq(rng, 12, 1 + rng.below(7));
            CAPTURE(a);
            CAPTURE(x.to_string());
            const auto r = norm_tsirelson(x, O(a));
            CHECK(r.value == oracle::tsirelson(x, O(a)));
            CHECK(evaluate_tsirelson_tree(r.tree, x, O(a)) == r.value);
        }
    }
}

TEST_CASE("Tsirelson norm: sandwich, suppression, unconditionality")
{
    SplitMix64 rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        const auto x = random_seq(rng, 14, 1 + rng.below(8));
        Rational sup = 0, l1 = 0;
        for (const auto& [i, v] : x.entries()) {
            sup = std::max(sup, Rational(abs(v)));
            l1 += abs(v);
        }
        const auto n = norm_tsirelson(x, O("1")).value;
        CHECK(n >= sup);
        CHECK(n <= l1);

        SeqVector part, flipped;
        std::size_t j = 0;
        for (const auto& [i, v] : x.entries()) {
            if (j % 2 == 0)
                part.set(i, v);
            flipped.set(i, (j % 3 == 0) ? Rational(-v) : v);
            ++j;
        }
        CHECK(norm_tsirelson(part, O("1")).value <= n);
        CHECK(norm_tsirelson(flipped, O("1")).value == n);
    }
}

TEST_CASE("malformed trees are rejected")
{
    SeqVector x;
    x.set(1, 1);
    x.set(2, 1);
    TsirelsonTree t;
    t.first = 1;
    t.last = 2;
    t.leaf = false;
    TsirelsonTree a, b;
    a.first = a.last = a.coordinate = 1;
    b.first = b.last = b.coordinate = 2;
    t.children = {a, b};
    // Two pieces need the first to start at 2 or later.
    CHECK_THROWS_AS(evaluate_tsirelson_tree(t, x, O("1")), std::invalid_argument);
}

TEST_CASE("lambda enclosure")
{
    const auto one = lambda_constant(1);
    CHECK(one.lower == Q("1/2"));
    CHECK(one.upper == 1);
    for (unsigned n = 1; n <= 20; ++n) {
        const auto e = lambda_constant(n);
        CHECK(e.width() <= pow2_inv(n));
        CHECK(e.lower <= e.upper);
    }
    for (unsigned n = 1; n <= 15; ++n) {
        const auto a = lambda_constant(n), b = lambda_constant(n + 5);
        CHECK(std::max(a.lower, b.lower) <= std::min(a.upper, b.upper));
    }
}

TEST_CASE("composite norm")
{
    const auto zero = norm_composite(Vector{}, Ladder::plain(), O("1"), 10);
    CHECK(zero.lower == 0);
    CHECK(zero.upper == 0);

    const auto unit = norm_composite(Vector::unit(tau(4)), Ladder::plain(), O("1"), 20);
    const auto lambda = lambda_constant(20);
    CHECK(unit.width() <= pow2_inv(20));
    CHECK(std::max(unit.lower, lambda.lower) <= std::min(unit.upper, lambda.upper));

    // Two normalized basis vectors on a chain.
    Vector x;
    const Rational lu = lambda.upper;
    x.set(tau(2), 1 / lu);
    x.set(tau(3), 1 / lu);
    const auto r = norm_composite(x, Ladder::plain(), O("1"), 20);
    CHECK(r.lower >= (lambda.lower / 2) * 2 / lu);

    // Ladders and the parametric regime.
    CHECK(Ladder::parse("schreier:w").level(3) == FamilyParams::parse("schreier:w:3"));
    CHECK(Ladder::parse("plain").level(2) == FamilyParams::plain(2));
    CHECK_THROWS_AS(Ladder::parse("schreier:0"), ParseError);
    const auto s = norm_composite(x, Ladder::parse("schreier:1"), O("1"), 12);
    const auto p = norm_composite(x, Ladder::plain(), O("1"), 12);
    CHECK(s.lower == p.lower);
}

TEST_CASE("projections")
{
    CHECK(pn_value(Vector::unit(tau(2)), 3, Ladder::plain()) == Q("1/8"));
    CHECK(pn_value(Vector{}, 2, Ladder::plain()) == 0);
    const auto pool = oracle::all_branches(3);
    SplitMix64 rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const auto x = random_vector(rng, pool, 1 + rng.below(5));
        const auto upper = norm_composite(x, Ladder::plain(), O("1"), 8).upper;
        for (std::uint64_t n = 1; n <= 3; ++n)
            CHECK(pn_value(x, n, Ladder::plain()) <= upper);
    }
}

}
