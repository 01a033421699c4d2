#include "gfam/dyadic.hpp"
#include "gfam/errors.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

using gfam::Branch;
using gfam::Node;

namespace {
Branch B(const char* s) { return Branch::parse(s); }
} // namespace

TEST_SUITE("dyadic") {

TEST_CASE("meet examples")
{
    CHECK(gfam::meet(B("01+0"), B("01+0")).infinite());
    CHECK(gfam::meet_length(B("01+0"), B("01+0")) == gfam::kInfiniteMeet);

    auto m = gfam::meet(B("1+0"), B("0+0"));
    REQUIRE_FALSE(m.infinite());
    CHECK(m.length == 0);
    CHECK(m.node->word.empty());

    m = gfam::meet(B("110+0"), B("111+0"));
    CHECK(m.length == 2);
    CHECK(m.node->word == "11");

    CHECK(gfam::meet(B("10+0"), B("1+0")).infinite());
}

TEST_CASE("initial segments")
{
    CHECK(gfam::is_proper_initial(Node{""}, Node{"0"}));
    CHECK_FALSE(gfam::is_proper_initial(Node{"01"}, Node{"01"}));
    CHECK(gfam::is_proper_initial(Node{"01"}, Node{"011"}));
    CHECK(gfam::is_initial(Node{"01"}, Node{"01"}));
    CHECK_FALSE(gfam::is_initial(Node{"10"}, Node{"011"}));
}

TEST_CASE("canonical literals")
{
    CHECK(B("0110+0").to_string() == "011+0");
    CHECK(B("e+1").to_string() == "e+1");
    CHECK(B("111+1") == B("e+1"));
    CHECK(B("0+1").bit(0) == false);
    CHECK(B("0+1").bit(100) == true);
    CHECK(B("0+0") < B("1+0"));
    CHECK(B("01+0") < B("0+1"));
    CHECK(gfam::branch_through(Node{"01"}, true, false) == B("011+0"));

    try {
        B("01x+0");
        FAIL("expected a parse error");
    } catch (const gfam::ParseError& e) {
        CHECK(e.position() == 2);
    }
    CHECK_THROWS_AS(B("01"), gfam::ParseError);
    CHECK_THROWS_AS(B("01+2"), gfam::ParseError);
}

TEST_CASE("meet agrees with bitwise comparison")
{
    const auto all = gfam::oracle::all_branches(4);
    for (const auto& a : all)
        for (const auto& b : all) {
            const auto fast = gfam::meet(a, b);
            const auto slow = gfam::oracle::naive_meet(a, b);
            REQUIRE(fast.infinite() == !slow.has_value());
            if (slow)
                CHECK(*fast.node == *slow);
        }
}

TEST_CASE("ultrametric inequality")
{
    const auto all = gfam::oracle::all_branches(3);
    for (const auto& a : all)
        for (const auto& b : all)
            for (const auto& c : all)
                CHECK(gfam::meet_length(a, c) >=
                      std::min(gfam::meet_length(a, b), gfam::meet_length(b, c)));
}

}
