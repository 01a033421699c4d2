#include "gfam/certificate_io.hpp"
#include "gfam/errors.hpp"

#include <doctest.h>

using namespace gfam;

namespace {

const char* kLeafFile = "regime plain:1\n"
                        "sigma 0011+0\n"
                        "set 000+0,0010+0\n"
                        "LEAF varmin=2 varmax=3\n"
                        "  000+0\n"
                        "  0010+0\n";

std::size_t error_position(const std::string& text)
{
    try {
        read_certificate(text);
    } catch (const ParseError& e) {
        return e.position();
    }
    FAIL("expected a parse error");
    return 0;
}

} // namespace

TEST_SUITE("certificate-io") {

TEST_CASE("read, verify and write back")
{
    const auto f = read_certificate(kLeafFile);
    CHECK(f.params == FamilyParams::plain(1));
    CHECK(f.sigma == Branch::parse("0011+0"));
    CHECK(f.cert->kind == NodeKind::Leaf);
    CHECK(verify_certificate(f.params, f.set, f.sigma, f.cert).ok());
    const auto again = read_certificate(write_certificate(f));
    CHECK(write_certificate(again) == write_certificate(f));
}

TEST_CASE("round trip of searched certificates")
{
    std::vector<Branch> taus;
    for (std::size_t k = 2; k <= 7; ++k)
        taus.emplace_back(std::string(k, '0') + '1', false);
    const BranchSet set(taus);
    for (const char* level : {"plain:2", "plain:w", "schreier:2:2"}) {
        const auto params = FamilyParams::parse(level);
        const auto found = decide_membership_any_sigma(params, set);
        REQUIRE(found);
        const CertificateFile f{params, set, found->first, found->second};
        const auto text = write_certificate(f);
        const auto back = read_certificate(text);
        CHECK(write_certificate(back) == text);
        CHECK(verify_certificate(back.params, back.set, back.sigma, back.cert).ok());
    }
}

TEST_CASE("error positions")
{
    std::string text = kLeafFile;
    auto bad = text;
    bad.replace(bad.find("0010+0\n", 40), 6, "00x0+0");
    CHECK(error_position(bad) == bad.find("00x0") + 2);

    bad = text;
    bad.replace(bad.find("LEAF"), 4, "LEFT");
    CHECK(error_position(bad) == bad.find("LEFT"));

    bad = text;
    bad.replace(bad.find("  000+0"), 2, " ");
    CHECK(error_position(bad) == bad.find("\n 000+0") + 2); // first character after the odd indent

    CHECK(error_position("regime plain:1\n") == 15);
    CHECK_THROWS_AS(read_certificate("regime plain:q\nsigma 0+0\nset 1+0\n"), ParseError);
}

TEST_CASE("nesting cap")
{
    std::string text = "regime plain:w\nsigma e+0\nset 01+0\n";
    const int depth = 70;
    for (int i = 0; i < depth; ++i)
        text += std::string(2 * i, ' ') + "LIFT level=plain:1 gate=0 varmin=1 varmax=1\n";
    text += std::string(2 * depth, ' ') + "LEAF varmin=1 varmax=1\n" +
            std::string(2 * depth + 2, ' ') + "01+0\n";
    CHECK_THROWS_AS(read_certificate(text), CapExceeded);
    CHECK_NOTHROW(read_certificate(text, 128));
}

}
