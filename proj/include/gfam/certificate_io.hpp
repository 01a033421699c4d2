#pragma once

#include "gfam/families.hpp"

#include <string>
#include <string_view>

namespace gfam {

/// A certificate together with the pair it certifies.
///
///   regime plain:2
///   sigma 0011+0
///   set 000+0,0010+0
///   LEAF varmin=2 varmax=3
///     000+0
///     0010+0
///
/// Inner nodes: `SKIPPED varmin=.. varmax=..` and `ATTACHED ...` followed by
/// `PART sigma=<branch>` children, `LIFT level=<regime> gate=<k> varmin=.. varmax=..`
/// followed by one node. Children are indented two spaces deeper.
struct CertificateFile {
    FamilyParams params = FamilyParams::plain(1);
    BranchSet set;
    Branch sigma;
    Certificate cert;
};

std::string write_certificate(const CertificateFile& file);

/// Node lines only, starting at the given indentation depth.
std::string dump_certificate(const CertNode& node, int depth = 0);

/// Throws ParseError (position = byte offset into `text`) on malformed input
/// and CapExceeded when nesting is deeper than `max_depth`.
CertificateFile read_certificate(std::string_view text, std::size_t max_depth = 64);

} // namespace gfam
