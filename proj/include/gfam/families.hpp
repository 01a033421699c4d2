#pragma once

#include "gfam/dyadic.hpp"
#include "gfam/ordinal.hpp"
#include "gfam/schreier.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gfam {

/// Which dyadic family: PLAIN(a) is G_a, SCHREIER(a, n) is the parametric G_n^a
/// whose side conditions ask for membership in S_a instead of a cardinality bound.
class FamilyParams {
public:
    enum class Regime { Plain, Schreier };
    enum class Stage { Base, Successor, Limit };

    static FamilyParams plain(const Ordinal& alpha);
    static FamilyParams plain(std::uint64_t n) { return plain(Ordinal::natural(n)); }
    static FamilyParams schreier(const Ordinal& alpha, std::uint64_t n);

    /// `plain:<ordinal>` or `schreier:<ordinal>:<n>`.
    static FamilyParams parse(std::string_view text);

    Regime regime() const noexcept { return regime_; }
    const Ordinal& alpha() const noexcept { return alpha_; }
    /// The parametric level n; 0 for the plain regime.
    std::uint64_t level() const noexcept { return level_; }

    Stage stage() const noexcept;
    /// The family one step down: G_b for G_{b+1}, G_n^a for G_{n+1}^a.
    FamilyParams predecessor() const;
    /// G_{a[k]} for a limit a.
    FamilyParams limit_step(std::uint64_t k) const;
    /// The family one step up (G_{a+1} or G_{n+1}^a).
    FamilyParams successor() const;

    /// Side condition on the increasing list of meet lengths that a 1-chain,
    /// a skipped branching or an attached branching contributes:
    /// d <= first (plain) or the set lies in S_a (parametric).
    bool admits(const std::vector<std::size_t>& increasing_lengths) const;

    std::string to_string() const;

    friend auto operator<=>(const FamilyParams&, const FamilyParams&) = default;

private:
    FamilyParams(Regime r, Ordinal a, std::uint64_t n) : regime_(r), alpha_(std::move(a)), level_(n) {}

    Regime regime_ = Regime::Plain;
    Ordinal alpha_;
    std::uint64_t level_ = 0;
};

/// Finite set of pairwise distinct branches, kept sorted.
class BranchSet {
public:
    BranchSet() = default;
    BranchSet(std::initializer_list<Branch> items);
    explicit BranchSet(std::vector<Branch> items);

    /// Comma separated branch literals.
    static BranchSet parse(std::string_view text);

    const std::vector<Branch>& items() const noexcept { return items_; }
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    bool contains(const Branch& b) const;
    const Branch& operator[](std::size_t i) const { return items_[i]; }
    auto begin() const noexcept { return items_.begin(); }
    auto end() const noexcept { return items_.end(); }

    /// Smallest pairwise meet length; requires size() >= 2.
    std::size_t min_pairwise_meet() const;

    std::string to_string() const;

    friend bool operator==(const BranchSet&, const BranchSet&) = default;

private:
    std::vector<Branch> items_;
};

enum class NodeKind { Leaf, Skipped, Attached, Lift };

std::string_view to_string(NodeKind kind);

struct CertNode;
using Certificate = std::shared_ptr<const CertNode>;

struct CertPart {
    /// sigma_i of a skipped branching; the shared sigma for attached parts.
    Branch witness;
    Certificate node;
};

/// One node of a membership derivation. varmin/varmax are cached at every node.
struct CertNode {
    NodeKind kind = NodeKind::Leaf;
    std::size_t varmin = 0;
    std::size_t varmax = 0;
    /// Leaf: tau_1, ..., tau_d in order of increasing meet with sigma.
    std::vector<Branch> chain;
    /// Skipped / Attached parts in branching order.
    std::vector<CertPart> parts;
    /// Lift: the family the inner node lives in and the limit gate index
    /// (0 for the successor inclusion G_b in G_{b+1}).
    std::optional<FamilyParams> lift_level;
    std::uint64_t gate = 0;
    Certificate inner;
};

/// All leaf branches of a certificate, in derivation order.
std::vector<Branch> certificate_leaves(const CertNode& node);
std::size_t certificate_node_count(const CertNode& node);

struct SearchLimits {
    std::size_t max_family = 12;
    /// Upper bound on nesting accepted when reading certificate files.
    std::size_t max_depth = 64;
};

struct VerifyResult {
    enum class Status { Ok, Structural, Clause };
    Status status = Status::Ok;
    std::string clause; // which definition clause failed
    std::string path;   // node path, e.g. root/part2/lift
    std::string message;

    bool ok() const noexcept { return status == Status::Ok; }
    explicit operator bool() const noexcept { return ok(); }
    std::string describe() const;
};

/// Checks every clause of every node against the definitions of the family,
/// including the cached varmin/varmax values and that the leaves are exactly F.
VerifyResult verify_certificate(const FamilyParams& params, const BranchSet& set,
                                const Branch& sigma, const Certificate& cert);

/// Exact membership of (F, sigma). Throws std::invalid_argument if sigma is in F
/// and CapExceeded if F is larger than the configured cap.
std::optional<Certificate> decide_membership(const FamilyParams& params, const BranchSet& set,
                                             const Branch& sigma, const SearchLimits& limits = {});

/// Some sigma with (F, sigma) in the family, searched over the canonical witnesses.
std::optional<std::pair<Branch, Certificate>>
decide_membership_any_sigma(const FamilyParams& params, const BranchSet& set,
                            const SearchLimits& limits = {});

/// Certificate for (G, sigma) obtained by pruning a valid certificate for
/// (F, sigma); G must be a nonempty subset of F. Never searches.
Certificate restrict_certificate(const FamilyParams& params, const BranchSet& set,
                                 const Branch& sigma, const Certificate& cert,
                                 const BranchSet& subset);

/// sigma' with (F, sigma') in the family and varmin(F, sigma') equal to the
/// smallest pairwise meet length in F. Requires |F| >= 2 and a valid certificate.
std::pair<Branch, Certificate> minimize_witness(const FamilyParams& params, const BranchSet& set,
                                                const Branch& sigma, const Certificate& cert);

/// Canonical candidate witnesses for a set whose members all extend the first
/// `min_depth` bits of some common node: one branch per exit node of the
/// prefix tree of `set` at depth in [min_depth, D + 1], D the largest pairwise
/// meet length. With `deep`, exits continue to one past the longest word.
std::vector<Branch> candidate_witnesses(const BranchSet& set, std::size_t min_depth = 0,
                                        bool deep = false);

/// Memoized decision engine over a fixed universe of branches. Subsets are
/// bitmasks over the sorted universe.
class MembershipSolver {
public:
    using Mask = std::uint32_t;

    explicit MembershipSolver(BranchSet universe, SearchLimits limits = {});
    ~MembershipSolver();
    MembershipSolver(MembershipSolver&&) noexcept;
    MembershipSolver& operator=(MembershipSolver&&) noexcept;

    const BranchSet& universe() const noexcept;
    Mask full_mask() const noexcept;
    BranchSet subset(Mask mask) const;
    Mask mask_of(const BranchSet& set) const;

    std::optional<Certificate> decide(const FamilyParams& params, Mask mask, const Branch& sigma);
    std::optional<std::pair<Branch, Certificate>> decide_any(const FamilyParams& params, Mask mask);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Largeness witness: sigma and tau_1..tau_m with strictly increasing meets.
struct PhiWitness {
    Branch sigma;
    std::vector<Branch> tau; // tau[k-1] is phi(k)
    FamilyParams params = FamilyParams::plain(1);

    BranchSet image(const FinSet& set) const;
};

using BranchStream = std::function<Branch()>;

/// Stream tau_k = 0^k 1 0 0 ... (k = 1, 2, ...).
BranchStream canonical_stream();

/// Greedy extraction of m stream elements whose meets with a limit branch
/// strictly increase. Throws std::runtime_error when `probe_budget` distinct
/// stream elements do not suffice.
PhiWitness build_phi(const BranchStream& stream, const FamilyParams& params, std::size_t m,
                     std::size_t probe_budget = 4096);

struct PhiCheck {
    bool ok = true;
    std::optional<FinSet> failing;
    std::string reason;
    std::size_t sets_checked = 0;
    explicit operator bool() const noexcept { return ok; }
};

/// Exhaustively checks that phi(F) with the witness sigma is in the family,
/// with varmin = |sigma ^ tau_{min F}| and varmax = |sigma ^ tau_{max F}|, for
/// every nonempty F in S_a (plain) or S_a^[n] (parametric) inside {1..m}.
PhiCheck check_phi(const PhiWitness& w);

} // namespace gfam
