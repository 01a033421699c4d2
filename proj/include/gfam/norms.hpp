#pragma once

#include "gfam/dyadic.hpp"
#include "gfam/families.hpp"
#include "gfam/ordinal.hpp"
#include "gfam/rational.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gfam {

/// Finitely supported vector indexed by branches. Zero entries are never stored.
class Vector {
public:
    Vector() = default;

    static Vector unit(const Branch& b) { Vector v; v.set(b, 1); return v; }

    /// One `<branch> <p>/<q>` entry per line; blank lines and `#` comments skipped.
    /// Repeated branches are an error.
    static Vector parse(std::string_view text);

    void set(const Branch& b, const Rational& value);
    Rational get(const Branch& b) const;
    const std::map<Branch, Rational>& entries() const noexcept { return coeffs_; }
    std::size_t support_size() const noexcept { return coeffs_.size(); }
    bool zero() const noexcept { return coeffs_.empty(); }
    BranchSet support() const;

    Rational l1() const;
    Rational sup() const;

    Vector& operator+=(const Vector& other);
    Vector scaled(const Rational& factor) const;

    std::string to_string() const; // file format

private:
    std::map<Branch, Rational> coeffs_;
};

/// Finitely supported vector indexed by positive naturals.
class SeqVector {
public:
    SeqVector() = default;

    /// One `<index> <p>/<q>` entry per line.
    static SeqVector parse(std::string_view text);

    void set(std::uint64_t index, const Rational& value);
    Rational get(std::uint64_t index) const;
    const std::map<std::uint64_t, Rational>& entries() const noexcept { return coeffs_; }
    std::size_t support_size() const noexcept { return coeffs_.size(); }
    std::string to_string() const;

private:
    std::map<std::uint64_t, Rational> coeffs_;
};

/// Sum of the coefficients of x over F.
Rational functional_apply(const BranchSet& set, const Vector& x);

inline constexpr std::size_t kDefaultSupportCap = 20;

struct XnNorm {
    Rational value;
    BranchSet witness; // empty iff x == 0
};

/// max |F(x)| over F in the projection of the family, with an achieving F.
/// Throws CapExceeded when the support exceeds `cap`.
XnNorm norm_xn(const Vector& x, const FamilyParams& params, std::size_t cap = kDefaultSupportCap);

/// Admissible tree: a leaf picks one coordinate, an inner node splits the
/// interval [first, last] into successive intervals whose minima form a
/// Schreier set and is worth half the sum of its children.
struct TsirelsonTree {
    std::uint64_t first = 0;
    std::uint64_t last = 0;
    bool leaf = true;
    std::uint64_t coordinate = 0; // leaf only
    Rational value;
    std::vector<TsirelsonTree> children;

    std::string to_string() const;
};

struct TsirelsonNorm {
    Rational value;
    TsirelsonTree tree;
};

inline constexpr std::size_t kDefaultTsirelsonCap = 24;

/// Exact Tsirelson-type norm T_alpha (alpha >= 1).
TsirelsonNorm norm_tsirelson(const SeqVector& x, const Ordinal& alpha,
                             std::size_t cap = kDefaultTsirelsonCap);

/// Re-evaluates a tree against x, checking every admissibility condition.
/// Throws std::invalid_argument on a malformed tree.
Rational evaluate_tsirelson_tree(const TsirelsonTree& tree, const SeqVector& x,
                                 const Ordinal& alpha);

struct NormEnclosure {
    Rational lower;
    Rational upper;
    std::string witness;

    Rational width() const { return upper - lower; }
};

/// ||sum_n 2^-n e_n||_{T_a} enclosed by truncation at N (a = 1 gives T).
NormEnclosure lambda_constant(unsigned truncation, const Ordinal& t_alpha = Ordinal::natural(1));

/// The sequence of levels PLAIN(1), PLAIN(2), ... or SCHREIER(a, 1), SCHREIER(a, 2), ...
struct Ladder {
    FamilyParams::Regime regime = FamilyParams::Regime::Plain;
    Ordinal alpha = Ordinal::natural(1);

    static Ladder plain() { return {}; }
    static Ladder schreier(const Ordinal& a) { return {FamilyParams::Regime::Schreier, a}; }
    /// `plain` or `schreier:<ordinal>`.
    static Ladder parse(std::string_view text);

    FamilyParams level(std::uint64_t n) const;
    std::string to_string() const;
};

/// Level norms ||x||_1..||x||_N along the ladder (index 0 is level 1).
std::vector<XnNorm> level_norms(const Vector& x, const Ladder& ladder, unsigned truncation,
                                std::size_t cap = kDefaultSupportCap);

/// ||x|| = ||sum_n 2^-n ||x||_n e_n||_{T_a} enclosed by truncation at N;
/// the tail is bounded by 2^-N ||x||_1.
NormEnclosure norm_composite(const Vector& x, const Ladder& ladder, const Ordinal& t_alpha,
                             unsigned truncation, std::size_t cap = kDefaultSupportCap);

/// 2^-n ||x||_n.
Rational pn_value(const Vector& x, std::uint64_t n, const Ladder& ladder,
                  std::size_t cap = kDefaultSupportCap);

} // namespace gfam
