#pragma once

#include "gfam/ordinal.hpp"

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace gfam {

/// Strictly increasing finite set of positive naturals.
class FinSet {
public:
    FinSet() = default;
    FinSet(std::initializer_list<std::uint64_t> elements);
    explicit FinSet(std::vector<std::uint64_t> elements);

    /// `2,3,5`, `1..12`, `{}` or the empty string.
    static FinSet parse(std::string_view text);

    const std::vector<std::uint64_t>& elements() const noexcept { return elements_; }
    std::size_t size() const noexcept { return elements_.size(); }
    bool empty() const noexcept { return elements_.empty(); }
    std::uint64_t min() const { return elements_.front(); }
    std::uint64_t max() const { return elements_.back(); }
    bool contains(std::uint64_t v) const;

    auto begin() const noexcept { return elements_.begin(); }
    auto end() const noexcept { return elements_.end(); }

    std::string to_string() const;

    friend auto operator<=>(const FinSet&, const FinSet&) = default;

private:
    std::vector<std::uint64_t> elements_;
};

/// F in S_a, with S_0 = singletons and the empty set,
/// S_{b+1} = {F_1 u ... u F_d : F_1 < ... < F_d in S_b, d <= min F_1},
/// S_a (limit) = union over k of {F in S_{a[k]} : min F >= k}.
bool schreier_member(const Ordinal& alpha, const FinSet& set);

/// F is a union of at most n members of S_a (unions need not be successive).
bool schreier_convolve_member(const Ordinal& alpha, std::uint64_t n, const FinSet& set);

/// Iterated convolution S_a^[n]: S_a^[1] = S_a and
/// S_a^[n+1] = {F_1 u ... u F_d : F_1 < ... < F_d in S_a^[n], {min F_i} in S_a}.
/// This is the class whose images under a largeness witness land in the
/// n-th parametric dyadic family.
bool schreier_iterated_member(const Ordinal& alpha, std::uint64_t n, const FinSet& set);

inline constexpr std::size_t kDefaultEnumerationCap = 20;

/// All subsets of `universe` in S_a, ordered by size then lexicographically.
/// Throws CapExceeded when the universe is larger than `cap`.
std::vector<FinSet> schreier_enumerate(const Ordinal& alpha, const FinSet& universe,
                                       std::size_t cap = kDefaultEnumerationCap);

/// Subsets of `universe` accepted by `member`, same order as schreier_enumerate.
/// `member` must describe a hereditary family.
template <class Pred>
std::vector<FinSet> enumerate_hereditary(const FinSet& universe, Pred&& member,
                                         std::size_t cap = kDefaultEnumerationCap);

/// Memo tables are per thread and never change results; disabling them is
/// for consistency tests.
void set_schreier_memo_enabled(bool enabled);
void clear_schreier_memo();

namespace detail {
void sort_by_size_then_lex(std::vector<FinSet>& sets);
void check_enumeration_cap(const FinSet& universe, std::size_t cap);
} // namespace detail

template <class Pred>
std::vector<FinSet> enumerate_hereditary(const FinSet& universe, Pred&& member, std::size_t cap)
{
    detail::check_enumeration_cap(universe, cap);
    const auto& u = universe.elements();
    std::vector<FinSet> out;
    std::vector<std::uint64_t> current;
    // Depth-first extension by larger elements; a rejected set prunes its subtree.
    auto extend = [&](auto&& self, std::size_t from) -> void {
        out.emplace_back(current);
        for (std::size_t i = from; i < u.size(); ++i) {
            current.push_back(u[i]);
            if (member(FinSet(current)))
                self(self, i + 1);
            current.pop_back();
        }
    };
    if (member(FinSet{}))
        extend(extend, 0);
    detail::sort_by_size_then_lex(out);
    return out;
}

} // namespace gfam
