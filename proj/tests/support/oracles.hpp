#pragma once

// Brute-force reference implementations used only by tests. They follow the
// recursive definitions literally and share no search code with the library.

#include "gfam/dyadic.hpp"
#include "gfam/families.hpp"
#include "gfam/norms.hpp"
#include "gfam/ordinal.hpp"
#include "gfam/schreier.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace gfam::oracle {

/// F in S_alpha by trying every split of F into successive blocks.
bool schreier(const Ordinal& alpha, const std::vector<std::uint64_t>& set);

/// ||x||_{T_alpha} by recursion over every family of successive intervals of
/// [1..max supp x], memoized on the restricted support.
Rational tsirelson(const SeqVector& x, const Ordinal& alpha);

/// All canonical branches whose word has at most `max_word` bits.
std::vector<Branch> all_branches(std::size_t max_word);

/// sigma wedge tau computed bit by bit: the common prefix, or nullopt when equal.
std::optional<Node> naive_meet(const Branch& a, const Branch& b);

/// Literal membership test for the dyadic families over a fixed universe of
/// at most 32 branches; every inner witness sigma_i ranges over `pool`.
/// Every ordered partition is tried for skipped and attached branchings.
class FamilyOracle {
public:
    FamilyOracle(std::vector<Branch> universe, std::vector<Branch> pool);

    const std::vector<Branch>& universe() const { return universe_; }
    const std::vector<Branch>& pool() const { return pool_; }

    /// (F, pool[s]) in the family, F given as a mask over the universe.
    bool member(const FamilyParams& params, std::uint32_t mask, std::size_t s);
    /// Some pool element witnesses F.
    bool member_any(const FamilyParams& params, std::uint32_t mask);

private:
    struct Entry {
        bool member;
    };

    std::size_t level_id(const FamilyParams& p);
    std::size_t meet(std::size_t u, std::size_t s) const { return meets_[u * pool_.size() + s]; }
    std::size_t pool_meet(std::size_t s, std::size_t t) const
    {
        return pool_meets_[s * pool_.size() + t];
    }
    bool admits(const FamilyParams& p, const std::vector<std::size_t>& increasing) const;
    bool compute(const FamilyParams& p, std::uint32_t mask, std::size_t s);
    // Bitmask of |sigma ^ sigma_i| values reachable by a skipped part.
    std::uint64_t skipped_meets(const FamilyParams& pred, std::uint32_t mask, std::size_t s);

    std::vector<Branch> universe_;
    std::vector<Branch> pool_;
    std::vector<std::size_t> meets_;
    std::vector<std::size_t> pool_meets_;
    std::vector<int> in_pool_; // universe index -> pool index or -1
    std::vector<FamilyParams> levels_;
    std::unordered_map<std::uint64_t, bool> memo_;
    std::unordered_map<std::uint64_t, std::uint64_t> skipped_memo_;
};

} // namespace gfam::oracle
