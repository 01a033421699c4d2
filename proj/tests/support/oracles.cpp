#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>

namespace gfam::oracle {

bool schreier(const Ordinal& alpha, const std::vector<std::uint64_t>& set)
{
    if (set.empty())
        return true;
    if (alpha.is_zero())
        return set.size() == 1;
    if (alpha.is_limit()) {
        for (std::uint64_t k = 1; k <= set.front(); ++k)
            if (schreier(fundamental_step(alpha, k), set))
                return true;
        return false;
    }
    const auto beta = alpha.predecessor();
    // Every composition of the sorted set into consecutive blocks.
    const auto n = set.size();
    for (std::uint64_t cuts = 0; cuts < (std::uint64_t{1} << (n - 1)); ++cuts) {
        const auto d = static_cast<std::uint64_t>(__builtin_popcountll(cuts)) + 1;
        if (d > set.front())
            continue;
        bool ok = true;
        std::vector<std::uint64_t> block{set[0]};
        for (std::size_t i = 1; i <= n && ok; ++i) {
            if (i == n || (cuts >> (i - 1) & 1)) {
                ok = schreier(beta, block);
                block.clear();
            }
            if (i < n)
                block.push_back(set[i]);
        }
        if (ok)
            return true;
    }
    return false;
}

Rational tsirelson(const SeqVector& x, const Ordinal& alpha)
{
    if (x.entries().empty())
        return 0;
    const auto top = x.entries().rbegin()->first;
    if (top > 16)
        throw std::invalid_argument("oracle supports indices up to 16");
    std::map<std::vector<std::uint64_t>, bool> admissible;
    auto admits = [&](const std::vector<std::uint64_t>& mins) {
        auto it = admissible.find(mins);
        if (it == admissible.end())
            it = admissible.emplace(mins, schreier(alpha, mins)).first;
        return it->second;
    };
    std::map<std::uint32_t, Rational> memo;
    std::function<Rational(std::uint32_t)> value = [&](std::uint32_t mask) -> Rational {
        if (mask == 0)
            return 0;
        if (auto it = memo.find(mask); it != memo.end())
            return it->second;
        Rational best = 0;
        for (std::uint64_t i = 1; i <= top; ++i)
            if (mask >> i & 1)
                best = std::max(best, abs(x.get(i)));
        // Successive intervals E_1 < ... < E_d of [1..top], d >= 2.
        std::vector<std::uint64_t> mins;
        std::vector<std::uint32_t> pieces;
        std::function<void(std::uint64_t)> grow = [&](std::uint64_t from) {
            if (pieces.size() >= 2 && admits(mins)) {
                // A piece holding the whole support is worth at most half of it.
                if (std::find(pieces.begin(), pieces.end(), mask) == pieces.end()) {
                    Rational sum = 0;
                    for (auto p : pieces)
                        sum += value(p);
                    best = std::max(best, Rational(sum / 2));
                }
            }
            for (std::uint64_t a = from; a <= top; ++a) {
                mins.push_back(a);
                if (admits(mins)) {
                    std::uint32_t piece = 0;
                    for (std::uint64_t b = a; b <= top; ++b) {
                        piece |= mask & (std::uint32_t{1} << b);
                        pieces.push_back(piece);
                        grow(b + 1);
                        pieces.pop_back();
                    }
                }
                mins.pop_back();
            }
        };
        grow(1);
        memo.emplace(mask, best);
        return best;
    };
    std::uint32_t full = 0;
    for (const auto& [i, v] : x.entries())
        full |= std::uint32_t{1} << i;
    return value(full);
}

std::vector<Branch> all_branches(std::size_t max_word)
{
    std::vector<Branch> out;
    for (std::size_t len = 0; len <= max_word; ++len)
        for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << len); ++bits) {
            std::string w;
            for (std::size_t i = 0; i < len; ++i)
                w.push_back((bits >> (len - 1 - i) & 1) ? '1' : '0');
            for (bool tail : {false, true})
                if (w.empty() || (w.back() == '1') != tail)
                    out.emplace_back(w, tail);
        }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<Node> naive_meet(const Branch& a, const Branch& b)
{
    const auto horizon = std::max(a.word().size(), b.word().size()) + 1;
    Node n;
    for (std::size_t i = 0; i < horizon; ++i) {
        const char ca = i < a.word().size() ? a.word()[i] : (a.tail() ? '1' : '0');
        const char cb = i < b.word().size() ? b.word()[i] : (b.tail() ? '1' : '0');
        if (ca != cb)
            return n;
        n.word.push_back(ca);
    }
    return std::nullopt;
}

namespace {

std::size_t naive_length(const Branch& a, const Branch& b)
{
    auto m = naive_meet(a, b);
    return m ? m->length() : kInfiniteMeet;
}

// All set partitions of `items` into nonempty blocks.
void partitions(const std::vector<std::uint32_t>& items, std::size_t i,
                std::vector<std::uint32_t>& blocks,
                const std::function<void(const std::vector<std::uint32_t>&)>& visit)
{
    if (i == items.size()) {
        visit(blocks);
        return;
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        blocks[b] |= items[i];
        partitions(items, i + 1, blocks, visit);
        blocks[b] &= ~items[i];
    }
    blocks.push_back(items[i]);
    partitions(items, i + 1, blocks, visit);
    blocks.pop_back();
}

} // namespace

FamilyOracle::FamilyOracle(std::vector<Branch> universe, std::vector<Branch> pool)
    : universe_(std::move(universe)), pool_(std::move(pool))
{
    if (universe_.size() > 32 || pool_.size() > 65535)
        throw std::invalid_argument("oracle universe or pool too large");
    meets_.resize(universe_.size() * pool_.size());
    for (std::size_t u = 0; u < universe_.size(); ++u)
        for (std::size_t s = 0; s < pool_.size(); ++s)
            meets_[u * pool_.size() + s] = naive_length(universe_[u], pool_[s]);
    pool_meets_.resize(pool_.size() * pool_.size());
    for (std::size_t s = 0; s < pool_.size(); ++s)
        for (std::size_t t = 0; t < pool_.size(); ++t)
            pool_meets_[s * pool_.size() + t] = naive_length(pool_[s], pool_[t]);
}

std::size_t FamilyOracle::level_id(const FamilyParams& p)
{
    auto it = std::find(levels_.begin(), levels_.end(), p);
    if (it != levels_.end())
        return static_cast<std::size_t>(it - levels_.begin());
    levels_.push_back(p);
    return levels_.size() - 1;
}

bool FamilyOracle::admits(const FamilyParams& p, const std::vector<std::size_t>& seq) const
{
    if (seq.empty() || seq.front() == 0)
        return false;
    if (p.regime() == FamilyParams::Regime::Plain)
        return seq.size() <= seq.front();
    std::vector<std::uint64_t> s(seq.begin(), seq.end());
    return schreier(p.alpha(), s);
}

bool FamilyOracle::member(const FamilyParams& params, std::uint32_t mask, std::size_t s)
{
    const std::uint64_t key = (std::uint64_t{level_id(params)} << 48) |
                              (std::uint64_t{mask} << 16) | s;
    if (auto it = memo_.find(key); it != memo_.end())
        return it->second;
    const bool r = compute(params, mask, s);
    memo_.emplace(key, r);
    return r;
}

bool FamilyOracle::member_any(const FamilyParams& params, std::uint32_t mask)
{
    for (std::size_t s = 0; s < pool_.size(); ++s)
        if (member(params, mask, s))
            return true;
    return false;
}

std::uint64_t FamilyOracle::skipped_meets(const FamilyParams& pred, std::uint32_t mask,
                                          std::size_t s)
{
    const std::uint64_t key = (std::uint64_t{level_id(pred)} << 48) |
                              (std::uint64_t{mask} << 16) | s;
    if (auto it = skipped_memo_.find(key); it != skipped_memo_.end())
        return it->second;
    std::uint64_t bits = 0;
    for (std::size_t t = 0; t < pool_.size(); ++t) {
        if (t == s)
            continue;
        const auto l = pool_meet(s, t);
        if (l >= 64 || (bits >> l & 1))
            continue;
        std::size_t low = kInfiniteMeet;
        for (std::size_t u = 0; u < universe_.size(); ++u)
            if (mask >> u & 1)
                low = std::min(low, meet(u, t));
        if (l < low && member(pred, mask, t))
            bits |= std::uint64_t{1} << l;
    }
    skipped_memo_.emplace(key, bits);
    return bits;
}

bool FamilyOracle::compute(const FamilyParams& p, std::uint32_t mask, std::size_t s)
{
    std::vector<std::size_t> meets;
    std::vector<std::uint32_t> items;
    for (std::size_t u = 0; u < universe_.size(); ++u)
        if (mask >> u & 1) {
            const auto l = meet(u, s);
            if (l == kInfiniteMeet)
                return false; // sigma in F
            meets.push_back(l);
            items.push_back(std::uint32_t{1} << u);
        }
    if (items.empty())
        return false;
    auto low = [&](std::uint32_t m) {
        std::size_t v = kInfiniteMeet;
        for (std::size_t u = 0; u < universe_.size(); ++u)
            if (m >> u & 1)
                v = std::min(v, meet(u, s));
        return v;
    };
    auto high = [&](std::uint32_t m) {
        std::size_t v = 0;
        for (std::size_t u = 0; u < universe_.size(); ++u)
            if (m >> u & 1)
                v = std::max(v, meet(u, s));
        return v;
    };

    switch (p.stage()) {
    case FamilyParams::Stage::Base: {
        auto sorted = meets;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i - 1] == sorted[i])
                return false;
        return admits(p, sorted);
    }
    case FamilyParams::Stage::Limit: {
        const auto vmin = low(mask);
        for (std::uint64_t n = 1; n <= vmin; ++n)
            if (member(p.limit_step(n), mask, s))
                return true;
        return false;
    }
    case FamilyParams::Stage::Successor:
        break;
    }

    const auto pred = p.predecessor();
    if (member(pred, mask, s))
        return true;

    bool found = false;
    std::vector<std::uint32_t> blocks;
    partitions(items, 0, blocks, [&](const std::vector<std::uint32_t>& parts) {
        if (found)
            return;
        std::vector<std::uint32_t> order = parts;
        std::sort(order.begin(), order.end());
        do {
            // Attached: shared sigma, separated ranges.
            bool ok = true;
            std::vector<std::size_t> mins;
            for (std::size_t i = 0; i < order.size() && ok; ++i) {
                if (i > 0 && !(high(order[i - 1]) < low(order[i])))
                    ok = false;
                else if (!member(pred, order[i], s))
                    ok = false;
                mins.push_back(low(order[i]));
            }
            if (ok && admits(p, mins)) {
                found = true;
                return;
            }
            // Skipped: pick increasing |sigma ^ sigma_i| from what each part allows.
            std::vector<std::uint64_t> reach;
            for (auto part : order)
                reach.push_back(skipped_meets(pred, part, s));
            std::vector<std::size_t> chosen;
            std::function<bool(std::size_t, std::size_t)> pick = [&](std::size_t i,
                                                                      std::size_t floor) {
                if (i == order.size())
                    return admits(p, chosen);
                for (std::size_t l = floor; l < 64; ++l)
                    if (reach[i] >> l & 1) {
                        chosen.push_back(l);
                        if (pick(i + 1, l + 1))
                            return true;
                        chosen.pop_back();
                    }
                return false;
            };
            if (pick(0, 1)) {
                found = true;
                return;
            }
        } while (std::next_permutation(order.begin(), order.end()));
    });
    return found;
}

} // namespace gfam::oracle
