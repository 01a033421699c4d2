#include "gfam/schreier.hpp"

#include "gfam/errors.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

namespace gfam {

FinSet::FinSet(std::initializer_list<std::uint64_t> elements)
    : FinSet(std::vector<std::uint64_t>(elements))
{
}

FinSet::FinSet(std::vector<std::uint64_t> elements) : elements_(std::move(elements))
{
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        if (elements_[i] == 0)
            throw std::invalid_argument("FinSet elements must be positive");
        if (i > 0 && elements_[i - 1] >= elements_[i])
            throw std::invalid_argument("FinSet elements must be strictly increasing");
    }
}

bool FinSet::contains(std::uint64_t v) const
{
    return std::binary_search(elements_.begin(), elements_.end(), v);
}

std::string FinSet::to_string() const
{
    std::string out = "{";
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(elements_[i]);
    }
    return out + "}";
}

namespace {

std::uint64_t parse_natural(std::string_view all, std::size_t& pos)
{
    while (pos < all.size() && all[pos] == ' ')
        ++pos;
    std::uint64_t v = 0;
    const auto* first = all.data() + pos;
    const auto* last = all.data() + all.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr == first)
        throw ParseError("set: expected a natural number", std::string(all), pos);
    pos += static_cast<std::size_t>(ptr - first);
    while (pos < all.size() && all[pos] == ' ')
        ++pos;
    return v;
}

} // namespace

FinSet FinSet::parse(std::string_view text)
{
    std::size_t pos = 0;
    while (pos < text.size() && text[pos] == ' ')
        ++pos;
    if (pos == text.size() || text.substr(pos) == "{}")
        return FinSet{};
    const bool braced = text[pos] == '{';
    if (braced)
        ++pos;
    std::vector<std::uint64_t> out;
    while (true) {
        const auto start = pos;
        const auto a = parse_natural(text, pos);
        if (text.substr(pos, 2) == "..") {
            pos += 2;
            const auto b = parse_natural(text, pos);
            if (a == 0 || b < a)
                throw ParseError("set: bad range", std::string(text), start);
            for (auto v = a; v <= b; ++v)
                out.push_back(v);
        } else {
            out.push_back(a);
        }
        if (pos < text.size() && text[pos] == ',') {
            ++pos;
            continue;
        }
        break;
    }
    if (braced) {
        if (pos >= text.size() || text[pos] != '}')
            throw ParseError("set: expected '}'", std::string(text), pos);
        ++pos;
    }
    if (pos != text.size())
        throw ParseError("set: trailing characters", std::string(text), pos);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] == 0)
            throw ParseError("set: elements must be positive", std::string(text), 0);
        if (i > 0 && out[i - 1] >= out[i])
            throw ParseError("set: elements must be strictly increasing", std::string(text), 0);
    }
    return FinSet(std::move(out));
}

namespace {

using Elems = std::vector<std::uint64_t>;

struct MemoState {
    bool enabled = true;
    std::map<std::pair<Ordinal, Elems>, bool> member;
};

MemoState& memo()
{
    thread_local MemoState state;
    return state;
}

bool member_impl(const Ordinal& alpha, const Elems& f);

bool member_range(const Ordinal& alpha, const Elems& f, std::size_t i, std::size_t j)
{
    return member_impl(alpha, Elems(f.begin() + static_cast<std::ptrdiff_t>(i),
                                    f.begin() + static_cast<std::ptrdiff_t>(j)));
}

bool member_uncached(const Ordinal& alpha, const Elems& f)
{
    if (f.empty())
        return true;
    if (alpha.is_zero())
        return f.size() == 1;
    if (alpha.is_successor()) {
        const Ordinal beta = alpha.predecessor();
        // fewest[i]: least number of successive S_beta blocks covering f[i..].
        const auto n = f.size();
        constexpr auto kInf = std::numeric_limits<std::size_t>::max();
        std::vector<std::size_t> fewest(n + 1, kInf);
        fewest[n] = 0;
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t j = n; j > i; --j) {
                if (fewest[j] == kInf || fewest[j] + 1 >= fewest[i])
                    continue;
                if (member_range(beta, f, i, j))
                    fewest[i] = fewest[j] + 1;
            }
        }
        return fewest[0] <= f.front();
    }
    for (std::uint64_t k = 1; k <= f.front(); ++k) {
        if (member_impl(fundamental_step(alpha, k), f))
            return true;
    }
    return false;
}

bool member_impl(const Ordinal& alpha, const Elems& f)
{
    // Every S_alpha contains the empty set and all singletons.
    if (f.size() <= 1)
        return true;
    auto& m = memo();
    if (!m.enabled)
        return member_uncached(alpha, f);
    auto key = std::make_pair(alpha, f);
    if (auto it = m.member.find(key); it != m.member.end())
        return it->second;
    const bool r = member_uncached(alpha, f);
    m.member.emplace(std::move(key), r);
    return r;
}

// Is `rest` (bitmask over f) a union of at most n members of S_alpha?
bool cover_by(const Ordinal& alpha, const Elems& f, std::uint32_t rest, std::uint64_t n,
              std::map<std::pair<std::uint32_t, std::uint64_t>, bool>& seen)
{
    if (rest == 0)
        return true;
    if (n == 0)
        return false;
    if (auto it = seen.find({rest, n}); it != seen.end())
        return it->second;

    // Some block contains the least remaining element; try every such member.
    const int lead = __builtin_ctz(rest);
    std::vector<int> others;
    for (int i = lead + 1; i < static_cast<int>(f.size()); ++i)
        if (rest >> i & 1u)
            others.push_back(i);

    bool found = false;
    Elems block{f[static_cast<std::size_t>(lead)]};
    std::uint32_t block_mask = 1u << lead;
    auto grow = [&](auto&& self, std::size_t from) -> void {
        if (found)
            return;
        if (cover_by(alpha, f, rest & ~block_mask, n - 1, seen)) {
            found = true;
            return;
        }
        for (std::size_t t = from; t < others.size() && !found; ++t) {
            const int idx = others[t];
            block.push_back(f[static_cast<std::size_t>(idx)]);
            block_mask |= 1u << idx;
            if (member_impl(alpha, block))
                self(self, t + 1);
            block.pop_back();
            block_mask &= ~(1u << idx);
        }
    };
    grow(grow, 0);
    seen[{rest, n}] = found;
    return found;
}

bool iterated_impl(const Ordinal& alpha, std::uint64_t n, const Elems& f)
{
    if (f.empty())
        return true;
    if (n <= 1)
        return member_impl(alpha, f);
    // Successive blocks from the left; a rejected set of block minima prunes
    // every refinement (S_alpha is hereditary).
    Elems minima;
    auto split = [&](auto&& self, std::size_t start) -> bool {
        if (start == f.size())
            return true;
        for (std::size_t stop = f.size(); stop > start; --stop) {
            minima.push_back(f[start]);
            bool ok = member_impl(alpha, minima) &&
                      iterated_impl(alpha, n - 1,
                                    Elems(f.begin() + static_cast<std::ptrdiff_t>(start),
                                          f.begin() + static_cast<std::ptrdiff_t>(stop))) &&
                      self(self, stop);
            minima.pop_back();
            if (ok)
                return true;
        }
        return false;
    };
    return split(split, 0);
}

} // namespace

bool schreier_member(const Ordinal& alpha, const FinSet& set)
{
    return member_impl(alpha, set.elements());
}

bool schreier_convolve_member(const Ordinal& alpha, std::uint64_t n, const FinSet& set)
{
    if (n == 0)
        throw std::invalid_argument("schreier_convolve_member: n must be positive");
    if (set.size() > 31)
        throw CapExceeded("schreier_convolve_member: set larger than 31 elements");
    if (n == 1)
        return schreier_member(alpha, set);
    std::map<std::pair<std::uint32_t, std::uint64_t>, bool> seen;
    const std::uint32_t all =
        set.empty() ? 0u : static_cast<std::uint32_t>((std::uint64_t{1} << set.size()) - 1);
    return cover_by(alpha, set.elements(), all, n, seen);
}

bool schreier_iterated_member(const Ordinal& alpha, std::uint64_t n, const FinSet& set)
{
    if (n == 0)
        throw std::invalid_argument("schreier_iterated_member: n must be positive");
    return iterated_impl(alpha, n, set.elements());
}

std::vector<FinSet> schreier_enumerate(const Ordinal& alpha, const FinSet& universe,
                                       std::size_t cap)
{
    return enumerate_hereditary(
        universe, [&](const FinSet& s) { return schreier_member(alpha, s); }, cap);
}

void set_schreier_memo_enabled(bool enabled)
{
    memo().enabled = enabled;
}

void clear_schreier_memo()
{
    memo().member.clear();
}

namespace detail {

void sort_by_size_then_lex(std::vector<FinSet>& sets)
{
    std::sort(sets.begin(), sets.end(), [](const FinSet& a, const FinSet& b) {
        if (a.size() != b.size())
            return a.size() < b.size();
        return a.elements() < b.elements();
    });
}

void check_enumeration_cap(const FinSet& universe, std::size_t cap)
{
    if (universe.size() > cap)
        throw CapExceeded("enumeration universe has " + std::to_string(universe.size()) +
                          " elements, cap is " + std::to_string(cap));
}

} // namespace detail

} // namespace gfam
