#include "gfam/dyadic.hpp"

#include "gfam/errors.hpp"

#include <algorithm>

namespace gfam {

bool is_initial(const Node& s, const Node& t)
{
    return s.word.size() <= t.word.size() && t.word.compare(0, s.word.size(), s.word) == 0;
}

bool is_proper_initial(const Node& s, const Node& t)
{
    return s.word.size() < t.word.size() && is_initial(s, t);
}

Branch::Branch(std::string word, bool tail) : word_(std::move(word)), tail_(tail)
{
    for (char c : word_)
        if (c != '0' && c != '1')
            throw std::invalid_argument("branch word must be a 0/1 string");
    const char t = tail_ ? '1' : '0';
    while (!word_.empty() && word_.back() == t)
        word_.pop_back();
}

Branch Branch::parse(std::string_view text)
{
    const auto plus = text.find('+');
    if (plus == std::string_view::npos)
        throw ParseError("branch: expected '<word>+<tailbit>'", std::string(text), text.size());
    std::string_view word = text.substr(0, plus);
    std::string_view tail = text.substr(plus + 1);
    if (word.empty())
        throw ParseError("branch: empty word must be written 'e'", std::string(text), 0);
    if (word == "e")
        word = {};
    for (std::size_t i = 0; i < word.size(); ++i)
        if (word[i] != '0' && word[i] != '1')
            throw ParseError("branch: word must be 0/1 or 'e'", std::string(text), i);
    if (tail != "0" && tail != "1")
        throw ParseError("branch: tail bit must be 0 or 1", std::string(text), plus + 1);
    return Branch(std::string(word), tail == "1");
}

Node Branch::prefix(std::size_t n) const
{
    Node out;
    out.word.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.word.push_back(bit(i) ? '1' : '0');
    return out;
}

std::string Branch::to_string() const
{
    return (word_.empty() ? std::string("e") : word_) + (tail_ ? "+1" : "+0");
}

std::strong_ordering operator<=>(const Branch& a, const Branch& b)
{
    const auto n = std::max(a.word_.size(), b.word_.size()) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (a.bit(i) != b.bit(i))
            return a.bit(i) <=> b.bit(i);
    }
    return std::strong_ordering::equal;
}

Branch branch_through(const Node& node, bool turn, bool tail)
{
    return Branch(node.word + (turn ? '1' : '0'), tail);
}

std::size_t meet_length(const Branch& a, const Branch& b)
{
    // Past both words the bits are the constant tails, so any difference shows
    // up no later than position max(|a.word|, |b.word|).
    const auto n = std::max(a.word().size(), b.word().size()) + 1;
    for (std::size_t i = 0; i < n; ++i)
        if (a.bit(i) != b.bit(i))
            return i;
    return kInfiniteMeet;
}

MeetResult meet(const Branch& a, const Branch& b)
{
    const auto len = meet_length(a, b);
    if (len == kInfiniteMeet)
        return MeetResult{std::nullopt, kInfiniteMeet};
    return MeetResult{a.prefix(len), len};
}

} // namespace gfam
