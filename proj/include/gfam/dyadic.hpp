#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace gfam {

/// Finite 0/1 word; a node of the dyadic tree. The empty word is the root.
struct Node {
    std::string word;

    std::size_t length() const noexcept { return word.size(); }
    std::string to_string() const { return word.empty() ? "e" : word; }

    friend auto operator<=>(const Node&, const Node&) = default;
};

/// s is an initial segment of t (s may equal t).
bool is_initial(const Node& s, const Node& t);
/// s is a proper initial segment of t.
bool is_proper_initial(const Node& s, const Node& t);

/// Eventually constant infinite 0/1 sequence word ^ tail tail tail ...
///
/// Stored in canonical form (the word never ends with the tail bit), so two
/// branches are equal exactly when their canonical forms are.
class Branch {
public:
    Branch() = default;
    Branch(std::string word, bool tail);

    /// `<word>+<tailbit>`, the empty word written `e` (e.g. `e+1`).
    static Branch parse(std::string_view text);

    const std::string& word() const noexcept { return word_; }
    bool tail() const noexcept { return tail_; }

    /// Bit at zero-based position i (one-based position i+1).
    bool bit(std::size_t i) const noexcept
    {
        return i < word_.size() ? word_[i] == '1' : tail_;
    }

    /// First n bits.
    Node prefix(std::size_t n) const;

    std::string to_string() const;

    friend bool operator==(const Branch&, const Branch&) = default;
    /// Lexicographic order of the infinite sequences.
    friend std::strong_ordering operator<=>(const Branch& a, const Branch& b);

private:
    std::string word_;
    bool tail_ = false;
};

/// The branch that follows `node`, then takes bit `turn`, then repeats `tail`.
Branch branch_through(const Node& node, bool turn, bool tail = false);

inline constexpr std::size_t kInfiniteMeet = std::numeric_limits<std::size_t>::max();

/// |a ^ b|: length of the longest common initial segment, kInfiniteMeet when a == b.
std::size_t meet_length(const Branch& a, const Branch& b);

/// a ^ b: either the common initial segment or the branch itself when a == b.
struct MeetResult {
    std::optional<Node> node; // empty iff infinite
    std::size_t length = 0;   // kInfiniteMeet iff infinite

    bool infinite() const noexcept { return !node.has_value(); }
};

MeetResult meet(const Branch& a, const Branch& b);

} // namespace gfam
