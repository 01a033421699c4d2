#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gfam {

/// Countable ordinal below w^w in Cantor normal form:
///   w^{e_1}*c_1 + ... + w^{e_k}*c_k,  e_1 > ... > e_k,  c_i >= 1.
/// The empty term list is 0.
class Ordinal {
public:
    struct Term {
        std::uint32_t exponent = 0;
        std::uint64_t coefficient = 1;
        friend bool operator==(const Term&, const Term&) = default;
    };

    Ordinal() = default;
    explicit Ordinal(std::vector<Term> terms);

    static Ordinal natural(std::uint64_t n);
    static Ordinal omega_power(std::uint32_t exponent, std::uint64_t coefficient = 1);

    /// Literal grammar: terms `w^E*C`, `w^E`, `w*C`, `w`, `N` joined by `+`.
    static Ordinal parse(std::string_view text);

    const std::vector<Term>& terms() const noexcept { return terms_; }

    bool is_zero() const noexcept { return terms_.empty(); }
    bool is_finite() const noexcept;
    bool is_limit() const noexcept;
    bool is_successor() const noexcept;

    /// Finite value; only meaningful when is_finite().
    std::uint64_t finite_value() const;

    /// a with a + 1 == *this. Requires is_successor().
    Ordinal predecessor() const;
    Ordinal successor() const;

    std::string to_string() const;

    friend std::strong_ordering operator<=>(const Ordinal& a, const Ordinal& b);
    friend bool operator==(const Ordinal& a, const Ordinal& b) = default;

private:
    std::vector<Term> terms_;
};

/// Three-way comparison in ordinal order.
std::strong_ordering cnf_compare(const Ordinal& a, const Ordinal& b);

/// k-th element (k >= 1) of the fixed fundamental sequence of a limit ordinal.
///
/// For a = g + w^e*c with e >= 1:
///   e == 1:  a[k] = g + w*(c-1) + k
///   e >= 2:  a[k] = g + w^e*(c-1) + w^(e-1)*k + 1
/// Every a[k] is a successor, the sequence is strictly increasing with
/// supremum a, and the same sequence drives both the Schreier hierarchy and
/// the dyadic families. Throws std::invalid_argument for non-limit a or k == 0.
Ordinal fundamental_step(const Ordinal& a, std::uint64_t k);

} // namespace gfam
