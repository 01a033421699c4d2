#include "gfam/ordinal.hpp"

#include "gfam/errors.hpp"

#include <cctype>
#include <limits>
#include <stdexcept>

namespace gfam {

Ordinal::Ordinal(std::vector<Term> terms) : terms_(std::move(terms))
{
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (terms_[i].coefficient == 0)
            throw std::invalid_argument("ordinal term with zero coefficient");
        if (i > 0 && terms_[i - 1].exponent <= terms_[i].exponent)
            throw std::invalid_argument("ordinal exponents must be strictly decreasing");
    }
}

Ordinal Ordinal::natural(std::uint64_t n)
{
    if (n == 0)
        return Ordinal{};
    return Ordinal({Term{0, n}});
}

Ordinal Ordinal::omega_power(std::uint32_t exponent, std::uint64_t coefficient)
{
    return Ordinal({Term{exponent, coefficient}});
}

bool Ordinal::is_finite() const noexcept
{
    return terms_.empty() || (terms_.size() == 1 && terms_[0].exponent == 0);
}

bool Ordinal::is_limit() const noexcept
{
    return !terms_.empty() && terms_.back().exponent >= 1;
}

bool Ordinal::is_successor() const noexcept
{
    return !terms_.empty() && terms_.back().exponent == 0;
}

std::uint64_t Ordinal::finite_value() const
{
    if (!is_finite())
        throw std::logic_error("finite_value of an infinite ordinal");
    return terms_.empty() ? 0 : terms_[0].coefficient;
}

Ordinal Ordinal::predecessor() const
{
    if (!is_successor())
        throw std::logic_error("predecessor of a non-successor ordinal");
    auto terms = terms_;
    if (--terms.back().coefficient == 0)
        terms.pop_back();
    return Ordinal(std::move(terms));
}

Ordinal Ordinal::successor() const
{
    auto terms = terms_;
    if (!terms.empty() && terms.back().exponent == 0)
        ++terms.back().coefficient;
    else
        terms.push_back(Term{0, 1});
    return Ordinal(std::move(terms));
}

std::string Ordinal::to_string() const
{
    if (terms_.empty())
        return "0";
    std::string out;
    for (const auto& t : terms_) {
        if (!out.empty())
            out += '+';
        if (t.exponent == 0) {
            out += std::to_string(t.coefficient);
            continue;
        }
        out += 'w';
        if (t.exponent > 1)
            out += '^' + std::to_string(t.exponent);
        if (t.coefficient > 1)
            out += '*' + std::to_string(t.coefficient);
    }
    return out;
}

std::strong_ordering operator<=>(const Ordinal& a, const Ordinal& b)
{
    const auto n = std::min(a.terms_.size(), b.terms_.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& x = a.terms_[i];
        const auto& y = b.terms_[i];
        if (x.exponent != y.exponent)
            return x.exponent <=> y.exponent;
        if (x.coefficient != y.coefficient)
            return x.coefficient <=> y.coefficient;
    }
    return a.terms_.size() <=> b.terms_.size();
}

std::strong_ordering cnf_compare(const Ordinal& a, const Ordinal& b)
{
    return a <=> b;
}

Ordinal fundamental_step(const Ordinal& a, std::uint64_t k)
{
    if (!a.is_limit())
        throw std::invalid_argument("fundamental_step: " + a.to_string() + " is not a limit");
    if (k == 0)
        throw std::invalid_argument("fundamental_step: index must be positive");

    auto terms = a.terms();
    const Ordinal::Term last = terms.back();
    terms.pop_back();
    if (last.coefficient > 1)
        terms.push_back(Ordinal::Term{last.exponent, last.coefficient - 1});
    terms.push_back(Ordinal::Term{last.exponent - 1, k});
    Ordinal raw(std::move(terms));
    return raw.is_limit() ? raw.successor() : raw;
}

namespace {

class OrdinalParser {
public:
    explicit OrdinalParser(std::string_view text) : text_(text) {}

    Ordinal parse()
    {
        skip_spaces();
        if (at_end())
            fail("empty ordinal literal");
        std::vector<Ordinal::Term> terms;
        while (true) {
            terms.push_back(term());
            skip_spaces();
            if (at_end())
                break;
            expect('+');
        }
        for (std::size_t i = 0; i < terms.size(); ++i) {
            if (terms[i].coefficient == 0) {
                if (terms.size() == 1)
                    return Ordinal{};
                fail("zero coefficient");
            }
            if (i > 0 && terms[i - 1].exponent <= terms[i].exponent)
                fail("exponents must be strictly decreasing");
        }
        return Ordinal(std::move(terms));
    }

private:
    Ordinal::Term term()
    {
        skip_spaces();
        if (at_end())
            fail("expected a term");
        if (peek() == 'w' || peek() == 'W') {
            ++pos_;
            Ordinal::Term t{1, 1};
            skip_spaces();
            if (!at_end() && peek() == '^') {
                ++pos_;
                const auto e = number();
                if (e > std::numeric_limits<std::uint32_t>::max())
                    fail("exponent too large");
                t.exponent = static_cast<std::uint32_t>(e);
            }
            skip_spaces();
            if (!at_end() && peek() == '*') {
                ++pos_;
                const auto at = pos_;
                t.coefficient = number();
                if (t.coefficient == 0) {
                    pos_ = at;
                    fail("zero coefficient");
                }
            }
            if (t.exponent == 0)
                fail("w^0 is not allowed; write a natural");
            return t;
        }
        return Ordinal::Term{0, number()};
    }

    std::uint64_t number()
    {
        skip_spaces();
        if (at_end() || !std::isdigit(static_cast<unsigned char>(peek())))
            fail("expected a natural number");
        std::uint64_t v = 0;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
            const auto digit = static_cast<std::uint64_t>(peek() - '0');
            if (v > (std::numeric_limits<std::uint64_t>::max() - digit) / 10)
                fail("number too large");
            v = v * 10 + digit;
            ++pos_;
        }
        return v;
    }

    void expect(char c)
    {
        skip_spaces();
        if (at_end() || peek() != c)
            fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    void skip_spaces()
    {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek())))
            ++pos_;
    }

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError("ordinal: " + what, std::string(text_), pos_);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace

Ordinal Ordinal::parse(std::string_view text)
{
    return OrdinalParser(text).parse();
}

} // namespace gfam
