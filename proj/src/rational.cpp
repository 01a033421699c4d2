#include "gfam/rational.hpp"

#include "gfam/errors.hpp"

#include <cctype>

namespace gfam {

std::string to_string(const Rational& q)
{
    Rational c = q;
    c.canonicalize();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

Rational parse_rational(std::string_view text)
{
    std::size_t pos = 0;
    auto digits = [&](const char* what) {
        const auto start = pos;
        if (pos < text.size() && (text[pos] == '-' || text[pos] == '+'))
            ++pos;
        const auto first_digit = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (pos == first_digit)
            throw ParseError(std::string("rational: expected ") + what, std::string(text), pos);
        return std::string(text.substr(start, pos - start));
    };
    auto num = digits("numerator");
    std::string den = "1";
    if (pos < text.size() && text[pos] == '/') {
        ++pos;
        const auto den_pos = pos;
        den = digits("denominator");
        if (den[0] == '-' || den[0] == '+')
            throw ParseError("rational: signed denominator", std::string(text), den_pos);
        if (mpz_class(den) == 0)
            throw ParseError("rational: zero denominator", std::string(text), den_pos);
    }
    if (pos != text.size())
        throw ParseError("rational: trailing characters", std::string(text), pos);
    if (num[0] == '+')
        num.erase(0, 1);
    Rational q{mpz_class(num), mpz_class(den)};
    q.canonicalize();
    return q;
}

Rational pow2_inv(unsigned n)
{
    mpz_class den = 1;
    den <<= n;
    return Rational(mpz_class(1), den);
}

} // namespace gfam
