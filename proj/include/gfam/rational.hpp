#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace gfam {

using Rational = mpq_class;

/// Always `p/q`, q >= 1, lowest terms (e.g. `3/1`, `-1/2`).
std::string to_string(const Rational& q);

/// Accepts `p/q` or `p`, optional sign. Throws ParseError with the offending position.
Rational parse_rational(std::string_view text);

/// 2^-n.
Rational pow2_inv(unsigned n);

inline Rational abs(const Rational& q)
{
    return q < 0 ? Rational(-q) : q;
}

} // namespace gfam
