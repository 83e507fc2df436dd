#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace nct {

/// Exact rational arithmetic for onsets and durations, in quarter notes.
using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

/// "3/2" when the denominator is not 1, otherwise "3".
std::string to_string(const Rational& r);

/// Parses the format produced by to_string. Throws Error(malformed_token).
Rational rational_from_string(std::string_view s);

/// True when r is an integer multiple of unit (unit > 0).
inline bool is_multiple_of(const Rational& r, const Rational& unit) {
    Rational q = r / unit;
    return q.denominator() == 1;
}

} // namespace nct
