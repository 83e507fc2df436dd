#include "nct/rational.hpp"

#include "nct/error.hpp"

#include <charconv>

namespace nct {

std::string to_string(const Rational& r) {
    std::string s = std::to_string(r.numerator());
    if (r.denominator() != 1) {
        s += '/';
        s += std::to_string(r.denominator());
    }
    return s;
}

Rational rational_from_string(std::string_view s) {
    auto parse_int = [&](std::string_view part) -> std::int64_t {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || ptr != part.data() + part.size())
            throw Error(errc::malformed_token, "bad rational '" + std::string(s) + "'");
        return v;
    };
    auto slash = s.find('/');
    if (slash == std::string_view::npos) return Rational(parse_int(s));
    std::int64_t num = parse_int(s.substr(0, slash));
    std::int64_t den = parse_int(s.substr(slash + 1));
    if (den == 0) throw Error(errc::malformed_token, "zero denominator in '" + std::string(s) + "'");
    return Rational(num, den);
}

} // namespace nct
