#include "relaxometer/fraction.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "relaxometer/error.hpp"

namespace relaxometer {

Fraction::Fraction(std::int64_t num, std::int64_t den) {
    if (den == 0) {
        throw DomainError("fraction with zero denominator");
    }
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const auto g = std::gcd(num, den);
    num_ = num / (g == 0 ? 1 : g);
    den_ = den / (g == 0 ? 1 : g);
}

Fraction Fraction::from_double(double value, std::int64_t max_den) {
    if (!std::isfinite(value)) {
        throw DomainError("fraction from non-finite value");
    }
    // Continued-fraction convergents; stop once the denominator would overflow max_den.
    std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    double x = value;
    for (int iter = 0; iter < 64; ++iter) {
        const double a = std::floor(x);
        const auto ai = static_cast<std::int64_t>(a);
        const std::int64_t h2 = ai * h1 + h0;
        const std::int64_t k2 = ai * k1 + k0;
        if (k2 > max_den) {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        const double frac = x - a;
        if (frac < 1e-12 || std::abs(static_cast<double>(h1) / static_cast<double>(k1) - value) < 1e-15) {
            break;
        }
        x = 1.0 / frac;
    }
    return {h1, k1};
}

Fraction Fraction::parse(std::string_view text) {
    auto parse_int = [&](std::string_view s) {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw ConfigurationError("not a fraction: '" + std::string(text) + "'");
        }
        return v;
    };
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        return {parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1))};
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigurationError("not a fraction: '" + std::string(text) + "'");
    }
    return from_double(v);
}

std::string Fraction::str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

} // namespace relaxometer
