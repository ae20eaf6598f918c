#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace relaxometer {

/// Exact positive rational p/q, always stored in lowest terms.
class Fraction {
  public:
    Fraction() = default;
    Fraction(std::int64_t num, std::int64_t den);

    /// Parses "p/q", an integer, or a decimal (converted to the closest
    /// fraction with denominator at most 10^6).
    static Fraction parse(std::string_view text);
    static Fraction from_double(double value, std::int64_t max_den = 1'000'000);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    /// True when `this * n` is an integer.
    bool divides(std::int64_t n) const { return (num_ * n) % den_ == 0; }
    std::int64_t times(std::int64_t n) const { return num_ * n / den_; }

    Fraction complement() const { return {den_ - num_, den_}; }

    std::string str() const;

    friend bool operator==(const Fraction&, const Fraction&) = default;

  private:
    std::int64_t num_ = 1;
    std::int64_t den_ = 2;
};

} // namespace relaxometer
