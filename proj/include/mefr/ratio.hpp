#pragma once

#include <compare>
#include <cstdint>

namespace mefr {

// Exact non-negative fraction. Every similarity in the toolkit is a ratio of
// set sizes, so comparisons and ties are decided without rounding.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  // num/den, with 0/0 read as perfect agreement on nothing.
  static constexpr Ratio of(std::uint64_t n, std::uint64_t d) {
    return d == 0 ? Ratio{1, 1} : Ratio{n, d};
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend constexpr std::strong_ordering operator<=>(const Ratio &a, const Ratio &b) {
    // Operands are set sizes, far below 2^32, so the products fit.
    return a.num * b.den <=> b.num * a.den;
  }
  friend constexpr bool operator==(const Ratio &a, const Ratio &b) {
    return a.num * b.den == b.num * a.den;
  }
};

} // namespace mefr
