#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace renewal_lab {

/// The time grid j -> floor(j^q), 0 < q < 1, with the inverse queries the
/// last-visit statistics need. All three use the same long double power so
/// they stay mutually consistent.
class PowerGrid {
 public:
  explicit PowerGrid(double q) : q_(q) {}

  double q() const { return q_; }

  std::uint64_t at(std::uint64_t j) const {
    return static_cast<std::uint64_t>(std::floor(std::pow(static_cast<long double>(j), static_cast<long double>(q_))));
  }

  /// Smallest j with at(j) >= k.
  std::uint64_t first_index(std::uint64_t k) const {
    if (k == 0) return 0;
    auto j = static_cast<std::uint64_t>(
        std::ceil(std::pow(static_cast<long double>(k), 1.0L / static_cast<long double>(q_))));
    while (j > 0 && at(j - 1) >= k) --j;
    while (at(j) < k) ++j;
    return j;
  }

  /// Largest j with j^q <= x.
  std::uint64_t last_index_below(double x) const {
    if (x < 1.0) return 0;
    const long double qq = q_;
    auto j = static_cast<std::uint64_t>(std::floor(std::pow(static_cast<long double>(x), 1.0L / qq)));
    while (j > 0 && std::pow(static_cast<long double>(j), qq) > x) --j;
    while (std::pow(static_cast<long double>(j + 1), qq) <= x) ++j;
    return j;
  }

  /// #{ j <= J : at(j) = k }.
  std::uint64_t multiplicity(std::uint64_t k, std::uint64_t J) const {
    const std::uint64_t lo = first_index(k);
    if (lo > J) return 0;
    const std::uint64_t hi = std::min(J, first_index(k + 1) - 1);
    return hi - lo + 1;
  }

 private:
  double q_;
};

}  // namespace renewal_lab
