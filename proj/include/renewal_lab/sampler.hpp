#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "renewal_lab/laws.hpp"
#include "renewal_lab/numeric.hpp"
#include "renewal_lab/rng.hpp"

namespace renewal_lab {

/// Excursion lengths beyond this are reported as this value.
inline constexpr std::uint64_t kSaturatedLength = std::uint64_t{1} << 62;

/// Draws from a ReturnLaw: guide-table inverse CDF on the stored masses, and
/// for power laws an exact rejection sampler for the analytic tail beyond n_max.
class ExcursionSampler {
 public:
  explicit ExcursionSampler(const ReturnLaw& law) : law_(law) {
    const auto mass = law.masses();
    cdf_.assign(mass.size(), 0.0);
    CompensatedSum s;
    for (std::size_t n = 1; n < mass.size(); ++n) {
      s.add(mass[n]);
      cdf_[n] = s.value();
      if (mass[n] > 0.0) last_positive_ = n;
    }
    head_mass_ = law.truncation_remainder() > 0.0 ? cdf_.back() : 2.0;
    const std::size_t K = mass.size() - 1;
    guide_.resize(K + 1);
    std::size_t j = 1;
    for (std::size_t i = 0; i <= K; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(K);
      while (j < K && cdf_[j] <= u) ++j;
      guide_[i] = static_cast<std::uint32_t>(j);
    }
    if (law.has_tail_index()) {
      beta_ = law.beta();
      first_tail_ = static_cast<double>(K + 1);
      ratio_bound_ = tail_ratio(first_tail_);
    }
  }

  const ReturnLaw& law() const { return law_; }

  std::uint64_t draw(RandomStream& rng) const {
    const double u = rng.uniform();
    if (u >= head_mass_) return draw_tail(rng);
    const std::size_t K = cdf_.size() - 1;
    std::size_t j = guide_[static_cast<std::size_t>(u * static_cast<double>(K))];
    while (j < K && cdf_[j] <= u) ++j;
    if (cdf_[j] <= u) j = last_positive_;
    return j;
  }

 private:
  // k^{-(beta+1)} / (k^{-beta} - (k+1)^{-beta}), decreasing in k.
  double tail_ratio(double k) const { return 1.0 / (k * -std::expm1(-beta_ * std::log1p(1.0 / k))); }

  std::uint64_t draw_tail(RandomStream& rng) const {
    for (;;) {
      const double x = first_tail_ * std::pow(rng.uniform(), -1.0 / beta_);
      const double accept = rng.uniform();
      if (!(x < 0x1.0p62)) return kSaturatedLength;
      const double k = std::floor(x);
      if (accept * ratio_bound_ <= tail_ratio(k)) return static_cast<std::uint64_t>(k);
    }
  }

  ReturnLaw law_;
  std::vector<double> cdf_;
  std::vector<std::uint32_t> guide_;
  double head_mass_ = 2.0;
  std::size_t last_positive_ = 1;
  double beta_ = 0.0;
  double first_tail_ = 0.0;
  double ratio_bound_ = 0.0;
};

}  // namespace renewal_lab
