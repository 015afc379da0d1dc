#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "renewal_lab/error.hpp"
#include "renewal_lab/numeric.hpp"

namespace renewal_lab {

/// Pure power-law tail a_n = n^{-(beta+1)} / zeta(beta+1).
struct PowerTail {
  double beta = 0.0;
  double zeta = 0.0;      // normalizer Z(beta + 1)
  double mass_coef = 0.0; // a_n * n^{beta+1} = 1 / Z
  double c_tail = 0.0;    // P(tau > n) ~ c_tail * n^{-beta},  c_tail = 1 / (beta Z)
};

/// Return-time law a_n = P(tau = n), n >= 1. Masses up to n_max are tabulated;
/// the mass beyond n_max is carried analytically for power laws and is zero for
/// finite-support laws. Immutable and cheap to copy.
class ReturnLaw {
 public:
  ReturnLaw() = default;

  std::size_t n_max() const { return data_->mass.size() - 1; }

  /// a_n; analytic beyond the table for power laws.
  double mass(std::uint64_t n) const {
    if (n == 0) return 0.0;
    if (n <= n_max()) return data_->mass[n];
    if (data_->power) return std::pow(static_cast<double>(n), -(data_->power->beta + 1.0)) / data_->power->zeta;
    return 0.0;
  }

  /// P(tau > n) = sum_{j > n} a_j, including the analytic remainder.
  double tail(std::uint64_t n) const {
    if (n <= n_max()) return data_->tail[n];
    if (data_->power) return hurwitz_tail(data_->power->beta + 1.0, n) / data_->power->zeta;
    return 0.0;
  }

  double truncation_remainder() const { return data_->remainder; }
  std::span<const double> masses() const { return data_->mass; }
  const std::optional<PowerTail>& power() const { return data_->power; }
  bool has_tail_index() const { return data_->power.has_value(); }

  double beta() const { return require_power().beta; }
  double c_tail() const { return require_power().c_tail; }
  double mass_coef() const { return require_power().mass_coef; }

  const PowerTail& require_power() const {
    if (!data_->power) fail(ErrorCode::MissingTailIndex, "law has no tail index");
    return *data_->power;
  }

 private:
  struct Data {
    std::vector<double> mass;  // index n, mass[0] = 0
    std::vector<double> tail;  // tail[n] = P(tau > n), n = 0..n_max
    double remainder = 0.0;
    std::optional<PowerTail> power;
  };

  explicit ReturnLaw(std::shared_ptr<const Data> d) : data_(std::move(d)) {}

  static ReturnLaw build(std::vector<double> mass, double remainder, std::optional<PowerTail> power) {
    auto d = std::make_shared<Data>();
    d->tail.assign(mass.size(), 0.0);
    CompensatedSum acc;
    acc.add(remainder);
    for (std::size_t n = mass.size() - 1; n > 0; --n) {
      d->tail[n] = acc.value();
      acc.add(mass[n]);
    }
    d->tail[0] = acc.value();
    d->mass = std::move(mass);
    d->remainder = remainder;
    d->power = power;
    return ReturnLaw(std::move(d));
  }

  friend ReturnLaw power_law_return(double beta, std::size_t n_max);
  friend ReturnLaw custom_return(std::span<const double> masses);

  std::shared_ptr<const Data> data_ = std::make_shared<Data>(Data{{0.0}, {1.0}, 0.0, std::nullopt});
};

/// gcd of the support of the tabulated masses.
inline std::uint64_t support_gcd(std::span<const double> mass) {
  std::uint64_t g = 0;
  for (std::size_t n = 1; n < mass.size(); ++n) {
    if (mass[n] > 0.0) g = std::gcd(g, static_cast<std::uint64_t>(n));
  }
  return g;
}

inline ReturnLaw power_law_return(double beta, std::size_t n_max) {
  if (!(beta > 0.0)) fail(ErrorCode::NonPositiveBeta, "beta must be positive");
  if (n_max < 2) fail(ErrorCode::InvalidArgument, "n_max must be at least 2");
  const double s = beta + 1.0;
  std::vector<double> raw(n_max + 1, 0.0);
  CompensatedSum head;
  for (std::size_t n = n_max; n >= 1; --n) {
    raw[n] = std::pow(static_cast<double>(n), -s);
    head.add(raw[n]);
  }
  const double rest = hurwitz_tail(s, n_max);
  CompensatedSum z;
  z.add(head.value());
  z.add(rest);
  const double zeta = z.value();
  const double remainder = rest / zeta;
  if (remainder > 0.5) fail(ErrorCode::TruncationTooCoarse, "truncation remainder exceeds 1/2; raise n_max");
  for (std::size_t n = 1; n <= n_max; ++n) raw[n] /= zeta;
  PowerTail pt{beta, zeta, 1.0 / zeta, 1.0 / (beta * zeta)};
  return ReturnLaw::build(std::move(raw), remainder, pt);
}

/// masses[i] is the probability of return time i + 1.
inline ReturnLaw custom_return(std::span<const double> masses) {
  if (masses.empty()) fail(ErrorCode::NotNormalized, "empty mass vector");
  std::vector<double> mass(masses.size() + 1, 0.0);
  CompensatedSum total;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (!(masses[i] >= 0.0) || !std::isfinite(masses[i])) fail(ErrorCode::NotNormalized, "masses must be finite and nonnegative");
    mass[i + 1] = masses[i];
    total.add(masses[i]);
  }
  if (std::fabs(total.value() - 1.0) > 1e-12) fail(ErrorCode::NotNormalized, "masses must sum to 1");
  // Trim trailing zeros so n_max is the true support bound.
  while (mass.size() > 2 && mass.back() == 0.0) mass.pop_back();
  if (support_gcd(mass) > 1) fail(ErrorCode::PeriodicLaw, "support of the return law is periodic");
  return ReturnLaw::build(std::move(mass), 0.0, std::nullopt);
}

inline ReturnLaw custom_return(std::initializer_list<double> masses) {
  return custom_return(std::span<const double>(masses.begin(), masses.size()));
}

/// Punctured law g_n = p a_n: each return survives with probability p.
class TransientLaw {
 public:
  TransientLaw(ReturnLaw base, double p) : base_(std::move(base)), p_(p) { require_probability(p); }

  const ReturnLaw& base() const { return base_; }
  double p() const { return p_; }
  double g(std::uint64_t n) const { return p_ * base_.mass(n); }
  double defective_tail(std::uint64_t m) const { return p_ * base_.tail(m); }

  /// g_1..g_N as a dense vector with g[0] = 0.
  std::vector<double> g_vector(std::size_t N) const {
    std::vector<double> out(N + 1, 0.0);
    for (std::size_t n = 1; n <= N; ++n) out[n] = g(n);
    return out;
  }

 private:
  ReturnLaw base_;
  double p_;
};

inline TransientLaw puncture(const ReturnLaw& law, double p) { return TransientLaw(law, p); }

inline double defective_tail(const TransientLaw& tl, std::uint64_t m) { return tl.defective_tail(m); }

/// CSV with columns n,a_n,g_n,tail_a,tail_g for n = 1..rows.
inline void write_law_csv(std::ostream& os, const TransientLaw& tl, std::size_t rows) {
  os << "n,a_n,g_n,tail_a,tail_g\n";
  char buf[160];
  for (std::size_t n = 1; n <= rows; ++n) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", n, tl.base().mass(n), tl.g(n),
                  tl.base().tail(n), tl.defective_tail(n));
    os << buf;
  }
}

}  // namespace renewal_lab
