#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

#include "renewal_lab/distributions.hpp"
#include "renewal_lab/special.hpp"

using namespace renewal_lab;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Gamma, KnownValues) {
  EXPECT_NEAR(gamma_fn(0.5), std::sqrt(kPi), 1e-12 * std::sqrt(kPi));
  EXPECT_NEAR(gamma_fn(5.0), 24.0, 24e-12);
  EXPECT_NEAR(gamma_fn(1.5), std::sqrt(kPi) / 2, 1e-12);
  EXPECT_NEAR(gamma_fn(50.0), 6.0828186403426e62, 1e-12 * 6.0828186403426e62);
}

TEST(Gamma, Domain) {
  for (double x : {0.05, 50.5, -1.0, std::nan("")}) {
    try {
      gamma_fn(x);
      FAIL() << x;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::OutOfDomain);
    }
  }
}

TEST(BetaIncomplete, ClosedForms) {
  EXPECT_NEAR(beta_incomplete(0.5, 1.0), kPi, 1e-10);
  EXPECT_NEAR(beta_incomplete(0.5, 0.5), kPi / 2, 1e-10);
  for (double b : {0.1, 0.5, 0.9}) EXPECT_EQ(beta_incomplete(b, 0.0), 0.0);
  // arcsine case: 2 asin(sqrt t)
  for (double t : {0.01, 0.3, 0.77, 0.9999}) EXPECT_NEAR(beta_incomplete(0.5, t), 2 * std::asin(std::sqrt(t)), 1e-10);
}

TEST(BetaIncomplete, ReflectionAndFullIntegral) {
  for (int i = 1; i <= 9; ++i) {
    const double b = 0.1 * i;
    EXPECT_NEAR(beta_incomplete(b, 1.0) * std::sin(kPi * b) / kPi, 1.0, 1e-8) << b;
    for (double t : {0.05, 0.4, 0.6, 0.95}) {
      EXPECT_NEAR(beta_incomplete(b, t), beta_incomplete(b, 1.0) - beta_incomplete(1.0 - b, 1.0 - t), 1e-9);
    }
  }
}

TEST(BetaIncomplete, AgainstBoost) {
  for (double b = 0.05; b < 1.0; b += 0.05) {
    double prev = 0.0;
    for (double t = 0.0; t <= 1.0; t += 0.01) {
      const double v = beta_incomplete(b, t);
      EXPECT_NEAR(v, boost::math::beta(b, 1.0 - b, t), 1e-10) << b << " " << t;
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(BetaIncomplete, Domain) {
  for (auto [b, t] : {std::pair{0.0, 0.5}, {1.0, 0.5}, {0.5, -0.1}, {0.5, 1.1}}) {
    try {
      beta_incomplete(b, t);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BetaOutOfRange);
    }
  }
}

TEST(MittagLeffler, Moments) {
  for (double b : {0.2, 0.5, 0.9}) {
    EXPECT_DOUBLE_EQ(ml_moment(b, 0), 1.0);
    EXPECT_NEAR(ml_moment(b, 1), 1.0, 1e-14);
  }
  EXPECT_NEAR(ml_moment(0.5, 2), kPi / 2, 1e-13);
  for (int k = 0; k <= 10; ++k) EXPECT_NEAR(ml_moment(1.0, k), 1.0, 1e-12);
  EXPECT_THROW(ml_moment(1.5, 2), Error);
}

TEST(CBeta, PowerLawSlopeAndStability) {
  const ReturnLaw law = power_law_return(0.5, 1 << 20);
  const CBetaEstimate e = estimate_c_beta(law);
  EXPECT_NEAR(e.slope, 0.5, 0.03);
  EXPECT_TRUE(e.accepted);
  std::vector<double> half;
  for (double t : default_theta_grid()) half.push_back(t / 2);
  const CBetaEstimate h = estimate_c_beta(law, half);
  EXPECT_LT(std::fabs(h.modulus / e.modulus - 1.0), 0.02);
  // |C_beta| -> c_tail Gamma(1 - beta)
  EXPECT_NEAR(e.modulus, law.c_tail() * std::tgamma(0.5), 0.1);
}

TEST(CBeta, DeterministicLawRejected) {
  const ReturnLaw det = custom_return({1.0});
  EXPECT_THROW(estimate_c_beta(det), Error);
  const CBetaEstimate e = estimate_c_beta(det, default_theta_grid(), 0.5);
  EXPECT_NEAR(e.slope, 1.0, 0.01);
  EXPECT_FALSE(e.accepted);
}

TEST(Ks, Distance) {
  EXPECT_DOUBLE_EQ(ks_distance({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_DOUBLE_EQ(ks_distance({1, 1}, {2, 2}), 1.0);
  EXPECT_DOUBLE_EQ(ks_distance({1, 2, 3, 4}, {3, 4, 5, 6}), 0.5);
}

TEST(StableScaling, SelfConsistentAtBetaHalf) {
  const ReturnLaw law = power_law_return(0.5, 1 << 20);
  const StableScalingReport r = stable_scaling_check(law, 1000, 10000, SimConfig{7, 1, 100000, 0});
  EXPECT_LE(r.ks, kKsTolerance);
  EXPECT_TRUE(r.converged);
}

TEST(StableScaling, DeterministicLawDoesNotConverge) {
  const StableScalingReport r = stable_scaling_check(custom_return({1.0}), 10, 40, SimConfig{7, 1, 1000, 0}, 0.5);
  EXPECT_DOUBLE_EQ(r.ks, 1.0);
  EXPECT_FALSE(r.converged);
}

TEST(StableScaling, SameSeedSameBits) {
  const ReturnLaw law = power_law_return(0.5, 1 << 12);
  const auto a = stable_scaling_check(law, 10, 100, SimConfig{3, 1, 5000, 0});
  const auto b = stable_scaling_check(law, 10, 100, SimConfig{3, 4, 5000, 0});
  EXPECT_EQ(std::bit_cast<std::uint64_t>(a.ks), std::bit_cast<std::uint64_t>(b.ks));
}

TEST(StableScaling, Preconditions) {
  const ReturnLaw law = power_law_return(0.5, 1 << 12);
  EXPECT_THROW(stable_scaling_check(law, 10, 20, SimConfig{}), Error);
  try {
    stable_scaling_check(custom_return({0.5, 0.5}), 10, 40, SimConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingTailIndex);
  }
}
