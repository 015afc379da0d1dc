#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "renewal_lab/experiments.hpp"

using namespace renewal_lab;

TEST(ArcsineLimit, Constants) {
  EXPECT_DOUBLE_EQ(arcsine_constant(0.5, 0.5, 1.0), 4.0);
  EXPECT_EQ(arcsine_limit(0.5, 0.5, 1.0, 0.0), 0.0);
  EXPECT_NEAR(arcsine_limit(0.5, 0.5, 1.0, 0.3), 4.0 * beta_incomplete(0.5, 0.3), 1e-14);
  EXPECT_NEAR(arcsine_limit(0.5, 0.5, 1.0, 1.0), 4.0 * std::numbers::pi, 1e-9);
  for (double b : {0.2, 0.5, 0.8}) {
    const double K = arcsine_constant(b, 0.3, 0.7);
    EXPECT_NEAR(arcsine_limit(b, 0.3, 0.7, 1.0) * std::sin(std::numbers::pi * b) / std::numbers::pi / K, 1.0, 1e-8);
  }
  EXPECT_THROW(arcsine_limit(1.5, 0.5, 1.0, 0.5), Error);
}

TEST(ArcsineExact, ConventionsAndMonotonicity) {
  const TransientLaw tl(power_law_return(0.5, 1 << 12), 0.5);
  const ArcsineExact F(tl, 5000);
  const ArcsineSum zero = F(0.0);
  EXPECT_EQ(zero.from_one, 0.0);
  EXPECT_DOUBLE_EQ(zero.from_zero, tl.defective_tail(5000));
  double prev = -1.0;
  for (double t = 0.0; t <= 1.0; t += 0.05) {
    const ArcsineSum s = F(t);
    EXPECT_GE(s.from_one, prev);
    EXPECT_NEAR(s.from_zero - s.from_one, tl.defective_tail(5000), 1e-15);
    prev = s.from_one;
  }
}

TEST(ArcsineExact, GroupingMatchesPerIndexSum) {
  const TransientLaw tl(power_law_return(0.3, 1 << 12), 0.6);
  const std::uint64_t n = 300;
  const RenewalSequence rs = renewal_fast(tl, n);
  const PowerGrid grid(arcsine_q(0.3));
  for (double t : {0.1, 0.5, 1.0}) {
    double brute = 0.0;
    for (std::uint64_t j = 1; std::pow(static_cast<long double>(j), grid.q()) <= n * t; ++j) {
      const std::uint64_t k = grid.at(j);
      brute += rs.u[k] * tl.defective_tail(n - k);
    }
    EXPECT_NEAR(exact_arcsine_sum(tl, n, t).from_one, brute, 1e-12 * brute);
  }
}

TEST(ArcsineExact, MissingTailIndex) {
  EXPECT_THROW(ArcsineExact(TransientLaw(custom_return({0.5, 0.5}), 0.5), 100), Error);
}

TEST(TGrid, Parse) {
  EXPECT_EQ(parse_t_grid("0.1:0.9:9").size(), 9u);
  EXPECT_NEAR(parse_t_grid(kDefaultTGrid)[4], 0.5, 1e-15);
  EXPECT_EQ(parse_t_grid("0.5:0.5:1"), std::vector<double>{0.5});
  for (const char* bad : {"", "0.1:0.9", "a:b:c", "0.9:0.1:3", "0.1:0.9:0", "0.1:0.9:3x"}) {
    EXPECT_THROW(parse_t_grid(bad), Error) << bad;
  }
}

TEST(ArcsineReport, RatioApproachesOne) {
  ArcsineConfig c;
  c.n_list = {1000, 10000, 100000};
  c.t_grid = {0.2, 0.5, 0.8};
  c.sim = {1, 1, 2000, 0};
  const ExperimentReport rep = arcsine_convergence_report(c);
  const Table& t = rep.tables().front().second;
  ASSERT_EQ(t.rows.size(), 9u);
  for (std::size_t k = 0; k < 3; ++k) {
    double prev = 1.0;
    for (std::size_t i = 0; i < 3; ++i) {
      const double dev = std::fabs(t.rows[i * 3 + k][5].get<double>() - 1.0);
      EXPECT_LT(dev, prev);
      prev = dev;
    }
    EXPECT_LT(prev, 0.05);
  }
}

TEST(ArcsineReport, ByteIdenticalRegeneration) {
  ArcsineConfig c;
  c.n_list = {2000};
  c.sim = {42, 1, 5000, 0};
  std::ostringstream a, b;
  arcsine_convergence_report(c).write_json(a);
  c.sim.shards = 8;
  arcsine_convergence_report(c).write_json(b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(ArcsineReport, AuditOnlyAboveOne) {
  ArcsineConfig c;
  c.beta = 1.5;
  c.n_list = {1000};
  c.sim = {1, 1, 1000, 0};
  const ExperimentReport rep = arcsine_convergence_report(c);
  EXPECT_FALSE(rep.tables().front().second.rows.empty());
  for (const auto& v : rep.verdicts()) EXPECT_EQ(v.status, Status::Audit);
  EXPECT_EQ(rep.meta()["mode"], "audit-only");
}

TEST(Section3, SweepVerdicts) {
  const ExperimentReport rep = section3_sweep({0.5}, {0.3, 0.5, 0.7}, 1000000);
  EXPECT_FALSE(rep.any_failed());
  const Table& fin = rep.tables().front().second;
  for (const auto& row : fin.rows) {
    EXPECT_NEAR(row[3].get<double>(), 1.0, kSection3Tolerance);
    // rescaling r_N by (1-p)^2 recovers u_N / g_N
    EXPECT_NEAR(row[5].get<double>(), row[3].get<double>(), 1e-12);
  }
}

TEST(Section5, AuditVerdicts) {
  Section5Config c;
  c.ns = {2, 5, 10, 30};
  c.survivor_n = 100;
  c.sim = {3, 2, 400000, 0};
  for (const ReturnLaw& law : {custom_return({0.5, 0.5}), power_law_return(0.5, 1 << 10)}) {
    const ExperimentReport rep = section5_audit(law, c);
    EXPECT_FALSE(rep.any_failed());
    bool saw_enum = false, saw_sandwich = false;
    for (const auto& v : rep.verdicts()) {
      if (v.id == "enumeration-oracle") saw_enum = v.status == Status::Pass;
      if (v.id == "upper-sandwich") saw_sandwich = v.status == Status::Audit;
    }
    EXPECT_TRUE(saw_enum);
    EXPECT_TRUE(saw_sandwich);
  }
}

TEST(Section5, CounterexampleRowPresent) {
  Section5Config c;
  c.ps = {0.5};
  c.ns = {2};
  c.run_mc = false;
  const ExperimentReport rep = section5_audit(custom_return({0.5, 0.5}), c);
  const Table& t = rep.tables().front().second;
  bool found = false;
  for (const auto& r : t.rows) {
    if (r[0] == 2 && r[1] == 2) {
      found = true;
      EXPECT_DOUBLE_EQ(r[8].get<double>(), 0.75);
      EXPECT_DOUBLE_EQ(r[9].get<double>(), 1.0);
      EXPECT_FALSE(r[10].get<bool>());
    }
  }
  EXPECT_TRUE(found);
}

TEST(DarlingKacReport, Verdicts) {
  const ExperimentReport rep = darling_kac_report(0.5, 100000, SimConfig{11, 1, 10000, 0}, 1 << 16);
  EXPECT_FALSE(rep.any_failed());
  EXPECT_EQ(rep.verdicts().back().status, Status::Audit);
}

TEST(SeriesReport, BetaOne) {
  const ExperimentReport rep = series_report(1.0, 100000);
  EXPECT_FALSE(rep.any_failed());
  EXPECT_EQ(rep.tables().size(), 3u);
}

TEST(Report, JsonAndCsv) {
  ExperimentReport rep("demo");
  auto& t = rep.table("x", {"a", "b", "c"});
  t.add({1, 0.1, true});
  t.add({2, std::nan(""), false});
  EXPECT_THROW(t.add({1}), Error);
  rep.verdict("v", true, false, 0.5, "d");
  EXPECT_TRUE(rep.any_failed());
  std::ostringstream csv;
  ExperimentReport::write_csv(csv, t);
  EXPECT_EQ(csv.str(), "a,b,c\n1,0.10000000000000001,true\n2,nan,false\n");
  const Json j = rep.to_json();
  EXPECT_EQ(j["meta"]["tolerances"]["v"], 0.5);
  EXPECT_TRUE(j["tables"]["x"][1]["b"].is_null());
  EXPECT_EQ(j["verdicts"][0]["status"], "fail");
}
