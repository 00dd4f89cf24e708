#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "orbitcvx/scenarios.hpp"

using namespace orbitcvx;

namespace {

SchurHornConfig small_schur(int n, std::vector<double> lambda) {
  SchurHornConfig cfg;
  cfg.n = n;
  cfg.eigenvalues = std::move(lambda);
  cfg.orbit_budget = 2000;
  cfg.direction_budget = 200;
  cfg.tol = 0.1;
  return cfg;
}

FatSectionConfig small_fat(int n, int k) {
  FatSectionConfig cfg;
  cfg.n = n;
  cfg.k = k;
  cfg.orbit_budget = 1500;
  cfg.direction_budget = 60;
  cfg.pairs = 10;
  cfg.hull_tol = 0.1;
  return cfg;
}

}  // namespace

TEST(SchurHorn, SmallBudgetPasses) {
  const VerificationReport r = scenario_schur_horn(small_schur(3, {3.0, 2.0, 1.0}));
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
  EXPECT_EQ(r.value("inclusion_violations"), 0.0);
  EXPECT_EQ(r.verdict, "projection-equals-permutohedron");
}

TEST(SchurHorn, TwoByTwoFillsSegment) {
  const VerificationReport r = scenario_schur_horn(small_schur(2, {1.0, 0.0}));
  EXPECT_TRUE(r.passed());
  const Table* t = nullptr;
  for (const Table& x : r.tables)
    if (x.name == "projected") t = &x;
  ASSERT_NE(t, nullptr);
  // Rotation sweep: the diagonal of R(a) diag(1, 0) R(a)^T is (cos^2 a, sin^2 a).
  std::vector<double> xs;
  for (const auto& row : t->rows) {
    EXPECT_NEAR(row[0] + row[1], 1.0, 1e-12);
    EXPECT_GE(row[0], -1e-12);
    EXPECT_LE(row[0], 1.0 + 1e-12);
    xs.push_back(row[0]);
  }
  std::sort(xs.begin(), xs.end());
  double gap = std::max(xs.front(), 1.0 - xs.back());
  for (std::size_t i = 1; i < xs.size(); ++i) gap = std::max(gap, xs[i] - xs[i - 1]);
  EXPECT_LT(gap, 0.02);
  Mat sweep(2, 2001);
  for (int i = 0; i <= 2000; ++i) {
    const double a = 0.5 * std::numbers::pi * i / 2000;
    sweep.col(i) << std::cos(a) * std::cos(a), std::sin(a) * std::sin(a);
  }
  Mat proj(2, static_cast<Eigen::Index>(t->rows.size()));
  for (std::size_t i = 0; i < t->rows.size(); ++i) proj.col(static_cast<Eigen::Index>(i)) << t->rows[i][0], t->rows[i][1];
  EXPECT_LT(hull_hausdorff(SupportOracle(PointCloud(proj)), SupportOracle(PointCloud(sweep)), 200, 3), 0.02);
}

TEST(SchurHorn, ScalarMatrixIsAPoint) {
  const VerificationReport r = scenario_schur_horn(small_schur(3, {2.0, 2.0, 2.0}));
  EXPECT_TRUE(r.passed());
  EXPECT_LT(r.value("hausdorff_gap"), 1e-12);
  EXPECT_EQ(r.value("weyl_vertices"), 1.0);
}

TEST(SchurHorn, RejectsBadConfig) {
  EXPECT_THROW(scenario_schur_horn(small_schur(6, {1, 2, 3, 4, 5, 6})), ConfigError);
  EXPECT_THROW(scenario_schur_horn(small_schur(1, {1})), ConfigError);
  EXPECT_THROW(scenario_schur_horn(small_schur(3, {1, 2})), ConfigError);
}

TEST(SchurHorn, InclusionHoldsAtAnyBudget) {
  for (int budget : {10, 100, 500}) {
    SchurHornConfig cfg = small_schur(4, {4.0, 1.5, -1.0, 0.25});
    cfg.orbit_budget = budget;
    cfg.direction_budget = 50;
    cfg.seed = 100 + static_cast<std::uint64_t>(budget);
    EXPECT_EQ(scenario_schur_horn(cfg).value("inclusion_violations"), 0.0) << budget;
  }
}

TEST(FatSection, SmallBudgetPasses) {
  const VerificationReport r = scenario_fat_section(small_fat(4, 3));
  EXPECT_EQ(r.value("inclusion_violations"), 0.0);
  EXPECT_LE(r.value("quotient_isometry_gap"), 1e-3);
  EXPECT_LE(r.value("quotient_isometry_gap_closed_form"), 1e-9);
  EXPECT_LE(r.value("hausdorff_projection_vs_slice_hull"), 0.1);
}

TEST(FatSection, SphereProjectsToSegment) {
  FatSectionConfig cfg = small_fat(3, 1);
  cfg.v = {2.0};
  const VerificationReport r = scenario_fat_section(cfg);
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
  EXPECT_LT(r.value("hausdorff_projection_vs_slice_hull"), 1e-6);
}

TEST(FatSection, ZeroSeed) {
  FatSectionConfig cfg = small_fat(3, 2);
  cfg.v = {0.0, 0.0, 0.0, 0.0};
  const VerificationReport r = scenario_fat_section(cfg);
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
  EXPECT_LT(r.value("hausdorff_projection_vs_slice_hull"), 1e-12);
}

TEST(FatSection, RejectsBadConfig) {
  EXPECT_THROW(scenario_fat_section(small_fat(3, 3)), ConfigError);
  EXPECT_THROW(scenario_fat_section(small_fat(3, 0)), ConfigError);
  FatSectionConfig cfg = small_fat(3, 2);
  cfg.v = {1.0, 2.0, 3.0};
  EXPECT_THROW(scenario_fat_section(cfg), ConfigError);
  cfg.v = {1.0, 0.0, 0.0, 0.0, 0.0, 1.0};  // ambient, off the section
  EXPECT_THROW(scenario_fat_section(cfg), ConfigError);
}

TEST(OrbitopeGap, FourThree) {
  const VerificationReport r = scenario_orbitope_gap({});
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
  EXPECT_EQ(r.value("b_orbitope_dimension"), 9.0);
  EXPECT_LE(r.value("a_local_dimension"), 6.0);
}

TEST(OrbitopeGap, ThreeTwo) {
  OrbitopeGapConfig cfg;
  cfg.n = 3;
  cfg.k = 2;
  const VerificationReport r = scenario_orbitope_gap(cfg);
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
  EXPECT_EQ(r.value("b_orbitope_dimension"), 4.0);
  EXPECT_LE(r.value("a_local_dimension"), 3.0);
}

TEST(OrbitopeGap, GuardsAndDegenerateSeed) {
  OrbitopeGapConfig cfg;
  cfg.k = 2;
  EXPECT_THROW(scenario_orbitope_gap(cfg), ConfigError);
  cfg.k = 3;
  cfg.v.assign(9, 0.0);
  const VerificationReport r = scenario_orbitope_gap(cfg);
  EXPECT_EQ(r.verdict, "non-generic-seed");
  EXPECT_FALSE(r.passed());
}

TEST(FiniteCounterexample, SignGroup) {
  const VerificationReport r = scenario_finite_counterexample({});
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
  EXPECT_EQ(r.verdict, "orbit-not-convex");
  EXPECT_NEAR(r.value("certificate_recheck_margin"), 1.0, 1e-12);
}

TEST(FiniteCounterexample, Pentagon) {
  FiniteCounterexampleConfig cfg;
  cfg.group = {{"family", "cyclic"}, {"n", 5}};
  const VerificationReport r = scenario_finite_counterexample(cfg);
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
  // Exact five-point oracle over all vertex pairs.
  const Mat pts = orbit(make_action(cfg.group), Point{1.0, 0.0}, 1, 0).base.matrix();
  double best = 0.0;
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = i + 1; j < 5; ++j) {
      const Vec m = 0.5 * (pts.col(i) + pts.col(j));
      double d = 1e300;
      for (Eigen::Index l = 0; l < 5; ++l) d = std::min(d, (pts.col(l) - m).norm());
      best = std::max(best, d);
    }
  EXPECT_NEAR(r.value("certificate_recheck_margin"), best, 1e-12);
}

TEST(FiniteCounterexample, GuardsAndDegenerateSeed) {
  FiniteCounterexampleConfig cfg;
  cfg.group = {{"family", "cyclic"}, {"n", 1}};
  EXPECT_THROW(scenario_finite_counterexample(cfg), ConfigError);
  cfg.group = {{"family", "O"}, {"n", 2}};
  EXPECT_THROW(scenario_finite_counterexample(cfg), ConfigError);
  cfg.group = {{"family", "sign"}, {"n", 2}};
  cfg.v = {0.0, 0.0};
  const VerificationReport r = scenario_finite_counterexample(cfg);
  EXPECT_EQ(r.verdict, "degenerate-seed");
  EXPECT_FALSE(r.passed());
}

TEST(FixedPoints, PermutationsAndCircle) {
  const VerificationReport s3 = scenario_fixed_points({});
  EXPECT_TRUE(s3.passed()) << to_json(s3).dump(2);
  FixedPointsConfig cfg;
  cfg.action = {{"family", "O"}, {"n", 2}};
  const VerificationReport o2 = scenario_fixed_points(cfg);
  EXPECT_TRUE(o2.passed()) << to_json(o2).dump(2);
  EXPECT_EQ(o2.value("fat_fixed_dim_gap"), 0.0);
}

TEST(PolarSuites, SmallBudgets) {
  PolarSuiteConfig cfg;
  cfg.clouds = 10;
  cfg.direction_budget = 40;
  const VerificationReport b = scenario_bipolar(cfg);
  EXPECT_TRUE(b.passed()) << to_json(b).dump(2);
  EXPECT_EQ(b.value("clouds_with_origin"), 10.0);
  EXPECT_TRUE(scenario_projection_polar(cfg).passed());
}

TEST(BusemannSuite, SmallBudget) {
  BusemannConfig cfg;
  cfg.samples = 100;
  const VerificationReport r = scenario_busemann(cfg);
  EXPECT_TRUE(r.passed());
  EXPECT_LE(r.value("max_overshoot"), 1e-12);
}

TEST(BasicFunctionSuite, SmallBudget) {
  BasicSuiteConfig cfg;
  cfg.exact_tests = 50;
  cfg.sampled_tests = 50;
  cfg.orbits_per_action = 2;
  cfg.sampled_orbit_budget = 1000;
  const VerificationReport r = scenario_basic_functions(cfg);
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
}

TEST(SlopeSuite, SmallBudget) {
  SlopeSuiteConfig cfg;
  cfg.probe_budget = 60;
  cfg.random_sets = 12;
  cfg.suite_probe_budget = 30;
  cfg.pair_budget = 150;
  const VerificationReport r = scenario_slope_criterion(cfg);
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
  EXPECT_EQ(r.value("suite_disagreements"), 0.0);
}

TEST(Scenarios, DeterministicPerSeed) {
  const auto a = to_json(scenario_schur_horn(small_schur(3, {3.0, 2.0, 1.0}))).dump();
  const auto b = to_json(scenario_schur_horn(small_schur(3, {3.0, 2.0, 1.0}))).dump();
  EXPECT_EQ(a, b);
  SchurHornConfig other = small_schur(3, {3.0, 2.0, 1.0});
  other.seed = 1;
  EXPECT_NE(a, to_json(scenario_schur_horn(other)).dump());
  FatSectionConfig fc = small_fat(3, 2);
  fc.jobs = 1;
  const auto x = to_json(scenario_fat_section(fc)).dump();
  fc.jobs = 3;
  EXPECT_EQ(x, to_json(scenario_fat_section(fc)).dump());
}

TEST(Scenarios, StatusMatchesMetrics) {
  SchurHornConfig cfg = small_schur(3, {3.0, 2.0, 1.0});
  cfg.orbit_budget = 5;
  cfg.tol = 1e-6;
  const VerificationReport r = scenario_schur_horn(cfg);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.value("inclusion_violations"), 0.0);
  EXPECT_EQ(r.status(), Status::unconverged);
  EXPECT_EQ(r.verdict, "budget-too-small");
}
