#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "orbitcvx/io.hpp"
#include "orbitcvx/rng.hpp"
#include "orbitcvx/submetry.hpp"

using namespace orbitcvx;

namespace {

GroupAction o2() { return make_action({{"family", "O"}, {"n", 2}}); }
GroupAction s3() { return make_action({{"family", "S"}, {"n", 3}}); }

double sorted_distance(Vec a, Vec b) {
  std::sort(a.data(), a.data() + a.size());
  std::sort(b.data(), b.data() + b.size());
  return (a - b).norm();
}

// Euclidean projection onto {y : <n_i, y> <= c} by Dykstra's alternating projections.
Vec dykstra(const Mat& normals, double c, const Vec& x, int sweeps = 20000) {
  const Eigen::Index m = normals.cols();
  Vec y = x;
  Mat inc = Mat::Zero(x.size(), m);
  for (int s = 0; s < sweeps; ++s) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const Vec z = y + inc.col(i);
      const Vec n = normals.col(i);
      const double excess = n.dot(z) - c;
      const Vec p = excess > 0 ? Vec(z - excess / n.squaredNorm() * n) : z;
      inc.col(i) = z - p;
      y = p;
    }
  }
  return y;
}

// Points on the unit 2-sphere by the Fibonacci spiral.
std::vector<Vec> fibonacci_sphere(int n) {
  std::vector<Vec> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double rho = std::sqrt(1.0 - z * z);
    out.push_back((Vec(3) << rho * std::cos(golden * i), rho * std::sin(golden * i), z).finished());
  }
  return out;
}

DetectConfig small_detect(int probes) {
  DetectConfig cfg;
  cfg.probe_budget = probes;
  cfg.per_radius_budget = 24;
  cfg.seed = 17;
  return cfg;
}

}  // namespace

TEST(DistanceToSaturated, Examples) {
  EXPECT_DOUBLE_EQ(distance_to_saturated(SaturatedSet::radial(o2(), 0.0, 1.0), Point{0.0, 2.0}), 1.0);
  EXPECT_DOUBLE_EQ(distance_to_saturated(SaturatedSet::radial(o2(), 1.0, 1.0), Point{0.0, 0.0}), 1.0);
  const SaturatedSet orbit123 = SaturatedSet::fibers(s3(), {Point{1.0, 2.0, 3.0}});
  EXPECT_NEAR(distance_to_saturated(orbit123, Point{3.0, 2.0, 1.0}), 0.0, 1e-15);
  EXPECT_THROW(SaturatedSet::fibers(s3(), {}), std::invalid_argument);
  EXPECT_THROW(distance_to_saturated(orbit123, Point{1.0, 2.0}), DimensionMismatch);
}

TEST(DistanceToSaturated, FibersMatchPermutationEnumeration) {
  const SaturatedSet s = SaturatedSet::fibers(s3(), {Point{1.0, 2.0, 3.0}, Point{0.0, 0.0, -2.0}});
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    Rng rng(41, trial);
    const Vec x = 2.0 * rng.gaussian(3);
    const double oracle = std::min(sorted_distance(x, s.reps()[0].vec()), sorted_distance(x, s.reps()[1].vec()));
    EXPECT_NEAR(distance_to_saturated(s, Point(x)), oracle, 1e-12);
  }
}

TEST(DistanceToSaturated, PolyhedralSublevelMatchesDykstra) {
  const GroupAction d10 = GroupAction::finite(dihedral_group(10));
  const SaturatedSet s = SaturatedSet::sublevel(d10, Point{1.0, 0.3}, 1.0);
  for (std::uint64_t trial = 0; trial < 30; ++trial) {
    Rng rng(42, trial);
    const Vec x = 3.0 * rng.gaussian(2);
    const Vec p = dykstra(s.normals(), 1.0, x);
    EXPECT_NEAR(distance_to_saturated(s, Point(x)), (p - x).norm(), 1e-7);
  }
}

TEST(DistanceToSaturated, IsOneLipschitz) {
  const std::vector<SaturatedSet> sets{
      SaturatedSet::radial(o2(), 0.5, 1.5),
      SaturatedSet::fibers(s3(), {Point{1.0, 2.0, 3.0}}),
      SaturatedSet::sublevel(GroupAction::finite(dihedral_group(10)), Point{1.0, 0.0}, 1.0),
      SaturatedSet::sublevel(o2(), Point{2.0, 0.0}, 1.0),
  };
  for (const SaturatedSet& s : sets) {
    for (std::uint64_t trial = 0; trial < 300; ++trial) {
      Rng rng(43, trial);
      const Vec x = 2.0 * rng.gaussian(s.dim()), y = 2.0 * rng.gaussian(s.dim());
      EXPECT_LE(std::abs(distance_to_saturated(s, Point(x)) - distance_to_saturated(s, Point(y))), (x - y).norm() + 1e-9);
    }
  }
}

TEST(DistanceToSaturated, MembershipIsOrbitInvariant) {
  const GroupAction d10 = GroupAction::finite(dihedral_group(10));
  const std::vector<SaturatedSet> sets{
      SaturatedSet::fibers(s3(), {Point{1.0, 2.0, 3.0}}),
      SaturatedSet::sublevel(d10, Point{1.0, 0.3}, 1.0),
      SaturatedSet::fibers(d10, {Point{1.0, 0.0}, Point{0.0, 0.5}}),
  };
  for (const SaturatedSet& s : sets) {
    int inside = 0;
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
      Rng rng(44, trial);
      const Vec x = trial % 2 == 0 ? s.sample_preimage(rng) : Vec(s.sample_preimage(rng) + 0.3 * rng.gaussian(s.dim()));
      const Mat g = s.action().sample_element(45, trial);
      const bool a = in_saturated(s, Point(x), 1e-9), b = in_saturated(s, Point(s.action().act(g, x)), 1e-9);
      EXPECT_EQ(a, b);
      inside += a ? 1 : 0;
    }
    EXPECT_GT(inside, 100);
    EXPECT_LT(inside, 900);
  }
}

TEST(MakeSaturatedSet, ParsesAndRejects) {
  EXPECT_EQ(make_saturated_set(o2(), {{"kind", "radial"}, {"interval", {0, 1}}}).kind(), SaturatedSet::Kind::radial);
  EXPECT_EQ(make_saturated_set(s3(), {{"kind", "fibers"}, {"reps", {{1, 2, 3}}}}).reps().size(), 1u);
  EXPECT_EQ(make_saturated_set(s3(), {{"kind", "basic-sublevel"}, {"function", "support-of-orbit"}, {"point", {1, 2, 3}}, {"level", 2}})
                .kind(),
            SaturatedSet::Kind::sublevel);
  EXPECT_THROW(make_saturated_set(o2(), {{"kind", "radial"}, {"interval", {1, 0}}}), ConfigError);
  EXPECT_THROW(make_saturated_set(o2(), {{"kind", "radial"}, {"interval", {0, 1}}, {"extra", 1}}), ConfigError);
  EXPECT_THROW(make_saturated_set(o2(), {{"kind", "blob"}}), ConfigError);
  EXPECT_THROW(make_saturated_set(s3(), {{"kind", "fibers"}, {"reps", {{1, 2}}}}), ConfigError);
}

TEST(AscendingSlope, OutsideUnitDisk) {
  const SlopeEstimate e = ascending_slope(SaturatedSet::radial(o2(), 0.0, 1.0), Point{2.0, 0.0}, {}, 32, 3);
  EXPECT_NEAR(e.extrapolated, 1.0, 0.02);
  EXPECT_DOUBLE_EQ(e.base_value, 1.0);
  EXPECT_EQ(e.radii.size(), 3u);
}

TEST(AscendingSlope, NearCenterOfCircle) {
  const SlopeEstimate e = ascending_slope(SaturatedSet::radial(o2(), 1.0, 1.0), Point{1e-4, 0.0}, {}, 32, 3);
  EXPECT_NEAR(e.extrapolated, -1.0, 1e-6);
  EXPECT_DOUBLE_EQ(e.clamped, 0.0);
}

TEST(AscendingSlope, PermutationOrbitAgainstSphereGrid) {
  const SaturatedSet s = SaturatedSet::fibers(s3(), {Point{1.0, 2.0, 3.0}});
  const Point x{2.0, 2.0, 2.0};
  const double f = distance_to_saturated(s, x);
  ASSERT_NEAR(f, std::sqrt(2.0), 1e-15);
  const std::vector<double> radii = default_radii(f);
  const SlopeEstimate e = ascending_slope(s, x, radii, 3000, 9);
  // Quotient distance from the fixed point x is |y - x|.
  const std::vector<Vec> grid = fibonacci_sphere(40000);
  for (std::size_t k = 0; k < radii.size(); ++k) {
    double oracle = -std::numeric_limits<double>::infinity();
    for (const Vec& u : grid) {
      const Vec y = x.vec() + radii[k] * u;
      double fy = std::numeric_limits<double>::infinity();
      fy = std::min(fy, sorted_distance(y, s.reps()[0].vec()));
      oracle = std::max(oracle, (fy - f) / radii[k]);
    }
    EXPECT_NEAR(e.per_radius_sup[k], oracle, 0.03) << "radius " << radii[k];
  }
  EXPECT_NEAR(e.extrapolated, 0.0, 0.03);
}

TEST(AscendingSlope, RequiresMargin) {
  const SaturatedSet disk = SaturatedSet::radial(o2(), 0.0, 1.0);
  EXPECT_THROW(ascending_slope(disk, Point{0.5, 0.0}, {}, 8, 1), std::invalid_argument);
  EXPECT_THROW(ascending_slope(disk, Point{1.05, 0.0}, {0.1}, 8, 1), std::invalid_argument);
  EXPECT_THROW(ascending_slope(disk, Point{2.0, 0.0}, {-0.1}, 8, 1), std::invalid_argument);
}

TEST(AscendingSlope, EstimateInvariants) {
  const std::vector<SaturatedSet> sets{
      SaturatedSet::radial(o2(), 0.5, 1.0),
      SaturatedSet::fibers(s3(), {Point{1.0, 2.0, 3.0}}),
      SaturatedSet::sublevel(GroupAction::finite(dihedral_group(10)), Point{1.0, 0.3}, 1.0),
  };
  for (const SaturatedSet& s : sets) {
    for (std::uint64_t trial = 0; trial < 40; ++trial) {
      Rng rng(46, trial);
      const Point x(3.0 * rng.gaussian(s.dim()));
      if (distance_to_saturated(s, x) < 1e-3) continue;
      const SlopeEstimate e = ascending_slope(s, x, {}, 16, trial);
      for (double v : e.per_radius_sup) EXPECT_LE(v, 1.0 + 1e-9);
      EXPECT_GE(e.extrapolated, -1.0);
      EXPECT_LE(e.extrapolated, 1.0);
      EXPECT_TRUE(std::is_sorted(e.radii.rbegin(), e.radii.rend()));
    }
  }
}

TEST(ConvexityDetect, UnitDiskIsConsistent) {
  const VerificationReport r = convexity_detect(SaturatedSet::radial(o2(), 0.0, 1.0), small_detect(200));
  EXPECT_EQ(r.verdict, "consistent-with-convex");
  EXPECT_GE(r.value("min_raw_slope"), 0.98);
  EXPECT_TRUE(r.passed());
}

TEST(ConvexityDetect, CircleHasWitnessNearOrigin) {
  const VerificationReport r = convexity_detect(SaturatedSet::radial(o2(), 1.0, 1.0), small_detect(200));
  EXPECT_EQ(r.verdict, "nonconvex-witness");
  EXPECT_LE(r.value("min_raw_slope"), -0.9);
  const Vec w = vec_from_json(r.details["witness"]["point"], "witness");
  EXPECT_LT(w.norm(), 0.1);
}

TEST(ConvexityDetect, PermutationOrbitHasWitness) {
  const SaturatedSet s = SaturatedSet::fibers(s3(), {Point{1.0, 2.0, 3.0}});
  const VerificationReport r = convexity_detect(s, small_detect(60));
  EXPECT_EQ(r.verdict, "nonconvex-witness");
  const VerificationReport m = midpoint_convexity_oracle(s, 50, 1e-6, 5);
  EXPECT_EQ(m.verdict, "nonconvex-certificate");
}

TEST(ConvexityDetect, NoProbePoints) {
  DetectConfig cfg = small_detect(20);
  cfg.ball_radius = 1.0;
  const VerificationReport r = convexity_detect(SaturatedSet::radial(o2(), 0.0, 5.0), cfg);
  EXPECT_EQ(r.verdict, "no-probe-points");
  EXPECT_FALSE(r.passed());
}

TEST(MidpointOracle, Examples) {
  EXPECT_EQ(midpoint_convexity_oracle(SaturatedSet::radial(o2(), 0.0, 1.0), 300, 1e-9, 1).verdict, "no-violation-found");
  const SaturatedSet circle = SaturatedSet::radial(o2(), 1.0, 1.0);
  EXPECT_DOUBLE_EQ(distance_to_saturated(circle, Point{0.0, 0.0}), 1.0);
  EXPECT_EQ(midpoint_convexity_oracle(circle, 100, 1e-6, 1).verdict, "nonconvex-certificate");
  const SaturatedSet orbit123 = SaturatedSet::fibers(s3(), {Point{1.0, 2.0, 3.0}});
  const Vec mid = (Vec(3) << 1.5, 1.5, 3.0).finished();
  const double d = distance_to_saturated(orbit123, Point(mid));
  EXPECT_NEAR(d, sorted_distance(mid, (Vec(3) << 1.0, 2.0, 3.0).finished()), 1e-15);
  EXPECT_GT(d, 0.5);
}

TEST(MidpointOracle, CertificateRechecks) {
  const SaturatedSet s = SaturatedSet::fibers(GroupAction::finite(dihedral_group(10)), {Point{1.0, 0.2}});
  const VerificationReport r = midpoint_convexity_oracle(s, 200, 1e-6, 2);
  ASSERT_EQ(r.verdict, "nonconvex-certificate");
  const auto& c = r.details["certificate"];
  const Vec mid{{c["midpoint"][0].get<double>(), c["midpoint"][1].get<double>()}};
  EXPECT_NEAR(distance_to_saturated(s, Point(mid)), c["distance"].get<double>(), 1e-12);
}

TEST(BasicFunction, ZeroOrbit) {
  const OrbitCloud f = orbit(s3(), Point{0.0, 0.0, 0.0}, 1, 0);
  BasicCheckConfig cfg;
  cfg.test_pairs = 100;
  const VerificationReport r = basic_function_check(s3(), f, cfg);
  EXPECT_TRUE(r.passed());
  EXPECT_DOUBLE_EQ(r.value("max_support_gap"), 0.0);
}

TEST(BasicFunction, PermutationOrbit) {
  const OrbitCloud f = orbit(s3(), Point{3.0, 2.0, 1.0}, 1, 0);
  BasicCheckConfig cfg;
  cfg.test_pairs = 300;
  const VerificationReport r = basic_function_check(s3(), f, cfg);
  EXPECT_TRUE(r.passed()) << to_json(r).dump(2);
  EXPECT_LE(r.value("max_support_gap"), 1e-12);
  EXPECT_EQ(r.value("membership_disagreements"), 0.0);
}

TEST(BasicFunction, CircleRadialFormula) {
  const GroupAction so2 = make_action({{"family", "SO"}, {"n", 2}});
  const OrbitCloud f = orbit(so2, Point{1.0, 0.0}, 4000, 3);
  // h(circle, v) = |v|; the formula uses the closed-form orbit distance.
  const std::vector<double> grid = geometric_grid(1e-3, 1e4, 400);
  const Point v{2.0, 0.0};
  double best = -std::numeric_limits<double>::infinity();
  for (double t : grid) best = std::max(best, t - orbit_distance(so2, Point{t, 0.0}, v));
  EXPECT_NEAR(best, 2.0, 1e-3);
  BasicCheckConfig cfg;
  cfg.test_pairs = 200;
  cfg.tol = 1e-3;
  const VerificationReport r = basic_function_check(so2, f, cfg);
  EXPECT_LE(r.value("radial_formula_gap"), 1e-3);
}

TEST(FibertopeTransport, SpectralAndPermutationQuotientsAgree) {
  // Conjugation quotient of symmetric 3x3 matrices against the S_3 quotient of R^3.
  const GroupAction conj = make_action({{"family", "SO"}, {"n", 3}, {"rep", "conjugation"}});
  auto lift = [](const Vec& lambda) { return Point(sym_embed(lambda.asDiagonal().toDenseMatrix())); };
  const std::vector<Vec> reps{(Vec(3) << 1.0, 2.0, 3.0).finished(), (Vec(3) << 2.0, 2.0, 2.0).finished()};
  const std::vector<std::vector<Vec>> cases{{reps[0]}, {reps[1]}};
  for (const auto& c : cases) {
    std::vector<Point> a, b;
    for (const Vec& r : c) {
      a.emplace_back(r);
      b.push_back(lift(r));
    }
    const SaturatedSet sa = SaturatedSet::fibers(s3(), a), sb = SaturatedSet::fibers(conj, b);
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
      Rng rng(47, trial);
      const Vec lambda = 2.0 * rng.gaussian(3);
      EXPECT_NEAR(distance_to_saturated(sa, Point(lambda)), distance_to_saturated(sb, lift(lambda)), 1e-9);
    }
    DetectConfig cfg = small_detect(30);
    EXPECT_EQ(convexity_detect(sa, cfg).verdict, convexity_detect(sb, cfg).verdict);
  }
}
