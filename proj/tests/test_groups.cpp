#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "orbitcvx/groups.hpp"
#include "orbitcvx/rng.hpp"

using namespace orbitcvx;

namespace {

// Index of m in the element list, or -1.
int find_element(const FiniteOrthogonalGroup& g, const Mat& m) {
  for (std::size_t i = 0; i < g.order(); ++i)
    if ((g.elements[i] - m).norm() < 1e-9) return static_cast<int>(i);
  return -1;
}

// Full multiplication table check: closure, identity, inverses, and that
// each row of the table is a permutation of the elements.
void expect_group_table(const FiniteOrthogonalGroup& g) {
  const std::size_t n = g.order();
  ASSERT_GE(find_element(g, Mat::Identity(g.dim, g.dim)), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<bool> seen(n, false);
    for (std::size_t j = 0; j < n; ++j) {
      const int k = find_element(g, g.elements[i] * g.elements[j]);
      ASSERT_GE(k, 0);
      EXPECT_FALSE(seen[static_cast<std::size_t>(k)]);
      seen[static_cast<std::size_t>(k)] = true;
    }
    EXPECT_GE(find_element(g, g.elements[i].transpose()), 0);
  }
}

double brute_rotation_distance(const Vec& v, const Vec& w, int steps) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < steps; ++i) best = std::min(best, (rotation2(2.0 * std::numbers::pi * i / steps) * v - w).norm());
  return best;
}

double brute_permutation_distance(const Vec& v, const Vec& w) {
  std::vector<int> p(static_cast<std::size_t>(v.size()));
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<int>(i);
  double best = std::numeric_limits<double>::infinity();
  do {
    Vec q(v.size());
    for (std::size_t i = 0; i < p.size(); ++i) q[static_cast<Eigen::Index>(i)] = v[p[i]];
    best = std::min(best, (q - w).norm());
  } while (std::next_permutation(p.begin(), p.end()));
  return best;
}

// Distance between conjugation orbits: norm of the difference of sorted spectra.
double spectral_distance(const Vec& x, const Vec& y, Eigen::Index n) {
  const Vec a = Eigen::SelfAdjointEigenSolver<Mat>(sym_unembed(x, n)).eigenvalues();
  const Vec b = Eigen::SelfAdjointEigenSolver<Mat>(sym_unembed(y, n)).eigenvalues();
  return (a - b).norm();
}

GroupAction so2() { return make_action({{"family", "SO"}, {"n", 2}}); }

}  // namespace

TEST(FiniteGroups, Orders) {
  EXPECT_EQ(sign_group(2).order(), 2u);
  EXPECT_EQ(cyclic_group(5).order(), 5u);
  EXPECT_EQ(dihedral_group(10).order(), 10u);
  EXPECT_EQ(symmetric_group(3).order(), 6u);
  EXPECT_EQ(symmetric_group(4).order(), 24u);
  EXPECT_EQ(cyclic_group(1).order(), 1u);
}

TEST(FiniteGroups, MultiplicationTables) {
  expect_group_table(sign_group(3));
  expect_group_table(cyclic_group(5));
  expect_group_table(dihedral_group(10));
  expect_group_table(symmetric_group(4));
}

TEST(FiniteGroups, RejectsNonOrthogonalAndOverflow) {
  EXPECT_THROW(enumerate_group({2.0 * Mat::Identity(2, 2)}, 2), std::invalid_argument);
  EXPECT_THROW(enumerate_group({rotation2(0.1)}, 2, 50), GroupOverflow);
  EXPECT_THROW(dihedral_group(5), std::invalid_argument);
}

TEST(CompactSampler, ElementsAreOrthogonalWithRightDeterminant) {
  const CompactGroupSampler o(Family::O, 4, 3), so(Family::SO, 4, 3);
  int negative = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const Mat a = o.sample(i), b = so.sample(i);
    EXPECT_LT(orthogonality_error(a), 1e-12);
    EXPECT_LT(orthogonality_error(b), 1e-12);
    EXPECT_NEAR(b.determinant(), 1.0, 1e-12);
    if (a.determinant() < 0) ++negative;
  }
  EXPECT_GT(negative, 60);
  EXPECT_LT(negative, 140);
  EXPECT_EQ(o.sample(7), CompactGroupSampler(Family::O, 4, 3).sample(7));
}

TEST(CompactSampler, HaarMeanOfEntriesIsZero) {
  const CompactGroupSampler so(Family::SO, 3, 9);
  Mat sum = Mat::Zero(3, 3);
  const int n = 4000;
  for (int i = 0; i < n; ++i) sum += so.sample(static_cast<std::uint64_t>(i));
  EXPECT_LT((sum / n).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Orbit, PermutationOrbitOfDistinctEntries) {
  const GroupAction s3 = make_action({{"family", "S"}, {"n", 3}});
  const OrbitCloud oc = orbit(s3, Point{1.0, 2.0, 3.0}, 1, 0);
  EXPECT_TRUE(oc.exact);
  EXPECT_EQ(oc.base.size(), 6);
  EXPECT_EQ(orbit(s3, Point{1.0, 1.0, 3.0}, 1, 0).base.size(), 3);
  EXPECT_EQ(orbit(s3, Point{0.0, 0.0, 0.0}, 1, 0).base.size(), 1);
}

TEST(Orbit, SampledCircleCoversAngles) {
  const OrbitCloud oc = orbit(so2(), Point{1.0, 0.0}, 100, 5);
  EXPECT_FALSE(oc.exact);
  ASSERT_EQ(oc.base.size(), 100);
  std::vector<double> angles;
  for (Eigen::Index i = 0; i < 100; ++i) {
    EXPECT_NEAR(oc.base.matrix().col(i).norm(), 1.0, 1e-12);
    angles.push_back(std::atan2(oc.base.matrix()(1, i), oc.base.matrix()(0, i)));
  }
  std::sort(angles.begin(), angles.end());
  double max_gap = angles.front() + 2.0 * std::numbers::pi - angles.back(), min_gap = max_gap;
  for (std::size_t i = 1; i < angles.size(); ++i) {
    max_gap = std::max(max_gap, angles[i] - angles[i - 1]);
    min_gap = std::min(min_gap, angles[i] - angles[i - 1]);
  }
  EXPECT_LT(min_gap, 2.0 * std::numbers::pi / 25.0);
  // Max spacing bound with tail probability below 0.01: n (1 - x)^(n - 1) <= 0.01.
  const double x = 1.0 - std::pow(1e-4, 1.0 / 99.0);
  EXPECT_LT(max_gap, 2.0 * std::numbers::pi * x);
}

TEST(Orbit, IsReproducible) {
  const GroupAction a = make_action({{"family", "O"}, {"n", 3}});
  const OrbitCloud x = orbit(a, Point{1.0, 2.0, 0.5}, 50, 11), y = orbit(a, Point{1.0, 2.0, 0.5}, 50, 11);
  EXPECT_EQ(x.base.matrix(), y.base.matrix());
  EXPECT_THROW(orbit(a, Point{1.0, 2.0}, 50, 11), DimensionMismatch);
  EXPECT_THROW(orbit(a, Point{1.0, 2.0, 3.0}, 0, 11), std::invalid_argument);
}

TEST(OrbitDistance, SameOrbitAndOrigin) {
  const GroupAction s3 = make_action({{"family", "S"}, {"n", 3}});
  EXPECT_NEAR(orbit_distance(s3, Point{1.0, 2.0, 3.0}, Point{3.0, 1.0, 2.0}), 0.0, 1e-15);
  const Point v{1.0, -2.0, 2.0};
  EXPECT_NEAR(orbit_distance(s3, v, Point{0.0, 0.0, 0.0}), 3.0, 1e-15);
  EXPECT_NEAR(orbit_distance(so2(), Point{1.0, 0.0}, Point{0.0, 2.0}), 1.0, 1e-12);
}

TEST(OrbitDistance, PermutationMatchesEnumeration) {
  const GroupAction s4 = make_action({{"family", "S"}, {"n", 4}});
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng rng(31, trial);
    const Vec v = rng.gaussian(4), w = rng.gaussian(4);
    EXPECT_NEAR(orbit_distance(s4, Point(v), Point(w)), brute_permutation_distance(v, w), 1e-12);
  }
}

TEST(OrbitDistance, FiniteGroupMatchesEnumeration) {
  const GroupAction d10 = GroupAction::finite(dihedral_group(10));
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    Rng rng(32, trial);
    const Vec v = rng.gaussian(2), w = rng.gaussian(2);
    double best = std::numeric_limits<double>::infinity();
    for (const Mat& g : dihedral_group(10).elements) best = std::min(best, (g * v - w).norm());
    EXPECT_NEAR(orbit_distance(d10, Point(v), Point(w)), best, 1e-12);
  }
}

TEST(OrbitDistance, CircleMatchesAngleGrid) {
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    Rng rng(33, trial);
    const Vec v = rng.gaussian(2), w = rng.gaussian(2);
    const double grid = brute_rotation_distance(v, w, 20000);
    const double d = orbit_distance(so2(), Point(v), Point(w));
    EXPECT_LE(d, grid + 1e-12);
    EXPECT_NEAR(d, grid, 1e-6 * (1.0 + v.norm()));
  }
}

TEST(OrbitDistance, DiagonalActionMatchesAngleGrid) {
  // O(2) acting diagonally on (R^2)^2, checked against both rotation and reflection grids.
  const GroupAction a = make_action({{"family", "O"}, {"n", 2}, {"rep", "diagonal"}, {"copies", 2}});
  Mat flip(2, 2);
  flip << 1, 0, 0, -1;
  for (std::uint64_t trial = 0; trial < 30; ++trial) {
    Rng rng(34, trial);
    const Vec v = rng.gaussian(4), w = rng.gaussian(4);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20000; ++i) {
      const Mat r = rotation2(2.0 * std::numbers::pi * i / 20000);
      for (const Mat& g : {Mat(r), Mat(r * flip)}) {
        Vec p(4);
        p.head(2) = g * v.head(2);
        p.tail(2) = g * v.tail(2);
        best = std::min(best, (p - w).norm());
      }
    }
    const double d = orbit_distance(a, Point(v), Point(w));
    EXPECT_LE(d, best + 1e-12);
    EXPECT_NEAR(d, best, 1e-6 * (1.0 + v.norm()));
  }
}

TEST(OrbitDistance, ConjugationMatchesSortedSpectra) {
  const GroupAction a = make_action({{"family", "SO"}, {"n", 3}, {"rep", "conjugation"}});
  ASSERT_EQ(a.ambient_dim(), 6);
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    Rng rng(35, trial);
    const Vec v = rng.gaussian(6), w = rng.gaussian(6);
    EXPECT_NEAR(orbit_distance(a, Point(v), Point(w)), spectral_distance(v, w, 3), 1e-9);
  }
}

TEST(OrbitDistance, SampledDescentAgreesWithClosedForm) {
  const GroupAction a = make_action({{"family", "SO"}, {"n", 3}, {"rep", "conjugation"}});
  OrbitDistanceOptions opt;
  opt.method = OrbitDistanceOptions::Method::sampled;
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    Rng rng(36, trial);
    const Vec v = rng.gaussian(6), w = rng.gaussian(6);
    const double exact = spectral_distance(v, w, 3);
    const double d = orbit_distance(a, Point(v), Point(w), opt);
    EXPECT_GE(d, exact - 1e-9);
    EXPECT_NEAR(d, exact, 1e-4 * (1.0 + v.norm()));
  }
}

TEST(OrbitDistance, IsAPseudometricOnRandomTriples) {
  const GroupAction a = make_action({{"family", "O"}, {"n", 3}, {"rep", "diagonal"}, {"copies", 2}});
  for (std::uint64_t trial = 0; trial < 30; ++trial) {
    Rng rng(37, trial);
    const Point x(rng.gaussian(6)), y(rng.gaussian(6)), z(rng.gaussian(6));
    const double xy = orbit_distance(a, x, y), yx = orbit_distance(a, y, x);
    EXPECT_NEAR(xy, yx, 1e-9);
    EXPECT_LE(orbit_distance(a, x, z), xy + orbit_distance(a, y, z) + 1e-9);
    EXPECT_GE(xy, std::abs(x.norm() - y.norm()) - 1e-12);
    EXPECT_LE(xy, (x.vec() - y.vec()).norm() + 1e-12);
  }
}

TEST(FixedPoints, Dimensions) {
  EXPECT_EQ(fixed_point_subspace(make_action({{"family", "O"}, {"n", 2}})).dim(), 0);
  const Subspace s3 = fixed_point_subspace(make_action({{"family", "S"}, {"n", 3}}));
  ASSERT_EQ(s3.dim(), 1);
  EXPECT_LT(s3.distance((Vec(3) << 1.0, 1.0, 1.0).finished()), 1e-12);
  EXPECT_EQ(fixed_point_subspace(make_action({{"family", "O"}, {"n", 4}, {"rep", "diagonal"}, {"copies", 3}})).dim(), 0);
  EXPECT_EQ(fixed_point_subspace(make_action({{"family", "SO"}, {"n", 3}, {"rep", "conjugation"}})).dim(), 1);
  EXPECT_EQ(fixed_point_subspace(GroupAction::finite(cyclic_group(1))).dim(), 2);
}

TEST(Homothety, ScalesPreserveFibers) {
  const GroupAction s3 = make_action({{"family", "S"}, {"n", 3}});
  const VerificationReport r =
      homothety_check(s3, Point{1.0, 2.0, 3.0}, Point{3.0, 2.0, 1.0}, {0.0, 0.5, 2.0, 10.0}, 1e-9);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.verdict, "homothety-holds");
  const VerificationReport circle = homothety_check(so2(), Point{1.0, 0.0}, Point{0.0, 1.0}, {3.0, 7.5}, 1e-9);
  EXPECT_TRUE(circle.passed());
}

TEST(Homothety, DifferentFibersAreReported) {
  const VerificationReport r = homothety_check(so2(), Point{1.0, 0.0}, Point{0.0, 2.0}, {2.0}, 1e-9);
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.verdict, "not-same-fiber");
  EXPECT_THROW(homothety_check(make_action({{"family", "S"}, {"n", 2}}), Point{1.0, 2.0}, Point{2.0, 1.0}, {-1.0}, 1e-9),
               std::invalid_argument);
}

TEST(SectionSlice, DiagonalMatricesUnderConjugation) {
  const GroupAction a = make_action({{"family", "SO"}, {"n", 3}, {"rep", "conjugation"}});
  const Point v(sym_embed(Vec((Vec(3) << 3.0, 2.0, 1.0).finished()).asDiagonal().toDenseMatrix()));
  const SliceResult s = section_slice(a, orbit(a, v, 200, 1), diagonal_matrices(3));
  EXPECT_TRUE(s.exact);
  ASSERT_EQ(s.cloud.size(), 6);
  for (Eigen::Index j = 0; j < 6; ++j) {
    const Vec c = s.cloud.matrix().col(j);
    EXPECT_LT(c.tail(3).norm(), 1e-15);
    std::vector<double> d{c[0], c[1], c[2]};
    std::sort(d.begin(), d.end());
    EXPECT_EQ(d, (std::vector<double>{1.0, 2.0, 3.0}));
  }
}

TEST(SectionSlice, ZeroOrbitAndCircleLine) {
  const GroupAction a = so2();
  const std::vector<Eigen::Index> x_axis{0};
  const SliceResult zero = section_slice(a, orbit(a, Point{0.0, 0.0}, 10, 1), Subspace::coordinate(2, x_axis));
  EXPECT_EQ(zero.cloud.size(), 1);
  EXPECT_LT(zero.cloud.matrix().norm(), 1e-15);
  const SliceResult line = section_slice(a, orbit(a, Point{0.0, 2.0}, 10, 1), Subspace::coordinate(2, x_axis));
  ASSERT_EQ(line.cloud.size(), 2);
  EXPECT_NEAR(std::abs(line.cloud.matrix()(0, 0)), 2.0, 1e-15);
  EXPECT_NEAR(line.cloud.matrix().row(0).sum(), 0.0, 1e-15);
}

TEST(SectionSlice, FiniteOrbitPicksPointsOnSubspace) {
  const GroupAction s3 = make_action({{"family", "S"}, {"n", 3}});
  Mat b(3, 1);
  b << 1.0, -1.0, 0.0;
  const SliceResult s = section_slice(s3, orbit(s3, Point{1.0, -1.0, 0.0}, 1, 0), Subspace(3, b / std::sqrt(2.0)));
  EXPECT_TRUE(s.exact);
  EXPECT_EQ(s.cloud.size(), 2);
}

TEST(MakeAction, Strictness) {
  EXPECT_THROW(make_action({{"family", "O"}}), ConfigError);
  EXPECT_THROW(make_action({{"family", "O"}, {"n", 2}, {"colour", 1}}), ConfigError);
  EXPECT_THROW(make_action({{"family", "Q"}, {"n", 2}}), ConfigError);
  EXPECT_THROW(make_action({{"family", "O"}, {"n", 2}, {"rep", "adjoint"}}), ConfigError);
  EXPECT_THROW(make_action({{"family", "dihedral"}, {"n", 7}}), ConfigError);
  EXPECT_THROW(make_action(nlohmann::json::array()), ConfigError);
  const GroupAction g = make_action({{"family", "generators"}, {"generators", {{{0, 1}, {1, 0}}}}});
  EXPECT_EQ(g.finite_group()->order(), 2u);
  EXPECT_EQ(make_action({{"family", "O"}, {"n", 4}, {"rep", "diagonal"}, {"copies", 3}}).ambient_dim(), 12);
}

TEST(RefinedSupport, ApproachesClosedForm) {
  const GroupAction a = make_action({{"family", "SO"}, {"n", 3}, {"rep", "conjugation"}});
  const Point v(sym_embed(Vec((Vec(3) << 3.0, 2.0, 1.0).finished()).asDiagonal().toDenseMatrix()));
  const OrbitCloud oc = orbit(a, v, 200, 4);
  const SupportOracle raw(oc.base), refined = refined_orbit_support(a, oc, 3);
  const std::optional<SupportOracle> exact = orbit_support_oracle(a, v);
  ASSERT_TRUE(exact.has_value());
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    Rng rng(38, trial);
    const Vec u = rng.unit_vector(6);
    const double h = (*exact)(u).value;
    const double r = refined(u).value;
    EXPECT_LE(raw(u).value, h + 1e-9);
    EXPECT_LE(r, h + 1e-9);
    EXPECT_GE(r, raw(u).value - 1e-12);
    EXPECT_NEAR(r, h, 1e-6);
  }
}
