#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "orbitcvx/lp.hpp"
#include "orbitcvx/rng.hpp"

using namespace orbitcvx;

namespace {

// max <c, x> over the vertices of {A^T x <= b}, by enumerating every basic
// solution. Only meaningful for bounded problems.
double vertex_enumeration(const Mat& a, const Vec& b, const Vec& c) {
  const Eigen::Index d = a.rows(), m = a.cols();
  double best = -std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
  std::function<void(Eigen::Index, Eigen::Index)> rec = [&](Eigen::Index start, Eigen::Index depth) {
    if (depth == d) {
      Mat sub(d, d);
      Vec rhs(d);
      for (Eigen::Index k = 0; k < d; ++k) {
        sub.row(k) = a.col(idx[static_cast<std::size_t>(k)]).transpose();
        rhs[k] = b[idx[static_cast<std::size_t>(k)]];
      }
      const Eigen::FullPivLU<Mat> lu(sub);
      if (lu.rank() < d) return;
      const Vec x = lu.solve(rhs);
      if (((a.transpose() * x) - b).maxCoeff() > 1e-9) return;
      best = std::max(best, c.dot(x));
      return;
    }
    for (Eigen::Index i = start; i < m; ++i) {
      idx[static_cast<std::size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST(Lp, SquareConstraints) {
  Mat a(2, 4);
  a << 1, -1, 0, 0, 0, 0, 1, -1;
  const Vec b = Vec::Ones(4);
  const lp::Result r = lp::solve({a, b, (Vec(2) << 2.0, 1.0).finished()});
  ASSERT_EQ(r.outcome, lp::Outcome::optimal);
  EXPECT_NEAR(r.value, 3.0, 1e-12);
  EXPECT_NEAR(r.argmax[0], 1.0, 1e-12);
  EXPECT_NEAR(r.argmax[1], 1.0, 1e-12);
}

TEST(Lp, UnboundedHasRecessionCertificate) {
  Mat a(2, 2);
  a << 1, 0, 0, -1;  // x <= 1, -y <= 1
  const Vec c = (Vec(2) << 0.0, 1.0).finished();
  const lp::Result r = lp::solve({a, Vec::Ones(2), c});
  ASSERT_EQ(r.outcome, lp::Outcome::unbounded);
  EXPECT_LE((a.transpose() * r.recession).maxCoeff(), 1e-12);
  EXPECT_GT(c.dot(r.recession), 0.0);
}

TEST(Lp, RejectsNegativeRhsAndTooManyVariables) {
  EXPECT_THROW(lp::solve({Mat::Identity(2, 2), -Vec::Ones(2), Vec::Ones(2)}), std::invalid_argument);
  EXPECT_THROW(lp::solve({Mat::Identity(13, 13), Vec::Ones(13), Vec::Ones(13)}), std::invalid_argument);
}

TEST(Lp, MatchesVertexEnumerationOnRandomPolytopes) {
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    Rng rng(21, trial);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.index_below(2));
    const Eigen::Index m = d + 3 + static_cast<Eigen::Index>(rng.index_below(8));
    // Centred normals.
    Mat a = rng.gaussian(d, m);
    a.colwise() -= Vec(a.rowwise().mean());
    Vec b(m);
    for (Eigen::Index i = 0; i < m; ++i) b[i] = rng.uniform(0.5, 1.5);
    const Vec c = rng.gaussian(d);
    const lp::Result r = lp::solve({a, b, c});
    const double oracle = vertex_enumeration(a, b, c);
    if (r.outcome == lp::Outcome::unbounded) {
      EXPECT_LE((a.transpose() * r.recession).maxCoeff(), 1e-9);
      EXPECT_GT(c.dot(r.recession), 0.0);
      continue;
    }
    EXPECT_NEAR(r.value, oracle, 1e-9 * (1.0 + std::abs(oracle))) << "trial " << trial;
    EXPECT_LE(r.max_violation, kTol.lp_feasibility);
    // Dual certificate: c = sum y_i a_i with y >= 0 and <y, b> = value.
    Vec combo = Vec::Zero(d);
    double dual_value = 0.0;
    for (const auto& [i, y] : r.dual) {
      EXPECT_GE(y, -1e-12);
      combo += y * a.col(i);
      dual_value += y * b[i];
    }
    EXPECT_LT((combo - c).norm(), 1e-8);
    EXPECT_NEAR(dual_value, r.value, 1e-8 * (1.0 + std::abs(r.value)));
  }
}

TEST(Lp, DegenerateConstraintsTerminate) {
  // Many redundant constraints through the same vertex.
  Mat a(2, 40);
  for (int i = 0; i < 40; ++i) {
    const double t = 0.01 * i;
    a.col(i) << std::cos(t), std::sin(t);
  }
  Mat full(2, 42);
  full << a, (Mat(2, 2) << -1, 0, 0, -1).finished();
  const lp::Result r = lp::solve({full, Vec::Ones(42), (Vec(2) << 1.0, 0.2).finished()});
  ASSERT_EQ(r.outcome, lp::Outcome::optimal);
  EXPECT_NEAR(r.value, vertex_enumeration(full, Vec::Ones(42), (Vec(2) << 1.0, 0.2).finished()), 1e-9);
}
