#ifndef ORBITCVX_CONVEX_HPP
#define ORBITCVX_CONVEX_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "orbitcvx/config.hpp"
#include "orbitcvx/geomcore.hpp"
#include "orbitcvx/lp.hpp"
#include "orbitcvx/report.hpp"
#include "orbitcvx/rng.hpp"

namespace orbitcvx {

struct SupportValue {
  double value = 0.0;
  Vec argmax;
};

/// h(A, u) = max_{a in A} <u, a>. Backed either by a finite cloud (exact
/// finite max) or by a closed-form evaluator for sets such as whole orbits.
class SupportOracle {
 public:
  using Evaluator = std::function<SupportValue(const Vec&)>;

  explicit SupportOracle(const PointCloud& cloud) {
    if (cloud.is_empty()) throw std::invalid_argument("SupportOracle: empty cloud");
    dim_ = cloud.dim();
    label_ = cloud.label();
    if (cloud.is_degenerate())
      cloud_ = std::make_shared<const PointCloud>(Mat(cloud.matrix().col(0)), cloud.label());
    else
      cloud_ = std::make_shared<const PointCloud>(cloud);
    radius_ = cloud_->matrix().colwise().norm().maxCoeff();
  }

  SupportOracle(Eigen::Index dim, Evaluator evaluator, double radius, std::string label = {})
      : dim_(dim), evaluator_(std::move(evaluator)), radius_(radius), label_(std::move(label)) {
    if (dim_ <= 0) throw std::invalid_argument("SupportOracle: dimension must be positive");
  }

  SupportValue operator()(const Vec& u) const {
    require_dim("SupportOracle", dim_, u.size());
    if (!cloud_) return evaluator_(u);
    Eigen::Index best = 0;
    const double value = (u.transpose() * cloud_->matrix()).maxCoeff(&best);
    return {value, cloud_->matrix().col(best)};
  }

  Eigen::Index dim() const { return dim_; }
  /// Finite source cloud, or nullptr for closed-form oracles.
  const PointCloud* cloud() const { return cloud_.get(); }
  /// Upper bound on the norm of any point of the set.
  double radius() const { return radius_; }
  const std::string& label() const { return label_; }

 private:
  Eigen::Index dim_ = 0;
  std::shared_ptr<const PointCloud> cloud_;
  Evaluator evaluator_;
  double radius_ = 0.0;
  std::string label_;
};

inline std::pair<double, Point> support(const SupportOracle& oracle, const Point& u) {
  SupportValue s = oracle(u.vec());
  return {s.value, Point(std::move(s.argmax))};
}

// ---------------------------------------------------------------------------
// Hull membership

struct ConvexCombination {
  std::vector<Vec> atoms;
  std::vector<double> weights;
};

struct Separator {
  Vec direction;  // unit
  double margin = 0.0;  // <direction, v> - h(A, direction)
};

struct MembershipResult {
  bool inside = false;
  bool converged = false;
  double distance = 0.0;     // |v - nearest|, an upper bound on the true distance
  double lower_bound = 0.0;  // best separation margin seen
  Vec nearest;
  std::variant<ConvexCombination, Separator> certificate;
  int iterations = 0;
};

enum class HullMethod {
  gilbert,          ///< plain Frank-Wolfe with exact line search
  fully_corrective  ///< Wolfe's minimum-norm-point active-set variant
};

namespace detail {

// Weights mu (summing to one) minimizing |v - sum mu_i s_i| over the affine
// hull of the atoms; minimum-norm least squares handles dependent atoms.
inline std::vector<double> affine_min_weights(const std::vector<Vec>& atoms, const Vec& v) {
  const std::size_t k = atoms.size();
  if (k == 1) return {1.0};
  const Vec p0 = atoms[0] - v;
  Mat D(v.size(), static_cast<Eigen::Index>(k - 1));
  for (std::size_t i = 1; i < k; ++i) D.col(static_cast<Eigen::Index>(i - 1)) = atoms[i] - atoms[0];
  const Vec t = D.completeOrthogonalDecomposition().solve(-p0);
  std::vector<double> mu(k);
  mu[0] = 1.0 - t.sum();
  for (std::size_t i = 1; i < k; ++i) mu[i] = t[static_cast<Eigen::Index>(i - 1)];
  return mu;
}

inline Vec combine(const std::vector<Vec>& atoms, const std::vector<double>& w) {
  Vec x = Vec::Zero(atoms.front().size());
  for (std::size_t i = 0; i < atoms.size(); ++i) x += w[i] * atoms[i];
  return x;
}

}  // namespace detail

/// Distance from v to conv(A) using only the support oracle of A. Stops when
/// the Frank-Wolfe duality gap drops below tol^2 or after max_iter steps.
inline MembershipResult conv_membership(const SupportOracle& oracle, const Point& v, double tol, int max_iter,
                                        HullMethod method = HullMethod::fully_corrective) {
  require_dim("conv_membership", oracle.dim(), v.dim());
  if (!(tol > 0)) throw std::invalid_argument("conv_membership: tol must be positive");
  const Vec& target = v.vec();
  const double scale = 1.0 + target.norm() + oracle.radius();
  const double gap_tol = tol * tol;

  std::vector<Vec> atoms{oracle(target).argmax};
  std::vector<double> weights{1.0};
  Vec x = atoms.front();

  MembershipResult out;
  double lower = 0.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    const Vec d = target - x;
    const double dist = d.norm();
    if (dist <= 1e-15 * scale) {
      out.converged = true;
      break;
    }
    const SupportValue s = oracle(d);
    lower = std::max(lower, (d.dot(target) - s.value) / dist);
    const double gap = d.dot(s.argmax - x);
    if (gap <= gap_tol) {
      out.converged = true;
      break;
    }
    const double merge_tol = 1e-12 * scale;
    auto known = std::find_if(atoms.begin(), atoms.end(), [&](const Vec& a) { return (a - s.argmax).norm() <= merge_tol; });

    if (method == HullMethod::gilbert) {
      const Vec step = s.argmax - x;
      const double theta = std::clamp(d.dot(step) / step.squaredNorm(), 0.0, 1.0);
      for (double& w : weights) w *= (1.0 - theta);
      if (known != atoms.end())
        weights[static_cast<std::size_t>(known - atoms.begin())] += theta;
      else {
        atoms.push_back(s.argmax);
        weights.push_back(theta);
      }
      x += theta * step;
      continue;
    }

    // Fully corrective step. An atom that is already active cannot improve
    // the minimum-norm point over the active set, so x is optimal.
    if (known != atoms.end()) {
      out.converged = true;
      break;
    }
    atoms.push_back(s.argmax);
    weights.push_back(0.0);
    for (int minor = 0; minor < 4 * static_cast<int>(atoms.size()) + 8; ++minor) {
      const std::vector<double> mu = detail::affine_min_weights(atoms, target);
      constexpr double kPositive = 1e-14;
      if (std::all_of(mu.begin(), mu.end(), [](double m) { return m > kPositive; })) {
        weights = mu;
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < mu.size(); ++i)
        if (mu[i] <= kPositive && weights[i] - mu[i] > 0) theta = std::min(theta, weights[i] / (weights[i] - mu[i]));
      for (std::size_t i = 0; i < mu.size(); ++i) weights[i] += theta * (mu[i] - weights[i]);
      std::vector<Vec> kept_atoms;
      std::vector<double> kept_weights;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (weights[i] > kPositive) {
          kept_atoms.push_back(atoms[i]);
          kept_weights.push_back(weights[i]);
        }
      }
      if (kept_atoms.empty()) {
        kept_atoms.push_back(atoms.back());
        kept_weights.push_back(1.0);
      }
      const double total = std::accumulate(kept_weights.begin(), kept_weights.end(), 0.0);
      for (double& w : kept_weights) w /= total;
      atoms = std::move(kept_atoms);
      weights = std::move(kept_weights);
    }
    x = detail::combine(atoms, weights);
  }

  out.iterations = it;
  out.nearest = x;
  out.distance = (target - x).norm();
  out.lower_bound = out.converged && out.distance <= tol ? 0.0 : std::max(0.0, lower);
  out.inside = out.distance <= tol;
  if (out.inside) {
    out.certificate = ConvexCombination{atoms, weights};
  } else {
    Separator sep;
    sep.direction = (target - x) / out.distance;
    sep.margin = sep.direction.dot(target) - oracle(sep.direction).value;
    out.lower_bound = std::max(out.lower_bound, sep.margin);
    out.certificate = std::move(sep);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Polar sets. A polar is never stored; it is queried through LPs.

struct PolarSupport {
  bool bounded = true;
  double value = 0.0;
  Vec argmax;     // a vertex of the polar attaining the value
  Vec recession;  // when unbounded: a direction of the polar along which <u, .> grows
};

/// h({x : <a_i, x> <= b_i}, u) for non-negative b.
inline PolarSupport halfspace_support(const Mat& normals, const Vec& rhs, const Vec& u) {
  const lp::Result r = lp::solve(lp::Problem{normals, rhs, u});
  PolarSupport out;
  if (r.outcome == lp::Outcome::unbounded) {
    out.bounded = false;
    out.value = std::numeric_limits<double>::infinity();
    out.recession = r.recession;
    return out;
  }
  out.value = r.value;
  out.argmax = r.argmax;
  return out;
}

/// h(A°, u) where A° = {x : <a, x> <= 1 for a in A}.
inline PolarSupport polar_support(const PointCloud& cloud, const Point& u) {
  require_dim("polar_support", cloud.dim(), u.dim());
  const MembershipResult origin = conv_membership(SupportOracle(cloud), Point(Vec::Zero(cloud.dim())), 1e-9, 10000);
  if (!origin.inside) throw std::invalid_argument("polar_support: origin is not in conv(cloud)");
  return halfspace_support(cloud.matrix(), Vec::Ones(cloud.size()), u.vec());
}

struct BipolarSupport {
  double value = 0.0;   // h(P°, u), attained by a point scaled into P°
  double upper = 0.0;   // value of the relaxed cutting-plane LP
  int cuts = 0;
  int rounds = 0;
};

/// h(P°, u) for the polyhedron P = {x : <a_i, x> <= 1}, using only support
/// queries against P. Cuts are vertices or recession directions of P, so the
/// loop terminates; no vertex list of P is ever formed.
inline BipolarSupport bipolar_support(const Mat& normals, const Vec& u, double feas_tol = 1e-10, int max_rounds = 10000) {
  const Eigen::Index d = normals.rows();
  require_dim("bipolar_support", d, u.size());
  const Vec ones = Vec::Ones(normals.cols());
  std::vector<Vec> cut_normals;
  std::vector<double> cut_rhs;
  auto add_cut_for = [&](const Vec& direction) -> bool {
    const PolarSupport q = halfspace_support(normals, ones, direction);
    if (!q.bounded) {
      cut_normals.push_back(q.recession);
      cut_rhs.push_back(0.0);
      return true;
    }
    if (q.value <= 1.0 + feas_tol) return false;
    cut_normals.push_back(q.argmax);
    cut_rhs.push_back(1.0);
    return true;
  };
  for (Eigen::Index i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e[i] = 1.0;
    add_cut_for(e * 1e6);
    add_cut_for(-e * 1e6);
  }

  BipolarSupport out;
  for (int round = 0; round < max_rounds; ++round) {
    out.rounds = round + 1;
    Mat cn(d, static_cast<Eigen::Index>(cut_normals.size()));
    Vec cr(static_cast<Eigen::Index>(cut_rhs.size()));
    for (std::size_t j = 0; j < cut_normals.size(); ++j) {
      cn.col(static_cast<Eigen::Index>(j)) = cut_normals[j];
      cr[static_cast<Eigen::Index>(j)] = cut_rhs[j];
    }
    const PolarSupport relaxed = halfspace_support(cn, cr, u);
    if (!relaxed.bounded) {
      if (!add_cut_for(relaxed.recession * 1e6))
        throw std::runtime_error("bipolar_support: polar of P is unbounded in the queried direction");
      continue;
    }
    // relaxed.argmax lies in P° iff h(P, x) <= 1.
    const PolarSupport check = halfspace_support(normals, ones, relaxed.argmax);
    if (check.bounded && check.value <= 1.0 + feas_tol) {
      out.upper = relaxed.value;
      out.value = relaxed.value / std::max(1.0, check.value);
      out.cuts = static_cast<int>(cut_normals.size());
      return out;
    }
    if (!check.bounded) {
      cut_normals.push_back(check.recession);
      cut_rhs.push_back(0.0);
    } else {
      cut_normals.push_back(check.argmax);
      cut_rhs.push_back(1.0);
    }
  }
  throw std::runtime_error("bipolar_support: cutting-plane round limit reached");
}

// ---------------------------------------------------------------------------
// Direction sets and hull comparison

/// Fixed symmetric directions (axes, pairwise diagonals, the main diagonal)
/// followed by `budget` uniform random unit directions.
inline std::vector<Vec> sample_directions(Eigen::Index dim, int budget, std::uint64_t seed) {
  std::vector<Vec> dirs;
  for (Eigen::Index i = 0; i < dim; ++i) {
    Vec e = Vec::Zero(dim);
    e[i] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = i + 1; j < dim; ++j)
      for (double si : {1.0, -1.0})
        for (double sj : {1.0, -1.0}) {
          Vec e = Vec::Zero(dim);
          e[i] = si / std::sqrt(2.0);
          e[j] = sj / std::sqrt(2.0);
          dirs.push_back(e);
        }
  if (dim > 2) {
    dirs.push_back(Vec::Ones(dim) / std::sqrt(static_cast<double>(dim)));
    dirs.push_back(-Vec::Ones(dim) / std::sqrt(static_cast<double>(dim)));
  }
  for (int k = 0; k < budget; ++k) {
    Rng rng(seed, static_cast<std::uint64_t>(k), /*salt=*/0xd1);
    dirs.push_back(rng.unit_vector(dim));
  }
  return dirs;
}

/// Directions inside a subspace, expressed in ambient coordinates.
inline std::vector<Vec> sample_directions(const Subspace& sigma, int budget, std::uint64_t seed) {
  std::vector<Vec> dirs;
  if (sigma.dim() == 0) return dirs;
  for (const Vec& c : sample_directions(sigma.dim(), budget, seed)) dirs.push_back(sigma.embed(c));
  return dirs;
}

/// max over sampled unit directions of |h(A,u) - h(B,u)|; tends to the
/// Hausdorff distance of the convex hulls as the direction set densifies.
inline double hull_hausdorff(const SupportOracle& a, const SupportOracle& b, int direction_budget, std::uint64_t seed,
                             const Subspace* within = nullptr) {
  require_dim("hull_hausdorff", a.dim(), b.dim());
  const std::vector<Vec> dirs = within ? sample_directions(*within, direction_budget, seed)
                                       : sample_directions(a.dim(), direction_budget, seed);
  double gap = 0.0;
  for (const Vec& u : dirs) gap = std::max(gap, std::abs(a(u).value - b(u).value));
  return gap;
}

inline double hull_hausdorff(const PointCloud& a, const PointCloud& b, int direction_budget, std::uint64_t seed) {
  return hull_hausdorff(SupportOracle(a), SupportOracle(b), direction_budget, seed);
}

/// Number of singular values of the centered point matrix above
/// rel_tol * (largest singular value).
inline int affine_dimension(const PointCloud& cloud, double rel_tol = 1e-9) {
  if (cloud.is_empty()) throw std::invalid_argument("affine_dimension: empty cloud");
  if (cloud.is_degenerate()) return 0;
  const Vec center = cloud.matrix().rowwise().mean();
  const Mat centered = (cloud.matrix().colwise() - center).transpose();
  const Eigen::JacobiSVD<Mat> svd(centered);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > rel_tol * sv[0]) ++rank;
  return rank;
}

/// Merges points lying within tol of each other; survivors keep their order.
inline Mat dedupe_columns(const Mat& pts, double tol) {
  const Eigen::Index n = pts.cols();
  if (n == 0) return pts;
  Rng rng(0x5eed, 0, 0xdd);
  const Vec key_dir = rng.unit_vector(pts.rows());
  const Vec keys = pts.transpose() * key_dir;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return keys[i] < keys[j]; });
  std::vector<bool> drop(static_cast<std::size_t>(n), false);
  for (std::size_t a = 0; a < order.size(); ++a) {
    const Eigen::Index i = order[a];
    if (drop[static_cast<std::size_t>(i)]) continue;
    for (std::size_t b = a + 1; b < order.size() && keys[order[b]] - keys[i] <= tol; ++b) {
      const Eigen::Index j = order[b];
      if ((pts.col(i) - pts.col(j)).norm() <= tol) drop[static_cast<std::size_t>(j)] = true;
    }
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!drop[static_cast<std::size_t>(i)]) keep.push_back(i);
  Mat out(pts.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = pts.col(keep[j]);
  return out;
}

/// Pointwise orthogonal projection onto sigma (ambient coordinates);
/// coincident images are merged.
inline PointCloud project_cloud(const Subspace& sigma, const PointCloud& cloud) {
  require_dim("project_cloud", sigma.ambient_dim(), cloud.dim());
  if (cloud.is_empty()) return PointCloud::empty(cloud.dim(), cloud.label());
  const Mat& q = sigma.basis();
  const Mat projected = q * (q.transpose() * cloud.matrix());
  return PointCloud(dedupe_columns(projected, 1e-12), cloud.label().empty() ? "projected" : cloud.label() + ":projected");
}

// ---------------------------------------------------------------------------
// Verification reports built on the primitives above

/// Compares h(A°°, u), computed through polar LPs, with h(conv A, u).
inline VerificationReport bipolar_check(const PointCloud& cloud, int direction_budget, double tol, std::uint64_t seed) {
  VerificationReport r("bipolar");
  r.budgets["directions"] = direction_budget;
  r.seeds["directions"] = seed;
  const SupportOracle oracle(cloud);
  const MembershipResult origin = conv_membership(oracle, Point(Vec::Zero(cloud.dim())), 1e-9, 10000);
  r.check("origin_in_hull", origin.inside ? 1.0 : 0.0, Compare::eq, 1.0);
  if (!origin.inside) {
    r.verdict = "precondition-failed";
    r.note("origin_distance", origin.distance);
    return r;
  }
  double max_gap = 0.0;
  for (const Vec& u : sample_directions(cloud.dim(), direction_budget, seed)) {
    const BipolarSupport bp = bipolar_support(cloud.matrix(), u);
    max_gap = std::max(max_gap, std::abs(bp.value - oracle(u).value));
  }
  r.check("max_support_gap", max_gap, Compare::le, tol);
  r.verdict = r.passed() ? "bipolar-identity-holds" : "bipolar-gap-exceeded";
  return r;
}

/// For u in sigma: h(pi_sigma A, u) against h((sigma ∩ A°)°, u), the latter
/// computed by cutting planes inside sigma.
inline VerificationReport projection_polar_check(const PointCloud& cloud, const Subspace& sigma, int direction_budget,
                                                 double tol, std::uint64_t seed) {
  require_dim("projection_polar_check", sigma.ambient_dim(), cloud.dim());
  VerificationReport r("projection-polar");
  r.budgets["directions"] = direction_budget;
  r.seeds["directions"] = seed;
  const MembershipResult origin = conv_membership(SupportOracle(cloud), Point(Vec::Zero(cloud.dim())), 1e-9, 10000);
  r.check("origin_in_hull", origin.inside ? 1.0 : 0.0, Compare::eq, 1.0);
  if (!origin.inside || sigma.dim() == 0) {
    r.verdict = origin.inside ? "trivial-subspace" : "precondition-failed";
    return r;
  }
  const SupportOracle projected(project_cloud(sigma, cloud));
  const Mat slice_normals = sigma.basis().transpose() * cloud.matrix();  // sigma ∩ A° in sigma coordinates
  double max_gap = 0.0;
  for (const Vec& c : sample_directions(sigma.dim(), direction_budget, seed)) {
    const double via_polar = bipolar_support(slice_normals, c).value;
    max_gap = std::max(max_gap, std::abs(projected(sigma.embed(c)).value - via_polar));
  }
  r.check("max_support_gap", max_gap, Compare::le, tol);
  r.verdict = r.passed() ? "projection-polar-identity-holds" : "projection-polar-gap-exceeded";
  return r;
}

}  // namespace orbitcvx

#endif  // ORBITCVX_CONVEX_HPP
