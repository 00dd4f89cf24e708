#ifndef ORBITCVX_GEOMCORE_HPP
#define ORBITCVX_GEOMCORE_HPP

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "orbitcvx/config.hpp"

namespace orbitcvx {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(const std::string& where, Eigen::Index expected, Eigen::Index got)
      : std::invalid_argument(where + ": dimension mismatch (expected " + std::to_string(expected) +
                              ", got " + std::to_string(got) + ")") {}
};

inline void require_dim(const char* where, Eigen::Index expected, Eigen::Index got) {
  if (expected != got) throw DimensionMismatch(where, expected, got);
}

/// A vector in a finite-dimensional inner product space. Immutable; all
/// coordinates are finite.
class Point {
 public:
  explicit Point(Vec coords) : coords_(std::move(coords)) { validate(); }
  Point(std::initializer_list<double> coords) : coords_(static_cast<Eigen::Index>(coords.size())) {
    Eigen::Index i = 0;
    for (double c : coords) coords_[i++] = c;
    validate();
  }

  Eigen::Index dim() const { return coords_.size(); }
  const Vec& vec() const { return coords_; }
  double operator[](Eigen::Index i) const { return coords_[i]; }
  double norm() const { return coords_.norm(); }

 private:
  void validate() const {
    if (coords_.size() == 0) throw std::invalid_argument("Point: dimension must be positive");
    if (!coords_.allFinite()) throw std::invalid_argument("Point: coordinates must be finite");
  }

  Vec coords_;
};

/// Linear subspace of R^ambient_dim stored by an orthonormal basis (columns).
class Subspace {
 public:
  Subspace(Eigen::Index ambient_dim, Mat basis) : ambient_dim_(ambient_dim), basis_(std::move(basis)) {
    if (ambient_dim_ <= 0) throw std::invalid_argument("Subspace: ambient dimension must be positive");
    if (basis_.cols() == 0) basis_.resize(ambient_dim_, 0);
    require_dim("Subspace", ambient_dim_, basis_.rows());
    if (basis_.cols() > ambient_dim_) throw std::invalid_argument("Subspace: more basis vectors than ambient dimension");
    if (!basis_.allFinite()) throw std::invalid_argument("Subspace: basis must be finite");
    if (basis_.cols() == 0) return;
    const Mat gram = basis_.transpose() * basis_;
    const double err = (gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (err > kTol.orthonormal)
      throw std::invalid_argument("Subspace: basis is not orthonormal (error " + std::to_string(err) + ")");
  }

  static Subspace full(Eigen::Index n) { return Subspace(n, Mat::Identity(n, n)); }
  static Subspace zero(Eigen::Index n) { return Subspace(n, Mat(n, 0)); }

  /// Span of the given standard basis vectors, in the order listed.
  static Subspace coordinate(Eigen::Index n, std::span<const Eigen::Index> indices) {
    Mat b = Mat::Zero(n, static_cast<Eigen::Index>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) b(indices[j], static_cast<Eigen::Index>(j)) = 1.0;
    return Subspace(n, std::move(b));
  }

  Eigen::Index ambient_dim() const { return ambient_dim_; }
  Eigen::Index dim() const { return basis_.cols(); }
  const Mat& basis() const { return basis_; }

  Vec project(const Vec& v) const {
    require_dim("Subspace::project", ambient_dim_, v.size());
    return basis_ * (basis_.transpose() * v);
  }
  /// Coordinates of the projection with respect to the basis.
  Vec coords(const Vec& v) const {
    require_dim("Subspace::coords", ambient_dim_, v.size());
    return basis_.transpose() * v;
  }
  Vec embed(const Vec& c) const {
    require_dim("Subspace::embed", dim(), c.size());
    return basis_ * c;
  }
  double distance(const Vec& v) const { return (v - project(v)).norm(); }

 private:
  Eigen::Index ambient_dim_;
  Mat basis_;
};

/// Finite set of points sharing one dimension, stored column-wise.
class PointCloud {
 public:
  PointCloud(Mat points, std::string label = {}) : points_(std::move(points)), label_(std::move(label)) {
    if (points_.rows() <= 0) throw std::invalid_argument("PointCloud: dimension must be positive");
    if (points_.cols() == 0) throw std::invalid_argument("PointCloud: empty cloud must be created with PointCloud::empty");
    if (!points_.allFinite()) throw std::invalid_argument("PointCloud: coordinates must be finite");
  }

  explicit PointCloud(const std::vector<Point>& pts, std::string label = {}) : label_(std::move(label)) {
    if (pts.empty()) throw std::invalid_argument("PointCloud: empty cloud must be created with PointCloud::empty");
    points_.resize(pts.front().dim(), static_cast<Eigen::Index>(pts.size()));
    for (std::size_t j = 0; j < pts.size(); ++j) {
      require_dim("PointCloud", points_.rows(), pts[j].dim());
      points_.col(static_cast<Eigen::Index>(j)) = pts[j].vec();
    }
  }

  static PointCloud empty(Eigen::Index dim, std::string label = {}) {
    PointCloud c;
    c.points_.resize(dim, 0);
    c.label_ = std::move(label);
    c.empty_ = true;
    return c;
  }

  bool is_empty() const { return empty_; }
  Eigen::Index dim() const { return points_.rows(); }
  Eigen::Index size() const { return points_.cols(); }
  const Mat& matrix() const { return points_; }
  Point point(Eigen::Index i) const { return Point(points_.col(i)); }
  const std::string& label() const { return label_; }

  /// Largest distance from the first point; clouds below the degenerate
  /// threshold are treated as singletons.
  bool is_degenerate() const {
    if (empty_ || size() <= 1) return true;
    return (points_.colwise() - points_.col(0)).colwise().norm().maxCoeff() <= kTol.degenerate_cloud;
  }

 private:
  PointCloud() = default;

  Mat points_;
  std::string label_;
  bool empty_ = false;
};

/// Orthonormal basis of span(vectors) by Gram-Schmidt with a second
/// re-orthogonalization pass. Residuals below tol are dropped.
inline Subspace orthonormalize(std::span<const Point> vectors, double tol = kTol.orthonormal) {
  if (vectors.empty()) throw std::invalid_argument("orthonormalize: no input vectors");
  const Eigen::Index n = vectors.front().dim();
  std::vector<Vec> basis;
  for (const Point& p : vectors) {
    require_dim("orthonormalize", n, p.dim());
    Vec r = p.vec();
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& q : basis) r -= q.dot(r) * q;
    const double norm = r.norm();
    if (norm < tol) continue;
    basis.push_back(r / norm);
  }
  Mat b(n, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) b.col(static_cast<Eigen::Index>(j)) = basis[j];
  return Subspace(n, std::move(b));
}

inline Point project(const Subspace& sigma, const Point& v) { return Point(sigma.project(v.vec())); }

/// max over t in t_grid of (t - |v - t u|), which increases to <v,u> as t grows.
inline double busemann_pairing(const Point& v, const Point& u, std::span<const double> t_grid) {
  require_dim("busemann_pairing", v.dim(), u.dim());
  if (std::abs(u.norm() - 1.0) > kTol.orthonormal) throw std::invalid_argument("busemann_pairing: u must be a unit vector");
  if (t_grid.empty()) throw std::invalid_argument("busemann_pairing: empty t grid");
  const double vu = v.vec().dot(u.vec());
  const double vv = v.vec().squaredNorm();
  double best = -std::numeric_limits<double>::infinity();
  double prev = 0.0;
  for (double t : t_grid) {
    if (!(t > prev)) throw std::invalid_argument("busemann_pairing: t grid must be positive and increasing");
    prev = t;
    const double d = (v.vec() - t * u.vec()).norm();
    // t - d written without cancellation: (t^2 - d^2) / (t + d)
    best = std::max(best, (2.0 * t * vu - vv) / (t + d));
  }
  return best;
}

/// Geometric grid of n points from t_min to t_max.
inline std::vector<double> geometric_grid(double t_min, double t_max, int n) {
  if (n < 1 || !(t_min > 0) || !(t_max >= t_min)) throw std::invalid_argument("geometric_grid: bad range");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = n == 1 ? t_max : t_min * std::pow(t_max / t_min, static_cast<double>(i) / (n - 1));
  return g;
}

}  // namespace orbitcvx

#endif  // ORBITCVX_GEOMCORE_HPP
