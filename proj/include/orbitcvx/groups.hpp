#ifndef ORBITCVX_GROUPS_HPP
#define ORBITCVX_GROUPS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "orbitcvx/config.hpp"
#include "orbitcvx/convex.hpp"
#include "orbitcvx/geomcore.hpp"
#include "orbitcvx/report.hpp"
#include "orbitcvx/rng.hpp"

namespace orbitcvx {

inline double orthogonality_error(const Mat& m) {
  return (m.transpose() * m - Mat::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

inline void require_orthogonal(const char* where, const Mat& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw std::invalid_argument(std::string(where) + ": matrix must be square");
  if (!m.allFinite() || orthogonality_error(m) > kTol.orthogonal_matrix)
    throw std::invalid_argument(std::string(where) + ": matrix is not orthogonal");
}

inline Mat rotation2(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

/// Cayley map of a skew-symmetric matrix; lands in SO(n).
inline Mat cayley(const Mat& skew) {
  const Mat id = Mat::Identity(skew.rows(), skew.cols());
  return (id - 0.5 * skew).partialPivLu().solve(id + 0.5 * skew);
}

// ---------------------------------------------------------------------------
// Finite groups

class GroupOverflow : public std::runtime_error {
 public:
  explicit GroupOverflow(std::size_t cap)
      : std::runtime_error("enumerate_group: group order exceeds max_order = " + std::to_string(cap)), cap_(cap) {}
  std::size_t cap() const { return cap_; }

 private:
  std::size_t cap_;
};

struct FiniteOrthogonalGroup {
  int dim = 0;
  std::vector<Mat> generators;
  std::vector<Mat> elements;  // elements[0] is the identity
  std::size_t max_order = 0;
  std::string name;
  bool coordinate_permutations = false;  // all of S_dim acting by permutation matrices

  std::size_t order() const { return elements.size(); }
};

/// Closure of the generators under multiplication. Matrices within dedup_tol
/// (Frobenius) are identified; a hash on a fixed linear functional rounded
/// to a coarse grid narrows the comparisons.
inline FiniteOrthogonalGroup enumerate_group(std::vector<Mat> generators, int dim, std::size_t max_order = 100000,
                                             double dedup_tol = kTol.matrix_dedup) {
  if (dim <= 0) throw std::invalid_argument("enumerate_group: dimension must be positive");
  for (const Mat& g : generators) {
    require_dim("enumerate_group", dim, g.rows());
    require_orthogonal("enumerate_group", g);
  }
  Rng rng(0x9e0u, 0, 0x6b);
  const Mat probe = rng.gaussian(dim, dim).normalized();
  constexpr double kCell = 1e-6;
  auto key_of = [&](const Mat& m) { return static_cast<std::int64_t>(std::floor((probe.cwiseProduct(m)).sum() / kCell)); };

  FiniteOrthogonalGroup g;
  g.dim = dim;
  g.generators = std::move(generators);
  g.max_order = max_order;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets;
  auto insert = [&](const Mat& m) -> bool {
    const std::int64_t k = key_of(m);
    for (std::int64_t kk = k - 1; kk <= k + 1; ++kk) {
      auto it = buckets.find(kk);
      if (it == buckets.end()) continue;
      for (std::size_t idx : it->second)
        if ((g.elements[idx] - m).norm() <= dedup_tol) return false;
    }
    if (g.elements.size() >= max_order) throw GroupOverflow(max_order);
    buckets[k].push_back(g.elements.size());
    g.elements.push_back(m);
    return true;
  };
  insert(Mat::Identity(dim, dim));
  for (std::size_t i = 0; i < g.elements.size(); ++i)
    for (const Mat& s : g.generators) {
      Mat p = s * g.elements[i];
      insert(p);
    }
  return g;
}

inline FiniteOrthogonalGroup cyclic_group(int order) {
  if (order < 1) throw std::invalid_argument("cyclic_group: order must be positive");
  FiniteOrthogonalGroup g = enumerate_group({rotation2(2.0 * std::numbers::pi / order)}, 2);
  g.name = "C" + std::to_string(order);
  return g;
}

/// Dihedral group of the given order (2m) acting on R^2.
inline FiniteOrthogonalGroup dihedral_group(int order) {
  if (order < 2 || order % 2 != 0) throw std::invalid_argument("dihedral_group: order must be even and at least 2");
  Mat reflection(2, 2);
  reflection << 1, 0, 0, -1;
  FiniteOrthogonalGroup g = enumerate_group({rotation2(4.0 * std::numbers::pi / order), reflection}, 2);
  g.name = "D" + std::to_string(order);
  return g;
}

inline FiniteOrthogonalGroup sign_group(int n) {
  FiniteOrthogonalGroup g = enumerate_group({-Mat::Identity(n, n)}, n);
  g.name = "PM" + std::to_string(n);
  return g;
}

inline Mat permutation_matrix(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  Mat p = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) p(perm[static_cast<std::size_t>(i)], i) = 1.0;
  return p;
}

inline FiniteOrthogonalGroup symmetric_group(int n, std::size_t max_order = 100000) {
  if (n < 1) throw std::invalid_argument("symmetric_group: n must be positive");
  std::vector<Mat> gens;
  if (n >= 2) {
    std::vector<int> swap(static_cast<std::size_t>(n)), cycle(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      swap[static_cast<std::size_t>(i)] = i;
      cycle[static_cast<std::size_t>(i)] = (i + 1) % n;
    }
    std::swap(swap[0], swap[1]);
    gens.push_back(permutation_matrix(swap));
    if (n > 2) gens.push_back(permutation_matrix(cycle));
  }
  FiniteOrthogonalGroup g = enumerate_group(std::move(gens), n, max_order);
  g.name = "S" + std::to_string(n);
  g.coordinate_permutations = true;
  return g;
}

// ---------------------------------------------------------------------------
// Compact groups

enum class Family { O, SO, S, dihedral };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::O: return "O";
    case Family::SO: return "SO";
    case Family::S: return "S";
    case Family::dihedral: return "dihedral";
  }
  return "?";
}

/// Haar-distributed group elements drawn independently per (seed, index).
/// For S and dihedral, n is the matrix size (resp. the group order) and
/// draws are uniform over the enumerated group.
class CompactGroupSampler {
 public:
  CompactGroupSampler(Family family, int n, std::uint64_t seed = kDefaultSeed) : family_(family), n_(n), seed_(seed) {
    if (n <= 0) throw std::invalid_argument("CompactGroupSampler: n must be positive");
    if (family == Family::S) finite_ = std::make_shared<const FiniteOrthogonalGroup>(symmetric_group(n));
    if (family == Family::dihedral) finite_ = std::make_shared<const FiniteOrthogonalGroup>(dihedral_group(n));
  }

  Family family() const { return family_; }
  int n() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  /// Size of the matrices produced.
  int matrix_dim() const { return finite_ ? finite_->dim : n_; }

  Mat sample(std::uint64_t index, std::uint64_t stream = 0) const {
    Rng rng(seed_ ^ mix64(stream), index, /*salt=*/0x4a);
    if (finite_) return finite_->elements[rng.index_below(finite_->order())];
    const Mat z = rng.gaussian(n_, n_);
    const Eigen::HouseholderQR<Mat> qr(z);
    Mat q = qr.householderQ() * Mat::Identity(n_, n_);
    const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < n_; ++i)
      if (r(i, i) < 0) q.col(i) = -q.col(i);
    if (family_ == Family::SO && q.determinant() < 0) q.col(0) = -q.col(0);
    return q;
  }

 private:
  Family family_;
  int n_;
  std::uint64_t seed_;
  std::shared_ptr<const FiniteOrthogonalGroup> finite_;
};

// ---------------------------------------------------------------------------
// Representations

enum class Rep { standard, diagonal, conjugation, permutation };

inline const char* to_string(Rep r) {
  switch (r) {
    case Rep::standard: return "standard";
    case Rep::diagonal: return "diagonal";
    case Rep::conjugation: return "conjugation-symmetric";
    case Rep::permutation: return "permutation";
  }
  return "?";
}

/// Symmetric n x n matrix to R^{n(n+1)/2}: diagonal first, then sqrt(2)*X_ij
/// for i < j in row-major order. Isometric for the Frobenius product.
inline Vec sym_embed(const Mat& x) {
  const Eigen::Index n = x.rows();
  Vec v(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) v[k++] = x(i, i);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) v[k++] = std::sqrt(2.0) * 0.5 * (x(i, j) + x(j, i));
  return v;
}

inline Mat sym_unembed(const Vec& v, Eigen::Index n) {
  require_dim("sym_unembed", n * (n + 1) / 2, v.size());
  Mat x(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) x(i, i) = v[k++];
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) x(i, j) = x(j, i) = v[k++] / std::sqrt(2.0);
  return x;
}

/// Subspace of diagonal matrices inside the embedded symmetric matrices.
inline Subspace diagonal_matrices(Eigen::Index n) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  return Subspace::coordinate(n * (n + 1) / 2, idx);
}

/// A group (finite or sampled compact) acting orthogonally on R^ambient_dim
/// through one of the built-in representations.
class GroupAction {
 public:
  static GroupAction finite(FiniteOrthogonalGroup g, Rep rep = Rep::standard, int copies = 1) {
    GroupAction a;
    a.finite_ = std::make_shared<const FiniteOrthogonalGroup>(std::move(g));
    a.n_ = a.finite_->dim;
    a.init(rep, copies);
    return a;
  }
  static GroupAction compact(CompactGroupSampler s, Rep rep = Rep::standard, int copies = 1) {
    if (s.family() == Family::S || s.family() == Family::dihedral) {
      const Family f = s.family();
      const int n = s.n();
      return finite(f == Family::S ? symmetric_group(n) : dihedral_group(n),
                    rep == Rep::standard && f == Family::S ? Rep::permutation : rep, copies);
    }
    GroupAction a;
    a.sampler_ = std::make_shared<const CompactGroupSampler>(s);
    a.n_ = s.n();
    a.init(rep, copies);
    return a;
  }

  bool is_finite() const { return static_cast<bool>(finite_); }
  /// Orbits are enumerated exactly (finite groups, permutation reps).
  bool exact() const { return is_finite(); }
  const FiniteOrthogonalGroup* finite_group() const { return finite_.get(); }
  const CompactGroupSampler* sampler() const { return sampler_.get(); }
  /// Size n of the group matrices.
  int group_dim() const { return n_; }
  Rep rep() const { return rep_; }
  int copies() const { return copies_; }
  Eigen::Index ambient_dim() const { return ambient_; }
  /// O(n) or SO(n) acting through a built-in representation.
  bool is_orthogonal_family() const { return sampler_ != nullptr; }
  bool special() const { return sampler_ && sampler_->family() == Family::SO; }

  Vec act(const Mat& g, const Vec& v) const {
    require_dim("GroupAction::act", ambient_, v.size());
    switch (rep_) {
      case Rep::standard:
      case Rep::permutation: return g * v;
      case Rep::diagonal: {
        Vec out(ambient_);
        Eigen::Map<Mat>(out.data(), n_, copies_) = g * Eigen::Map<const Mat>(v.data(), n_, copies_);
        return out;
      }
      case Rep::conjugation: return sym_embed(g * sym_unembed(v, n_) * g.transpose());
    }
    return v;
  }

  /// Derivative of t -> act(exp(t E), u) at t = 0 for skew E.
  Vec infinitesimal(const Mat& skew, const Vec& u) const {
    switch (rep_) {
      case Rep::standard:
      case Rep::permutation: return skew * u;
      case Rep::diagonal: {
        Vec out(ambient_);
        Eigen::Map<Mat>(out.data(), n_, copies_) = skew * Eigen::Map<const Mat>(u.data(), n_, copies_);
        return out;
      }
      case Rep::conjugation: {
        const Mat x = sym_unembed(u, n_);
        return sym_embed(skew * x - x * skew);
      }
    }
    return u;
  }

  /// Matrix of the induced linear map on the ambient space.
  Mat represent(const Mat& g) const {
    Mat m(ambient_, ambient_);
    for (Eigen::Index i = 0; i < ambient_; ++i) m.col(i) = act(g, Vec::Unit(ambient_, i));
    return m;
  }

  /// Uniform element for finite groups, Haar sample otherwise.
  Mat sample_element(std::uint64_t seed, std::uint64_t index) const {
    if (finite_) {
      Rng rng(seed, index, /*salt=*/0x4b);
      return finite_->elements[rng.index_below(finite_->order())];
    }
    return sampler_->sample(index, seed);
  }

  nlohmann::json descriptor() const {
    nlohmann::json j;
    if (finite_) {
      j["family"] = "generators";
      j["name"] = finite_->name;
      j["dim"] = finite_->dim;
      j["order"] = finite_->order();
      nlohmann::json gens = nlohmann::json::array();
      for (const Mat& g : finite_->generators) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          std::vector<double> row(static_cast<std::size_t>(g.cols()));
          for (Eigen::Index c = 0; c < g.cols(); ++c) row[static_cast<std::size_t>(c)] = g(r, c);
          rows.push_back(row);
        }
        gens.push_back(rows);
      }
      j["generators"] = gens;
    } else {
      j["family"] = to_string(sampler_->family());
      j["n"] = sampler_->n();
      j["seed"] = sampler_->seed();
    }
    j["rep"] = to_string(rep_);
    if (rep_ == Rep::diagonal) j["copies"] = copies_;
    j["ambient_dim"] = ambient_;
    return j;
  }

 private:
  GroupAction() = default;

  void init(Rep rep, int copies) {
    rep_ = rep;
    copies_ = rep == Rep::diagonal ? copies : 1;
    if (rep == Rep::diagonal && copies < 1) throw std::invalid_argument("GroupAction: copies must be positive");
    if (rep == Rep::permutation && !(finite_ && finite_->coordinate_permutations))
      throw std::invalid_argument("GroupAction: permutation representation requires a symmetric group");
    switch (rep) {
      case Rep::standard:
      case Rep::permutation: ambient_ = n_; break;
      case Rep::diagonal: ambient_ = static_cast<Eigen::Index>(n_) * copies_; break;
      case Rep::conjugation: ambient_ = static_cast<Eigen::Index>(n_) * (n_ + 1) / 2; break;
    }
  }

  std::shared_ptr<const FiniteOrthogonalGroup> finite_;
  std::shared_ptr<const CompactGroupSampler> sampler_;
  int n_ = 0;
  Rep rep_ = Rep::standard;
  int copies_ = 1;
  Eigen::Index ambient_ = 0;
};

inline Mat parse_matrix(const nlohmann::json& j, const char* where) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(where) + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ConfigError(std::string(where) + ": ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ConfigError(std::string(where) + ": matrix entries must be numbers");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

/// Builds an action from a descriptor such as
/// {"family":"SO","n":3,"rep":"conjugation-symmetric"}. Unknown keys are rejected.
inline GroupAction make_action(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("action: descriptor must be a JSON object");
  static const std::vector<std::string> allowed{"family", "n", "rep", "copies", "generators", "dim", "seed", "name",
                                                "order", "ambient_dim"};
  for (const auto& [key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("action: unknown key \"" + key + "\"");
  if (!j.contains("family")) throw ConfigError("action: missing \"family\"");
  const std::string family = j.at("family").get<std::string>();
  const std::string rep_name = j.value("rep", family == "S" ? "permutation" : "standard");
  Rep rep;
  if (rep_name == "standard") rep = Rep::standard;
  else if (rep_name == "diagonal") rep = Rep::diagonal;
  else if (rep_name == "conjugation-symmetric" || rep_name == "conjugation") rep = Rep::conjugation;
  else if (rep_name == "permutation") rep = Rep::permutation;
  else throw ConfigError("action: unknown rep \"" + rep_name + "\"");
  const int copies = j.value("copies", 1);
  if (copies < 1) throw ConfigError("action: copies must be positive");
  auto need_n = [&]() {
    if (!j.contains("n") || !j.at("n").is_number_integer() || j.at("n").get<int>() < 1)
      throw ConfigError("action: \"" + family + "\" needs a positive integer \"n\"");
    return j.at("n").get<int>();
  };
  try {
    if (family == "O" || family == "SO") {
      const std::uint64_t seed = j.value("seed", kDefaultSeed);
      return GroupAction::compact(CompactGroupSampler(family == "O" ? Family::O : Family::SO, need_n(), seed), rep, copies);
    }
    if (family == "S") return GroupAction::finite(symmetric_group(need_n()), rep, copies);
    if (family == "dihedral") return GroupAction::finite(dihedral_group(need_n()), rep, copies);
    if (family == "cyclic") return GroupAction::finite(cyclic_group(need_n()), rep, copies);
    if (family == "sign") return GroupAction::finite(sign_group(need_n()), rep, copies);
    if (family == "generators") {
      if (!j.contains("generators") || !j.at("generators").is_array())
        throw ConfigError("action: \"generators\" family needs a \"generators\" array");
      std::vector<Mat> gens;
      for (const auto& g : j.at("generators")) gens.push_back(parse_matrix(g, "action.generators"));
      int dim = j.value("dim", gens.empty() ? 0 : static_cast<int>(gens.front().rows()));
      FiniteOrthogonalGroup g = enumerate_group(std::move(gens), dim);
      g.name = j.value("name", std::string("G"));
      return GroupAction::finite(std::move(g), rep, copies);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("action: ") + e.what());
  }
  throw ConfigError("action: unknown family \"" + family + "\"");
}

// ---------------------------------------------------------------------------
// Orbits

struct OrbitCloud {
  PointCloud base;
  nlohmann::json action;
  Point seed_point;
  bool exact = false;
  std::uint64_t seed = 0;
  int budget = 0;
};

/// Exact orbit for finite groups; `budget` Haar samples g.v otherwise.
inline OrbitCloud orbit(const GroupAction& action, const Point& v, int budget, std::uint64_t seed) {
  require_dim("orbit", action.ambient_dim(), v.dim());
  if (budget <= 0) throw std::invalid_argument("orbit: budget must be positive");
  const double scale = 1.0 + v.norm();
  Mat pts;
  if (v.norm() == 0.0) {
    pts = Mat::Zero(v.dim(), 1);
  } else if (const FiniteOrthogonalGroup* g = action.finite_group()) {
    Mat all(v.dim(), static_cast<Eigen::Index>(g->order()));
    for (std::size_t i = 0; i < g->order(); ++i) all.col(static_cast<Eigen::Index>(i)) = action.act(g->elements[i], v.vec());
    pts = dedupe_columns(all, 1e-9 * scale);
  } else {
    pts.resize(v.dim(), budget);
    for (int i = 0; i < budget; ++i) pts.col(i) = action.act(action.sample_element(seed, static_cast<std::uint64_t>(i)), v.vec());
  }
  return OrbitCloud{PointCloud(std::move(pts), "orbit"), action.descriptor(), v, action.exact(), seed, budget};
}

struct OrbitDistanceOptions {
  enum class Method { automatic, sampled };
  int refine_budget = 4;    // descent restarts from the best samples
  int sample_budget = 64;   // Haar samples screened before descent
  int max_descent_steps = 400;
  std::uint64_t seed = kDefaultSeed;
  Method method = Method::automatic;
};

struct OrbitNearest {
  double distance = 0.0;
  Vec point;  // g.v closest to w
};

namespace detail {

inline OrbitNearest nearest_by_sorting(const Vec& v, const Vec& w) {
  std::vector<Eigen::Index> iv(static_cast<std::size_t>(v.size())), iw(iv.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) iv[static_cast<std::size_t>(i)] = iw[static_cast<std::size_t>(i)] = i;
  std::stable_sort(iv.begin(), iv.end(), [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
  std::stable_sort(iw.begin(), iw.end(), [&](Eigen::Index a, Eigen::Index b) { return w[a] < w[b]; });
  Vec p(v.size());
  for (std::size_t r = 0; r < iv.size(); ++r) p[iw[r]] = v[iv[r]];
  return {(p - w).norm(), p};
}

// Maximizer of tr(g^T m) over O(n) or SO(n).
inline Mat procrustes(const Mat& m, bool special) {
  const Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat u = svd.matrixU();
  if (special && (u * svd.matrixV().transpose()).determinant() < 0) u.col(u.cols() - 1) *= -1.0;
  return u * svd.matrixV().transpose();
}

inline std::optional<OrbitNearest> nearest_closed_form(const GroupAction& a, const Vec& v, const Vec& w) {
  if (!a.is_orthogonal_family()) return std::nullopt;
  const int n = a.group_dim();
  switch (a.rep()) {
    case Rep::standard: {
      if (n == 1) {
        if (a.special() || (v - w).norm() <= (v + w).norm()) return OrbitNearest{(v - w).norm(), v};
        return OrbitNearest{(v + w).norm(), -v};
      }
      const double nw = w.norm();
      const Vec p = nw > 0 ? Vec(v.norm() / nw * w) : v;
      return OrbitNearest{(p - w).norm(), p};
    }
    case Rep::diagonal: {
      const Eigen::Map<const Mat> x(v.data(), n, a.copies());
      const Eigen::Map<const Mat> y(w.data(), n, a.copies());
      const Mat g = procrustes(y * x.transpose(), a.special());
      const Vec p = a.act(g, v);
      return OrbitNearest{(p - w).norm(), p};
    }
    case Rep::conjugation: {
      const Eigen::SelfAdjointEigenSolver<Mat> ex(sym_unembed(v, n)), ey(sym_unembed(w, n));
      const Mat q = ey.eigenvectors();
      const Vec p = sym_embed(q * ex.eigenvalues().asDiagonal() * q.transpose());
      return OrbitNearest{(p - w).norm(), p};
    }
    case Rep::permutation: break;
  }
  return std::nullopt;
}

// Steepest descent of |act(g, v) - w|^2 over SO(n) (left-translated by the
// starting element), with Cayley retraction and backtracking.
inline OrbitNearest descend(const GroupAction& a, const Vec& v, const Vec& w, Mat g, int max_steps) {
  const int n = a.group_dim();
  Vec u = a.act(g, v);
  double phi = (u - w).squaredNorm();
  double step = 1.0;
  for (int it = 0; it < max_steps && n >= 2; ++it) {
    Mat grad = Mat::Zero(n, n);
    const Vec r = u - w;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Mat e = Mat::Zero(n, n);
        e(i, j) = 1.0;
        e(j, i) = -1.0;
        const double c = 2.0 * r.dot(a.infinitesimal(e, u));
        grad(i, j) = c;
        grad(j, i) = -c;
      }
    const double gnorm2 = 0.5 * grad.squaredNorm();
    if (gnorm2 <= 1e-30 * (1.0 + phi)) break;
    step = std::min(step * 2.0, 1e3);
    bool moved = false;
    const Mat g_start = g;
    while (step > 1e-16) {
      const Mat g_new = cayley(-step * grad) * g_start;
      const Vec u_new = a.act(g_new, v);
      const double phi_new = (u_new - w).squaredNorm();
      if (phi_new <= phi - 1e-4 * step * gnorm2) {
        g = g_new;
        u = u_new;
        double best = phi_new;
        while (step > 1e-16) {
          const Mat g_half = cayley(-0.5 * step * grad) * g_start;
          const Vec u_half = a.act(g_half, v);
          const double phi_half = (u_half - w).squaredNorm();
          if (!(phi_half < best)) break;
          g = g_half;
          u = u_half;
          best = phi_half;
          step *= 0.5;
        }
        phi = best;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {std::sqrt(std::max(0.0, phi)), u};
}

inline OrbitNearest nearest_sampled(const GroupAction& a, const Vec& v, const Vec& w, const OrbitDistanceOptions& opt) {
  const int screened = std::max(1, opt.sample_budget);
  std::vector<std::pair<double, int>> scored;
  scored.reserve(static_cast<std::size_t>(screened));
  std::vector<Mat> samples;
  for (int i = 0; i < screened; ++i) {
    samples.push_back(a.sample_element(opt.seed, static_cast<std::uint64_t>(i)));
    scored.emplace_back((a.act(samples.back(), v) - w).norm(), i);
  }
  std::sort(scored.begin(), scored.end());
  OrbitNearest best{scored.front().first, a.act(samples[static_cast<std::size_t>(scored.front().second)], v)};
  const int restarts = std::min(screened, std::max(0, opt.refine_budget));
  for (int r = 0; r < restarts; ++r) {
    const OrbitNearest cand = descend(a, v, w, samples[static_cast<std::size_t>(scored[static_cast<std::size_t>(r)].second)],
                                      opt.max_descent_steps);
    if (cand.distance < best.distance) best = cand;
  }
  return best;
}

}  // namespace detail

/// Closest point of the orbit of v to w, with its distance.
inline OrbitNearest orbit_nearest(const GroupAction& action, const Point& v, const Point& w,
                                  const OrbitDistanceOptions& opt = {}) {
  require_dim("orbit_distance", action.ambient_dim(), v.dim());
  require_dim("orbit_distance", action.ambient_dim(), w.dim());
  const double floor = std::abs(v.norm() - w.norm());
  OrbitNearest out;
  if (v.norm() == 0.0) {
    out = {w.norm(), v.vec()};
  } else if (action.rep() == Rep::permutation) {
    out = detail::nearest_by_sorting(v.vec(), w.vec());
  } else if (const FiniteOrthogonalGroup* g = action.finite_group()) {
    out.distance = std::numeric_limits<double>::infinity();
    for (const Mat& e : g->elements) {
      Vec p = action.act(e, v.vec());
      const double d = (p - w.vec()).norm();
      if (d < out.distance) out = {d, std::move(p)};
    }
  } else {
    std::optional<OrbitNearest> closed;
    if (opt.method == OrbitDistanceOptions::Method::automatic) closed = detail::nearest_closed_form(action, v.vec(), w.vec());
    out = closed ? *closed : detail::nearest_sampled(action, v.vec(), w.vec(), opt);
  }
  out.distance = std::max(out.distance, floor);
  return out;
}

inline double orbit_distance(const GroupAction& action, const Point& v, const Point& w,
                             const OrbitDistanceOptions& opt = {}) {
  return orbit_nearest(action, v, w, opt).distance;
}

// ---------------------------------------------------------------------------
// Fixed points, homothety, slices

/// Null space of the stacked (rho(g) - I) over generators (finite groups) or
/// sample_budget Haar samples.
inline Subspace fixed_point_subspace(const GroupAction& action, int sample_budget = 16,
                                     std::uint64_t seed = kDefaultSeed) {
  const Eigen::Index d = action.ambient_dim();
  std::vector<Mat> mats;
  if (const FiniteOrthogonalGroup* g = action.finite_group()) {
    mats = g->generators;
  } else {
    for (int i = 0; i < std::max(1, sample_budget); ++i) mats.push_back(action.sample_element(seed, static_cast<std::uint64_t>(i)));
  }
  if (mats.empty()) return Subspace::full(d);
  Mat stacked(d * static_cast<Eigen::Index>(mats.size()), d);
  for (std::size_t i = 0; i < mats.size(); ++i)
    stacked.middleRows(static_cast<Eigen::Index>(i) * d, d) = action.represent(mats[i]) - Mat::Identity(d, d);
  const Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > kTol.fixed_point_sv) ++rank;
  std::vector<Point> null;
  for (Eigen::Index i = rank; i < d; ++i) null.emplace_back(Vec(svd.matrixV().col(i)));
  if (null.empty()) return Subspace::zero(d);
  return orthonormalize(null);
}

/// Checks that scaling two points of one fiber keeps them in one fiber:
/// d(lambda v, lambda w) < lambda tol + tol for every lambda.
inline VerificationReport homothety_check(const GroupAction& action, const Point& v, const Point& w,
                                          const std::vector<double>& lambdas, double tol,
                                          const OrbitDistanceOptions& opt = {}) {
  VerificationReport r("homothety");
  const double d0 = orbit_distance(action, v, w, opt);
  r.note("base_distance", d0);
  if (!(d0 < tol)) {
    r.verdict = "not-same-fiber";
    r.check("base_distance", d0, Compare::le, tol);
    return r;
  }
  double worst = -std::numeric_limits<double>::infinity();
  double worst_lambda = 0.0;
  for (double lambda : lambdas) {
    if (!(lambda >= 0)) throw std::invalid_argument("homothety_check: lambdas must be non-negative");
    const double d = orbit_distance(action, Point(lambda * v.vec()), Point(lambda * w.vec()), opt);
    const double excess = d - (lambda * tol + tol);
    if (excess > worst) {
      worst = excess;
      worst_lambda = lambda;
    }
    r.note("distance_at_" + std::to_string(lambda), d);
  }
  if (lambdas.empty()) worst = -tol;
  r.note("worst_lambda", worst_lambda);
  r.check("worst_violation", worst, Compare::le, 0.0);
  r.verdict = r.passed() ? "homothety-holds" : "homothety-violated";
  return r;
}

struct SliceResult {
  PointCloud cloud;
  bool exact = false;
  double min_distance = 0.0;  // smallest distance from an orbit point to sigma
};

/// F ∩ Σ for an orbit F. Exact for finite groups, for diagonal matrices
/// under conjugation, and for lines under O(n)/SO(n); otherwise the orbit
/// points within slice_tol of Σ, projected onto Σ.
inline SliceResult section_slice(const GroupAction& action, const OrbitCloud& orbit_cloud, const Subspace& sigma,
                                 double slice_tol = -1.0) {
  const PointCloud& base = orbit_cloud.base;
  require_dim("section_slice", sigma.ambient_dim(), base.dim());
  const Vec& v = orbit_cloud.seed_point.vec();
  const double norm = v.norm();
  if (slice_tol < 0) slice_tol = 1e-6 * std::max(norm, 1e-300);
  const Mat& pts = base.matrix();
  double min_distance = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < pts.cols(); ++i) min_distance = std::min(min_distance, sigma.distance(pts.col(i)));

  auto finish = [&](std::vector<Vec> found, bool exact) {
    SliceResult out{PointCloud::empty(base.dim(), "slice"), exact, min_distance};
    if (found.empty()) return out;
    Mat m(base.dim(), static_cast<Eigen::Index>(found.size()));
    for (std::size_t j = 0; j < found.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = found[j];
    out.cloud = PointCloud(dedupe_columns(m, 1e-9 * (1.0 + norm)), "slice");
    out.min_distance = exact ? 0.0 : min_distance;
    return out;
  };

  if (norm == 0.0) return finish({Vec::Zero(base.dim())}, true);

  if (action.rep() == Rep::conjugation && sigma.dim() == action.group_dim()) {
    const int n = action.group_dim();
    const Subspace diag = diagonal_matrices(n);
    if ((sigma.basis() * sigma.basis().transpose() - diag.basis() * diag.basis().transpose()).cwiseAbs().maxCoeff() < 1e-12) {
      Vec lambda = Eigen::SelfAdjointEigenSolver<Mat>(sym_unembed(v, n)).eigenvalues();
      std::vector<double> vals(lambda.data(), lambda.data() + lambda.size());
      std::sort(vals.begin(), vals.end());
      std::vector<Vec> found;
      do {
        Vec p = Vec::Zero(base.dim());
        for (int i = 0; i < n; ++i) p[i] = vals[static_cast<std::size_t>(i)];
        found.push_back(p);
      } while (std::next_permutation(vals.begin(), vals.end()));
      return finish(std::move(found), true);
    }
  }
  if (action.is_orthogonal_family() && action.rep() == Rep::standard && action.group_dim() >= 2 && sigma.dim() == 1) {
    const Vec q = sigma.basis().col(0);
    return finish({norm * q, -norm * q}, true);
  }
  const double tol = action.exact() ? 1e-9 * (1.0 + norm) : slice_tol;
  std::vector<Vec> found;
  for (Eigen::Index i = 0; i < pts.cols(); ++i)
    if (sigma.distance(pts.col(i)) < tol) found.push_back(sigma.project(pts.col(i)));
  return finish(std::move(found), action.exact());
}

// ---------------------------------------------------------------------------
// Closed-form support functions of whole orbits

/// h(G.v, .) without sampling, when a closed form exists: finite groups
/// (exact orbit), O(n)/SO(n) standard, diagonal and conjugation.
inline std::optional<SupportOracle> orbit_support_oracle(const GroupAction& action, const Point& v) {
  require_dim("orbit_support_oracle", action.ambient_dim(), v.dim());
  if (action.exact()) return SupportOracle(orbit(action, v, 1, 0).base);
  const int n = action.group_dim();
  const Vec x = v.vec();
  const double radius = x.norm();
  const std::string label = "orbit-support";
  switch (action.rep()) {
    case Rep::standard:
      if (n < 2) return std::nullopt;
      return SupportOracle(action.ambient_dim(), [radius, x](const Vec& u) {
        const double nu = u.norm();
        if (nu == 0.0) return SupportValue{0.0, x};
        return SupportValue{radius * nu, Vec(radius / nu * u)};
      }, radius, label);
    case Rep::diagonal:
      return SupportOracle(action.ambient_dim(), [action, x, n](const Vec& u) {
        const Eigen::Map<const Mat> xm(x.data(), n, action.copies());
        const Eigen::Map<const Mat> um(u.data(), n, action.copies());
        const Mat g = detail::procrustes(um * xm.transpose(), action.special());
        const Vec p = action.act(g, x);
        return SupportValue{u.dot(p), p};
      }, radius, label);
    case Rep::conjugation:
      return SupportOracle(action.ambient_dim(), [x, n](const Vec& u) {
        const Eigen::SelfAdjointEigenSolver<Mat> ex(sym_unembed(x, n)), eu(sym_unembed(u, n));
        const Mat q = eu.eigenvectors();
        const Vec p = sym_embed(q * ex.eigenvalues().asDiagonal() * q.transpose());
        return SupportValue{u.dot(p), p};
      }, radius, label);
    case Rep::permutation: break;
  }
  return std::nullopt;
}

/// Support function of the orbit estimated from a sampled orbit cloud: the
/// best `refine` samples for each direction are polished by descent on the
/// group, since maximizing <g.v, u> is minimizing |g.v - |v| u/|u||.
inline SupportOracle refined_orbit_support(const GroupAction& action, const OrbitCloud& oc, int refine,
                                           int max_steps = 400) {
  require_dim("refined_orbit_support", action.ambient_dim(), oc.seed_point.dim());
  const PointCloud cloud = oc.base;
  if (oc.exact || refine <= 0) return SupportOracle(cloud);
  const Vec v = oc.seed_point.vec();
  const std::uint64_t seed = oc.seed;
  return SupportOracle(action.ambient_dim(), [action, cloud, v, seed, refine, max_steps](const Vec& u) {
    const Mat& pts = cloud.matrix();
    const Vec scores = u.transpose() * pts;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const std::size_t top = std::min(order.size(), static_cast<std::size_t>(refine));
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return scores[a] > scores[b]; });
    SupportValue best{scores[order[0]], pts.col(order[0])};
    const double nu = u.norm();
    if (nu == 0.0) return best;
    const Vec target = (v.norm() / nu) * u;
    for (std::size_t r = 0; r < top; ++r) {
      const Mat g = action.sample_element(seed, static_cast<std::uint64_t>(order[r]));
      const OrbitNearest cand = detail::descend(action, v, target, g, max_steps);
      if (u.dot(cand.point) > best.value) best = {u.dot(cand.point), cand.point};
    }
    return best;
  }, v.norm(), "refined-orbit-support");
}

}  // namespace orbitcvx

#endif  // ORBITCVX_GROUPS_HPP
