#ifndef ORBITCVX_SUBMETRY_HPP
#define ORBITCVX_SUBMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "orbitcvx/config.hpp"
#include "orbitcvx/convex.hpp"
#include "orbitcvx/geomcore.hpp"
#include "orbitcvx/groups.hpp"
#include "orbitcvx/parallel.hpp"
#include "orbitcvx/report.hpp"
#include "orbitcvx/rng.hpp"

namespace orbitcvx {

namespace detail {

// Nearest point of {y : <a_i, y> <= c} to x (c >= 0, so the origin is
// feasible). Primal active-set method for the identity-Hessian QP.
inline Vec project_polyhedron(const Mat& normals, double c, const Vec& x) {
  const Eigen::Index d = x.size();
  const Eigen::Index m = normals.cols();
  const Vec slack0 = normals.transpose() * x;
  if (m == 0 || slack0.maxCoeff() <= c) return x;
  Vec y = Vec::Zero(d);
  std::vector<Eigen::Index> active;
  const double scale = 1.0 + x.norm() + std::abs(c);
  for (int it = 0; it < 100 * static_cast<int>(m + d); ++it) {
    Mat aw(d, static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) aw.col(static_cast<Eigen::Index>(k)) = normals.col(active[k]);
    Vec p = x - y;
    if (!active.empty()) p -= aw * aw.completeOrthogonalDecomposition().solve(p);
    if (p.norm() <= 1e-13 * scale) {
      if (active.empty()) return y;
      const Vec lambda = aw.completeOrthogonalDecomposition().solve(x - y);
      Eigen::Index worst = 0;
      if (lambda.minCoeff(&worst) >= -1e-13 * scale) return y;
      active.erase(active.begin() + worst);
      continue;
    }
    double alpha = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      const double ap = normals.col(i).dot(p);
      if (ap <= 1e-15 * scale) continue;
      const double step = std::max(0.0, c - normals.col(i).dot(y)) / ap;
      if (step < alpha) {
        alpha = step;
        blocking = i;
      }
    }
    y += alpha * p;
    if (blocking >= 0) active.push_back(blocking);
  }
  throw std::runtime_error("project_polyhedron: active-set iteration limit reached");
}

}  // namespace detail

/// A closed saturated set given at the quotient level: an interval of norms,
/// a finite union of fibers, or a sublevel set {x : h(G.w, x) <= level} of
/// the support function of an orbit.
class SaturatedSet {
 public:
  enum class Kind { radial, fibers, sublevel };

  static SaturatedSet radial(GroupAction action, double lo, double hi) {
    if (!(lo >= 0) || !(hi >= lo) || !std::isfinite(hi))
      throw std::invalid_argument("SaturatedSet::radial: need 0 <= lo <= hi < inf");
    SaturatedSet s(std::move(action), Kind::radial);
    s.lo_ = lo;
    s.hi_ = hi;
    return s;
  }

  static SaturatedSet fibers(GroupAction action, std::vector<Point> reps) {
    if (reps.empty()) throw std::invalid_argument("SaturatedSet::fibers: empty representative list");
    for (const Point& r : reps) require_dim("SaturatedSet::fibers", action.ambient_dim(), r.dim());
    SaturatedSet s(std::move(action), Kind::fibers);
    s.reps_ = std::move(reps);
    return s;
  }

  static SaturatedSet sublevel(GroupAction action, Point orbit_point, double level) {
    require_dim("SaturatedSet::sublevel", action.ambient_dim(), orbit_point.dim());
    if (!(level > 0)) throw std::invalid_argument("SaturatedSet::sublevel: level must be positive");
    const bool round = action.is_orthogonal_family() && action.rep() == Rep::standard && action.group_dim() >= 2;
    if (!action.exact() && !round)
      throw std::invalid_argument("SaturatedSet::sublevel: needs a finite group or O(n)/SO(n) in the standard representation");
    SaturatedSet s(std::move(action), Kind::sublevel);
    s.level_ = level;
    if (round) {
      s.lo_ = 0.0;
      s.hi_ = orbit_point.norm() > 0 ? level / orbit_point.norm() : std::numeric_limits<double>::infinity();
    } else {
      s.normals_ = orbit(s.action_, orbit_point, 1, 0).base.matrix();
    }
    s.reps_.push_back(std::move(orbit_point));
    return s;
  }

  Kind kind() const { return kind_; }
  const GroupAction& action() const { return action_; }
  Eigen::Index dim() const { return action_.ambient_dim(); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double level() const { return level_; }
  const std::vector<Point>& reps() const { return reps_; }
  /// Orbit points whose support function defines a polyhedral sublevel set.
  const Mat& normals() const { return normals_; }
  bool round_sublevel() const { return kind_ == Kind::sublevel && normals_.cols() == 0; }

  /// Characteristic size used for default probe balls and margins.
  double scale() const {
    double s = 0.0;
    switch (kind_) {
      case Kind::radial: s = hi_; break;
      case Kind::fibers:
        for (const Point& r : reps_) s = std::max(s, r.norm());
        break;
      case Kind::sublevel: {
        const double w = reps_.front().norm();
        s = std::isfinite(hi_) && round_sublevel() ? hi_ : std::max(w, w > 0 ? level_ / w : level_);
        break;
      }
    }
    return s > 0 ? s : 1.0;
  }

  /// A point of the preimage, drawn from a seeded stream.
  Vec sample_preimage(Rng& rng) const {
    switch (kind_) {
      case Kind::radial: return rng.uniform(lo_, hi_) * rng.unit_vector(dim());
      case Kind::fibers: {
        const Point& r = reps_[rng.index_below(reps_.size())];
        return action_.act(action_.sample_element(rng.next(), 0), r.vec());
      }
      case Kind::sublevel: {
        const Vec y = rng.in_ball(dim(), 2.0 * scale());
        if (round_sublevel()) return std::isfinite(hi_) && y.norm() > hi_ ? Vec(hi_ / y.norm() * y) : y;
        return detail::project_polyhedron(normals_, level_, y);
      }
    }
    return Vec::Zero(dim());
  }

  nlohmann::json descriptor() const {
    nlohmann::json j;
    switch (kind_) {
      case Kind::radial:
        j["kind"] = "radial";
        j["interval"] = {lo_, hi_};
        break;
      case Kind::fibers: {
        j["kind"] = "fibers";
        nlohmann::json reps = nlohmann::json::array();
        for (const Point& r : reps_) reps.push_back(std::vector<double>(r.vec().data(), r.vec().data() + r.dim()));
        j["reps"] = reps;
        break;
      }
      case Kind::sublevel:
        j["kind"] = "basic-sublevel";
        j["function"] = "support-of-orbit";
        j["point"] = std::vector<double>(reps_.front().vec().data(), reps_.front().vec().data() + dim());
        j["level"] = level_;
        break;
    }
    j["action"] = action_.descriptor();
    return j;
  }

 private:
  SaturatedSet(GroupAction action, Kind kind) : action_(std::move(action)), kind_(kind) {}

  GroupAction action_;
  Kind kind_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double level_ = 0.0;
  std::vector<Point> reps_;
  Mat normals_;
};

/// Builds a set from {"kind":"radial","interval":[a,b]},
/// {"kind":"fibers","reps":[[...],...]} or
/// {"kind":"basic-sublevel","function":"support-of-orbit","point":[...],"level":c}.
inline SaturatedSet make_saturated_set(const GroupAction& action, const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("set: descriptor must be an object with a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  auto check_keys = [&](std::vector<std::string> allowed) {
    allowed.push_back("kind");
    allowed.push_back("action");
    for (const auto& [key, value] : j.items())
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        throw ConfigError("set: unknown key \"" + key + "\" for kind " + kind);
  };
  auto point_of = [&](const nlohmann::json& p) {
    if (!p.is_array()) throw ConfigError("set: points must be arrays of numbers");
    Vec v(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) v[static_cast<Eigen::Index>(i)] = p[i].get<double>();
    return Point(v);
  };
  try {
    if (kind == "radial") {
      check_keys({"interval"});
      const auto& iv = j.at("interval");
      if (!iv.is_array() || iv.size() != 2) throw ConfigError("set: radial interval must be [lo, hi]");
      return SaturatedSet::radial(action, iv[0].get<double>(), iv[1].get<double>());
    }
    if (kind == "fibers") {
      check_keys({"reps"});
      std::vector<Point> reps;
      for (const auto& p : j.at("reps")) reps.push_back(point_of(p));
      return SaturatedSet::fibers(action, std::move(reps));
    }
    if (kind == "basic-sublevel") {
      check_keys({"function", "point", "level"});
      if (j.value("function", std::string("support-of-orbit")) != "support-of-orbit")
        throw ConfigError("set: only the support-of-orbit function is available");
      return SaturatedSet::sublevel(action, point_of(j.at("point")), j.at("level").get<double>());
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("set: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("set: ") + e.what());
  }
  throw ConfigError("set: unknown kind \"" + kind + "\"");
}

/// Nearest point of the preimage of S to x, with its distance.
inline OrbitNearest nearest_in_saturated(const SaturatedSet& s, const Point& x, const OrbitDistanceOptions& opt = {}) {
  require_dim("distance_to_saturated", s.dim(), x.dim());
  const auto radial = [&](double lo, double hi) -> OrbitNearest {
    const double r = x.norm();
    if (r >= lo && r <= hi) return {0.0, x.vec()};
    const double target = r < lo ? lo : hi;
    const Vec dir = r > 0 ? Vec(x.vec() / r) : Vec(Vec::Unit(x.dim(), 0));
    return {std::abs(r - target), target * dir};
  };
  switch (s.kind()) {
    case SaturatedSet::Kind::radial: return radial(s.lo(), s.hi());
    case SaturatedSet::Kind::fibers: {
      OrbitNearest best{std::numeric_limits<double>::infinity(), Vec()};
      for (const Point& r : s.reps()) {
        OrbitNearest cand = orbit_nearest(s.action(), r, x, opt);
        if (cand.distance < best.distance) best = std::move(cand);
      }
      return best;
    }
    case SaturatedSet::Kind::sublevel: {
      if (s.round_sublevel()) return radial(0.0, s.hi());
      const Vec p = detail::project_polyhedron(s.normals(), s.level(), x.vec());
      return {(p - x.vec()).norm(), p};
    }
  }
  return {0.0, x.vec()};
}

inline double distance_to_saturated(const SaturatedSet& s, const Point& x, const OrbitDistanceOptions& opt = {}) {
  return nearest_in_saturated(s, x, opt).distance;
}

/// Membership of x in the preimage of S, up to tol.
inline bool in_saturated(const SaturatedSet& s, const Point& x, double tol, const OrbitDistanceOptions& opt = {}) {
  return distance_to_saturated(s, x, opt) <= tol;
}

// ---------------------------------------------------------------------------
// Ascending slope

struct SlopeEstimate {
  Point base_point{0.0};
  double base_value = 0.0;  // f(x)
  std::vector<double> radii;
  std::vector<double> per_radius_sup;
  double extrapolated = 0.0;  // raw lim sup estimate
  double clamped = 0.0;       // max(0, extrapolated)
  int sample_budget = 0;
  int skipped = 0;  // samples whose quotient distance to x vanished
  std::uint64_t seed = 0;
};

inline std::vector<double> default_radii(double f) { return {1e-1 * f, 1e-2 * f, 1e-3 * f}; }

/// Estimates lim sup (f(y) - f(x)) / d(y, x) for f the distance to S, with
/// d the quotient distance. Each radius uses per_radius_budget uniform
/// directions plus the direction pointing away from the nearest point of S.
inline SlopeEstimate ascending_slope(const SaturatedSet& s, const Point& x, std::vector<double> radii,
                                     int per_radius_budget, std::uint64_t seed, const OrbitDistanceOptions& opt = {}) {
  const OrbitNearest near = nearest_in_saturated(s, x, opt);
  const double f = near.distance;
  if (radii.empty()) radii = default_radii(f);
  std::sort(radii.begin(), radii.end(), std::greater<>());
  if (!(radii.back() > 0)) throw std::invalid_argument("ascending_slope: radii must be positive");
  if (!(f > radii.back()))
    throw std::invalid_argument("ascending_slope: x must lie outside S by more than the smallest radius (distance " +
                                std::to_string(f) + ", smallest radius " + std::to_string(radii.back()) + ")");
  if (per_radius_budget < 0) throw std::invalid_argument("ascending_slope: negative budget");

  SlopeEstimate est;
  est.base_point = x;
  est.base_value = f;
  est.radii = radii;
  est.sample_budget = per_radius_budget;
  est.seed = seed;
  const Vec ascent = (x.vec() - near.point) / f;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    double best = -std::numeric_limits<double>::infinity();
    for (int i = -1; i < per_radius_budget; ++i) {
      Vec dir;
      if (i < 0) {
        dir = ascent;
      } else {
        Rng rng(seed, static_cast<std::uint64_t>(k) * 1000003ULL + static_cast<std::uint64_t>(i), /*salt=*/0x51);
        dir = rng.unit_vector(x.dim());
      }
      const Point y(x.vec() + r * dir);
      const double dq = orbit_distance(s.action(), y, x, opt);
      if (dq <= 1e-3 * r) {
        ++est.skipped;
        continue;
      }
      best = std::max(best, (distance_to_saturated(s, y, opt) - f) / dq);
    }
    est.per_radius_sup.push_back(best);
  }
  const std::size_t n = est.per_radius_sup.size();
  double raw = est.per_radius_sup[n - 1];
  if (n >= 2) raw = std::max(raw, est.per_radius_sup[n - 2]);
  est.extrapolated = std::clamp(raw, -1.0, 1.0);
  est.clamped = std::max(0.0, est.extrapolated);
  return est;
}

// ---------------------------------------------------------------------------
// Convexity detection

struct DetectConfig {
  int probe_budget = 200;
  std::vector<double> radii;  // relative to f(x); empty means {1e-1, 1e-2, 1e-3}
  int per_radius_budget = 32;
  double tol = 0.02;
  double ball_radius = 0.0;  // <= 0: twice the set's scale
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
  OrbitDistanceOptions distance;
};

namespace detail {

inline nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(json_number(v[i]));
  return a;
}

struct Probe {
  Vec x;
  std::string origin;
};

// Probe points outside S and inside the ball: orbit centroids and the
// origin (fixed points), midpoints of preimage pairs, points near the
// preimage, then uniform points.
inline std::vector<Probe> detect_probes(const SaturatedSet& s, const DetectConfig& cfg, double radius, double margin) {
  std::vector<Probe> probes;
  const std::size_t budget = static_cast<std::size_t>(std::max(0, cfg.probe_budget));
  auto add = [&](Vec x, const char* origin) {
    if (probes.size() >= budget || x.norm() > radius) return;
    if (distance_to_saturated(s, Point(x), cfg.distance) > margin) probes.push_back({std::move(x), origin});
  };

  Rng pre(cfg.seed, 0, /*salt=*/0x71);
  std::vector<Vec> samples;
  for (int i = 0; i < 32; ++i) samples.push_back(s.sample_preimage(pre));
  std::vector<double> nn;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < samples.size(); ++j)
      if (i != j) best = std::min(best, (samples[i] - samples[j]).norm());
    nn.push_back(best);
  }
  std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2), nn.end());
  double gap = nn[nn.size() / 2];
  if (!(gap > 1e-9 * s.scale())) gap = 0.1 * s.scale();

  add(Vec::Zero(s.dim()), "fixed");
  const Subspace v0 = fixed_point_subspace(s.action(), 16, cfg.seed);
  if (v0.dim() > 0)
    for (std::size_t i = 0; i < 8; ++i) add(v0.project(samples[i]), "fixed");

  const std::size_t fixed_count = probes.size();
  const std::size_t near_quota = fixed_count + (budget - std::min(budget, fixed_count)) / 2;
  Rng rng(cfg.seed, 1, /*salt=*/0x72);
  for (std::size_t attempt = 0; probes.size() < near_quota && attempt < 50 * budget; ++attempt) {
    const Vec p = s.sample_preimage(rng);
    if (attempt % 2 == 0) {
      add(0.5 * (p + s.sample_preimage(rng)), "midpoint");
    } else {
      add(p + rng.uniform(0.0, 2.0 * gap) * rng.unit_vector(s.dim()), "near");
    }
  }
  for (std::size_t attempt = 0; probes.size() < budget && attempt < 100 * budget; ++attempt)
    add(rng.in_ball(s.dim(), radius), "uniform");
  return probes;
}

}  // namespace detail

/// Monte-Carlo test of the slope criterion: S has convex preimage iff the
/// raw ascending slope of the distance function equals 1 off S.
inline VerificationReport convexity_detect(const SaturatedSet& s, const DetectConfig& cfg) {
  VerificationReport r("convexity-detect");
  r.budgets["probes"] = cfg.probe_budget;
  r.budgets["per_radius"] = cfg.per_radius_budget;
  r.seeds["probes"] = cfg.seed;
  const double radius = cfg.ball_radius > 0 ? cfg.ball_radius : 2.0 * s.scale();
  const double margin = 1e-9 * s.scale();
  r.note("ball_radius", radius);
  r.note("tol", cfg.tol);
  const std::vector<detail::Probe> probes = detail::detect_probes(s, cfg, radius, margin);
  r.note("probe_count", static_cast<double>(probes.size()));
  if (probes.empty()) {
    r.verdict = "no-probe-points";
    r.check("probe_count", 0.0, Compare::ge, 1.0);
    return r;
  }

  std::vector<SlopeEstimate> est(probes.size());
  parallel_for(probes.size(), cfg.jobs, [&](std::size_t i) {
    const double f = distance_to_saturated(s, Point(probes[i].x), cfg.distance);
    std::vector<double> radii = cfg.radii.empty() ? default_radii(f) : cfg.radii;
    if (!cfg.radii.empty())
      for (double& rr : radii) rr *= f;
    est[i] = ascending_slope(s, Point(probes[i].x), radii, cfg.per_radius_budget, mix64(cfg.seed + i), cfg.distance);
  });

  std::size_t witness = 0;
  double max_sup = -std::numeric_limits<double>::infinity();
  double min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (est[i].extrapolated < est[witness].extrapolated) witness = i;
    for (double v : est[i].per_radius_sup) max_sup = std::max(max_sup, v);
    min_margin = std::min(min_margin, est[i].base_value);
  }
  const SlopeEstimate& w = est[witness];
  r.note("min_probe_distance", min_margin);
  r.note("min_clamped_slope", w.clamped);
  r.check("max_per_radius_sup", max_sup, Compare::le, 1.0 + 1e-9);
  r.check("min_raw_slope", w.extrapolated, Compare::ge, 1.0 - cfg.tol);
  r.details["witness"] = {{"point", detail::vec_json(w.base_point.vec())},
                          {"distance", json_number(w.base_value)},
                          {"raw_slope", json_number(w.extrapolated)},
                          {"probe_class", probes[witness].origin}};
  r.details["set"] = s.descriptor();
  r.verdict = w.extrapolated < 1.0 - cfg.tol ? "nonconvex-witness" : "consistent-with-convex";
  return r;
}

/// Independent ground truth: a midpoint of two preimage points that lies
/// off the preimage certifies nonconvexity.
inline VerificationReport midpoint_convexity_oracle(const SaturatedSet& s, int pair_budget, double tol, std::uint64_t seed,
                                                    const OrbitDistanceOptions& opt = {}) {
  VerificationReport r("midpoint-oracle");
  r.budgets["pairs"] = pair_budget;
  r.seeds["pairs"] = seed;
  double worst = 0.0;
  Vec wp, wq;
  for (int i = 0; i < pair_budget; ++i) {
    Rng rng(seed, static_cast<std::uint64_t>(i), /*salt=*/0x81);
    const Vec p = s.sample_preimage(rng);
    const Vec q = s.sample_preimage(rng);
    const double d = distance_to_saturated(s, Point(0.5 * (p + q)), opt);
    if (d > worst) {
      worst = d;
      wp = p;
      wq = q;
    }
  }
  r.check("max_midpoint_distance", worst, Compare::le, tol);
  if (worst > tol) {
    r.verdict = "nonconvex-certificate";
    r.details["certificate"] = {{"p", detail::vec_json(wp)},
                                {"q", detail::vec_json(wq)},
                                {"midpoint", detail::vec_json(0.5 * (wp + wq))},
                                {"distance", json_number(worst)}};
  } else {
    r.verdict = "no-violation-found";
  }
  return r;
}

// ---------------------------------------------------------------------------
// Basic functions

struct BasicCheckConfig {
  int test_pairs = 1000;
  double tol = 1e-8;             // |h(F, v) - h(F, g v)|
  double formula_tol = 1e-3;     // radial formula vs. direct support
  int formula_points = 5;
  int grid_size = 64;
  double membership_tol = 1e-9;
  std::uint64_t seed = kDefaultSeed;
};

/// Support functions of orbits are constant on orbits; hull membership is
/// orbit-invariant; and h(F, v) = r sup_t (t - d(v, (t/r) F)).
inline VerificationReport basic_function_check(const GroupAction& action, const OrbitCloud& f, const BasicCheckConfig& cfg) {
  require_dim("basic_function_check", action.ambient_dim(), f.base.dim());
  VerificationReport r("basic-function");
  r.budgets["pairs"] = cfg.test_pairs;
  r.budgets["orbit"] = f.budget;
  r.seeds["pairs"] = cfg.seed;
  const SupportOracle h(f.base);
  const double radius = f.seed_point.norm();
  const Eigen::Index d = action.ambient_dim();

  double max_gap = 0.0;
  int disagreements = 0;
  for (int i = 0; i < cfg.test_pairs; ++i) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(i), /*salt=*/0x91);
    const Vec v = rng.in_ball(d, 1.5 * (radius > 0 ? radius : 1.0));
    const Vec gv = action.act(action.sample_element(cfg.seed ^ 0xb5, static_cast<std::uint64_t>(i)), v);
    max_gap = std::max(max_gap, std::abs(h(v).value - h(gv).value));
    if (f.exact) {
      const bool a = conv_membership(h, Point(v), cfg.membership_tol, 5000).inside;
      const bool b = conv_membership(h, Point(gv), cfg.membership_tol, 5000).inside;
      if (a != b) ++disagreements;
    }
  }
  r.check("max_support_gap", max_gap, Compare::le, cfg.tol, /*sampled=*/!f.exact);
  if (f.exact) r.check("membership_disagreements", disagreements, Compare::eq, 0.0);

  double formula_gap = 0.0;
  if (radius > 0) {
    for (int i = 0; i < cfg.formula_points; ++i) {
      Rng rng(cfg.seed, static_cast<std::uint64_t>(i), /*salt=*/0x92);
      const Vec v = rng.gaussian(d) * radius;
      const double nv = v.norm();
      const double target = 0.5 * cfg.formula_tol;
      const double t_max = nv + radius * nv * nv / (2.0 * target) + radius;
      const std::vector<double> grid = geometric_grid(1e-3 * (radius + nv), t_max, cfg.grid_size);
      double best = -std::numeric_limits<double>::infinity();
      for (double t : grid) {
        const Point scaled(t / radius * f.seed_point.vec());
        best = std::max(best, t - orbit_distance(action, scaled, Point(v)));
      }
      formula_gap = std::max(formula_gap, std::abs(radius * best - h(v).value));
      r.note("formula_t_max_" + std::to_string(i), t_max);
    }
  }
  r.check("radial_formula_gap", formula_gap, Compare::le, cfg.formula_tol, /*sampled=*/!f.exact);
  r.verdict = r.passed() ? "basic" : "not-basic";
  return r;
}

}  // namespace orbitcvx

#endif  // ORBITCVX_SUBMETRY_HPP
