#ifndef ORBITCVX_SCENARIOS_HPP
#define ORBITCVX_SCENARIOS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
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
#include "orbitcvx/submetry.hpp"

namespace orbitcvx {

namespace detail {

inline Table cloud_table(std::string name, const Mat& pts, const std::string& prefix = "x") {
  Table t{std::move(name), {}, {}};
  for (Eigen::Index i = 0; i < pts.rows(); ++i) t.columns.push_back(prefix + std::to_string(i));
  for (Eigen::Index j = 0; j < pts.cols(); ++j)
    t.rows.emplace_back(pts.col(j).data(), pts.col(j).data() + pts.rows());
  return t;
}

inline Mat sigma_coords(const Subspace& sigma, const Mat& pts) { return sigma.basis().transpose() * pts; }

// All distinct coordinate permutations of a vector.
inline Mat permutations_of(const Vec& v) {
  std::vector<double> vals(v.data(), v.data() + v.size());
  std::sort(vals.begin(), vals.end());
  std::vector<Vec> out;
  do {
    out.push_back(Eigen::Map<const Vec>(vals.data(), v.size()));
  } while (std::next_permutation(vals.begin(), vals.end()));
  Mat m(v.size(), static_cast<Eigen::Index>(out.size()));
  for (std::size_t j = 0; j < out.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = out[j];
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Schur-Horn

struct SchurHornConfig {
  int n = 3;
  std::vector<double> eigenvalues{3.0, 2.0, 1.0};
  int orbit_budget = 20000;
  int direction_budget = 500;
  double tol = 0.05;             // Hausdorff gap, sampled
  double inclusion_tol = 1e-8;   // pointwise permutohedron membership
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
};

/// Diagonals of the SO(n) conjugation orbit of diag(lambda) against the
/// permutohedron conv(S_n . lambda).
inline VerificationReport scenario_schur_horn(const SchurHornConfig& cfg) {
  if (cfg.n < 2 || cfg.n > 5) throw ConfigError("schur-horn: n must be between 2 and 5");
  if (static_cast<int>(cfg.eigenvalues.size()) != cfg.n)
    throw ConfigError("schur-horn: expected " + std::to_string(cfg.n) + " eigenvalues");
  VerificationReport r("schur-horn");
  r.budgets["orbit"] = cfg.orbit_budget;
  r.budgets["directions"] = cfg.direction_budget;
  r.seeds["orbit"] = cfg.seed;
  r.note("tol", cfg.tol);
  r.note("inclusion_tol", cfg.inclusion_tol);

  const GroupAction action = GroupAction::compact(CompactGroupSampler(Family::SO, cfg.n, cfg.seed), Rep::conjugation);
  const Vec lambda = Eigen::Map<const Vec>(cfg.eigenvalues.data(), cfg.n);
  const Point v(sym_embed(lambda.asDiagonal().toDenseMatrix()));
  const OrbitCloud oc = orbit(action, v, cfg.orbit_budget, cfg.seed);
  const Subspace sigma = diagonal_matrices(cfg.n);
  const Mat diagonals = detail::sigma_coords(sigma, oc.base.matrix());
  const PointCloud weyl(dedupe_columns(detail::permutations_of(lambda), 1e-12), "weyl-orbit");
  const SupportOracle weyl_oracle(weyl);
  r.note("weyl_vertices", static_cast<double>(weyl.size()));

  std::vector<double> dist(static_cast<std::size_t>(diagonals.cols()));
  parallel_for(dist.size(), cfg.jobs, [&](std::size_t i) {
    dist[i] = conv_membership(weyl_oracle, Point(diagonals.col(static_cast<Eigen::Index>(i))), cfg.inclusion_tol, 10000).distance;
  });
  const double worst = dist.empty() ? 0.0 : *std::max_element(dist.begin(), dist.end());
  const auto violations = std::count_if(dist.begin(), dist.end(), [&](double d) { return d > cfg.inclusion_tol; });
  r.note("max_inclusion_distance", worst);
  r.check("inclusion_violations", static_cast<double>(violations), Compare::eq, 0.0);

  const PointCloud projected(dedupe_columns(diagonals, 1e-12), "projected-diagonals");
  const double gap = hull_hausdorff(SupportOracle(projected), weyl_oracle, cfg.direction_budget, cfg.seed ^ 0xd1);
  r.check("hausdorff_gap", gap, Compare::le, cfg.tol, /*sampled=*/true);

  r.tables.push_back(detail::cloud_table("projected", diagonals, "d"));
  r.tables.push_back(detail::cloud_table("weyl", weyl.matrix(), "d"));
  if (r.status() == Status::pass) r.verdict = "projection-equals-permutohedron";
  else if (r.status() == Status::unconverged) r.verdict = "budget-too-small";
  else r.verdict = "inclusion-violated";
  return r;
}

// ---------------------------------------------------------------------------
// Fat sections: O(n) acting diagonally on (R^n)^k, section (R^k)^k.

struct FatSectionSetup {
  int n = 0;
  int k = 0;
  GroupAction big;      // O(n) on R^{nk}
  GroupAction reduced;  // O(k) on R^{k^2}
  Subspace sigma;       // (R^k)^k inside (R^n)^k
};

inline FatSectionSetup fat_section_setup(int n, int k, std::uint64_t seed) {
  if (k < 1 || k > n - 1) throw ConfigError("fat-section: need 1 <= k <= n - 1");
  std::vector<Eigen::Index> idx;
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i) idx.push_back(static_cast<Eigen::Index>(j) * n + i);
  return {n, k, GroupAction::compact(CompactGroupSampler(Family::O, n, seed), Rep::diagonal, k),
          GroupAction::compact(CompactGroupSampler(Family::O, k, seed ^ 0x5a), Rep::diagonal, k),
          Subspace::coordinate(static_cast<Eigen::Index>(n) * k, idx)};
}

/// Random point of the section whose k blocks are pairwise independent
/// (sine of every pairwise angle above 1e-6), scaled to unit norm.
inline Vec generic_section_point(int k, std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(seed, attempt, /*salt=*/0xa1);
    Mat x = rng.gaussian(k, k);
    bool ok = true;
    for (int a = 0; a < k && ok; ++a)
      for (int b = a + 1; b < k && ok; ++b) {
        const double c = x.col(a).normalized().dot(x.col(b).normalized());
        ok = std::sqrt(std::max(0.0, 1.0 - c * c)) > 1e-6;
      }
    if (ok) return Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(k) * k) / x.norm();
  }
}

struct FatSectionConfig {
  int n = 4;
  int k = 3;
  std::vector<double> v;  // empty: generic; length k^2 (section coords) or n k (ambient)
  int orbit_budget = 20000;
  int direction_budget = 500;
  int pairs = 100;
  int support_refine = 3;  // samples polished by group descent per direction
  double hull_tol = 0.05;
  double inclusion_tol = 1e-6;
  double isometry_tol = 1e-3;
  int membership_iterations = 2000;
  OrbitDistanceOptions distance{8, 256, 600};
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
};

inline VerificationReport scenario_fat_section(const FatSectionConfig& cfg) {
  const FatSectionSetup fs = fat_section_setup(cfg.n, cfg.k, cfg.seed);
  const Eigen::Index kk = static_cast<Eigen::Index>(cfg.k) * cfg.k;
  Vec vs;
  if (cfg.v.empty()) {
    vs = generic_section_point(cfg.k, cfg.seed);
  } else if (static_cast<Eigen::Index>(cfg.v.size()) == kk) {
    vs = Eigen::Map<const Vec>(cfg.v.data(), kk);
  } else if (static_cast<Eigen::Index>(cfg.v.size()) == fs.big.ambient_dim()) {
    const Vec amb = Eigen::Map<const Vec>(cfg.v.data(), fs.big.ambient_dim());
    if (fs.sigma.distance(amb) > 1e-12 * (1.0 + amb.norm())) throw ConfigError("fat-section: v is not in the section");
    vs = fs.sigma.coords(amb);
  } else {
    throw ConfigError("fat-section: v must have k^2 or n k entries");
  }
  const Point v(fs.sigma.embed(vs));
  const Point v_sigma(vs);

  VerificationReport r("fat-section");
  r.budgets["orbit"] = cfg.orbit_budget;
  r.budgets["directions"] = cfg.direction_budget;
  r.budgets["pairs"] = cfg.pairs;
  r.budgets["refine"] = cfg.distance.refine_budget;
  r.seeds["orbit"] = cfg.seed;
  r.note("n", cfg.n);
  r.note("k", cfg.k);
  r.note("seed_norm", v.norm());
  r.details["v_section"] = detail::vec_json(vs);

  // F sampled in V; F ∩ Σ is the reduced orbit, whose hull has a closed-form support.
  const OrbitCloud big_orbit = orbit(fs.big, v, cfg.orbit_budget, cfg.seed);
  const Mat projected = detail::sigma_coords(fs.sigma, big_orbit.base.matrix());
  const SupportOracle slice_exact = *orbit_support_oracle(fs.reduced, v_sigma);
  const OrbitCloud slice_samples = orbit(fs.reduced, v_sigma, cfg.orbit_budget, cfg.seed ^ 0x77);

  // (i) pi_Σ(F) ⊂ conv(F ∩ Σ), pointwise.
  std::vector<double> dist(static_cast<std::size_t>(projected.cols()));
  std::vector<int> converged(dist.size());
  parallel_for(dist.size(), cfg.jobs, [&](std::size_t i) {
    const MembershipResult m = conv_membership(slice_exact, Point(projected.col(static_cast<Eigen::Index>(i))),
                                               cfg.inclusion_tol, cfg.membership_iterations);
    dist[i] = m.distance;
    converged[i] = m.converged ? 1 : 0;
  });
  const auto violations = std::count_if(dist.begin(), dist.end(), [&](double d) { return d > cfg.inclusion_tol; });
  r.note("max_inclusion_distance", dist.empty() ? 0.0 : *std::max_element(dist.begin(), dist.end()));
  r.note("membership_unconverged", static_cast<double>(std::count(converged.begin(), converged.end(), 0)));
  r.check("inclusion_violations", static_cast<double>(violations), Compare::eq, 0.0);

  // (ii) Support comparisons inside Σ.
  // Support of pi_Σ(F) in direction u ∈ Σ is the support of F in direction u.
  const SupportOracle raw_proj(PointCloud(projected, "projected-orbit"));
  const SupportOracle refined = refined_orbit_support(fs.big, big_orbit, cfg.support_refine);
  const SupportOracle proj_oracle(cfg.k * cfg.k, [&fs, refined](const Vec& u) {
    const SupportValue s = refined(fs.sigma.embed(u));
    return SupportValue{s.value, fs.sigma.coords(s.argmax)};
  }, v.norm(), "projected-orbit-refined");
  const SupportOracle slice_raw(slice_samples.base);
  const SupportOracle slice_oracle = refined_orbit_support(fs.reduced, slice_samples, cfg.support_refine);
  r.budgets["support_refine"] = cfg.support_refine;
  r.note("hausdorff_raw_samples", hull_hausdorff(raw_proj, slice_raw, cfg.direction_budget, cfg.seed ^ 0xd2));
  r.note("hausdorff_raw_projection_vs_slice_hull", hull_hausdorff(raw_proj, slice_exact, cfg.direction_budget, cfg.seed ^ 0xd2));
  const double gap_sampled = hull_hausdorff(proj_oracle, slice_oracle, cfg.direction_budget, cfg.seed ^ 0xd2);
  const double gap_exact = hull_hausdorff(proj_oracle, slice_exact, cfg.direction_budget, cfg.seed ^ 0xd2);
  r.check("hausdorff_projection_vs_slice_samples", gap_sampled, Compare::le, cfg.hull_tol, /*sampled=*/true);
  r.check("hausdorff_projection_vs_slice_hull", gap_exact, Compare::le, cfg.hull_tol, /*sampled=*/true);

  // (iii) Quotient isometry: d_G = d_H on Σ.
  double worst = 0.0, worst_closed = 0.0;
  std::vector<double> gaps(static_cast<std::size_t>(cfg.pairs)), closed(gaps.size());
  parallel_for(gaps.size(), cfg.jobs, [&](std::size_t i) {
    Rng rng(cfg.seed, i, /*salt=*/0xa2);
    const Vec a = rng.gaussian(kk), b = rng.gaussian(kk);
    OrbitDistanceOptions opt = cfg.distance;
    opt.method = OrbitDistanceOptions::Method::sampled;
    opt.seed = mix64(cfg.seed + i);
    const double dg = orbit_distance(fs.big, Point(fs.sigma.embed(a)), Point(fs.sigma.embed(b)), opt);
    const double dh = orbit_distance(fs.reduced, Point(a), Point(b), opt);
    gaps[i] = std::abs(dg - dh);
    closed[i] = std::abs(orbit_distance(fs.big, Point(fs.sigma.embed(a)), Point(fs.sigma.embed(b))) -
                         orbit_distance(fs.reduced, Point(a), Point(b)));
  });
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    worst = std::max(worst, gaps[i]);
    worst_closed = std::max(worst_closed, closed[i]);
  }
  r.check("quotient_isometry_gap", worst, Compare::le, cfg.isometry_tol, /*sampled=*/true);
  r.check("quotient_isometry_gap_closed_form", worst_closed, Compare::le, kTol.exact_assertion);

  r.tables.push_back(detail::cloud_table("projected", projected, "s"));
  if (r.status() == Status::pass) r.verdict = "fat-section-identities-hold";
  else if (r.status() == Status::unconverged) r.verdict = "budget-too-small";
  else r.verdict = "fat-section-identity-violated";
  return r;
}

// ---------------------------------------------------------------------------
// Orbitope gap

struct OrbitopeGapConfig {
  int n = 4;
  int k = 3;
  std::vector<double> v;  // empty: generic point of the section (k^2 coords)
  int orbit_budget = 4000;
  int base_points = 4;     // where the local dimension of pi_Σ(G v) is measured
  int patch_samples = 60;
  double patch_radius = 1e-5;
  double local_rel_tol = 1e-4;
  double global_rel_tol = 1e-9;
  std::uint64_t seed = kDefaultSeed;
};

namespace detail {

// Local dimension of the image of g -> pi_Σ(g v) near a few Haar points:
// affine rank of small Cayley-chart patches.
inline int local_projected_dimension(const FatSectionSetup& fs, const Vec& v, int base_points, int patch_samples,
                                     double radius, double rel_tol, std::uint64_t seed) {
  int best = 0;
  const int n = fs.n;
  for (int b = 0; b < base_points; ++b) {
    const Mat g0 = fs.big.sample_element(seed ^ 0xb0, static_cast<std::uint64_t>(b));
    Mat patch(fs.sigma.dim(), patch_samples + 1);
    patch.col(0) = fs.sigma.coords(fs.big.act(g0, v));
    for (int s = 0; s < patch_samples; ++s) {
      Rng rng(seed, static_cast<std::uint64_t>(b) * 100003ULL + static_cast<std::uint64_t>(s), /*salt=*/0xb1);
      Mat a = rng.gaussian(n, n);
      a = (0.5 * (a - a.transpose())).eval();
      a *= radius / a.norm();
      patch.col(s + 1) = fs.sigma.coords(fs.big.act(cayley(a) * g0, v));
    }
    best = std::max(best, affine_dimension(PointCloud(patch, "patch"), rel_tol));
  }
  return best;
}

}  // namespace detail

inline VerificationReport scenario_orbitope_gap(const OrbitopeGapConfig& cfg) {
  if (!(3 * cfg.k > 2 * cfg.n - 1)) throw ConfigError("orbitope-gap: hypothesis k > (2n - 1)/3 violated");
  const FatSectionSetup fs = fat_section_setup(cfg.n, cfg.k, cfg.seed);
  const Eigen::Index kk = static_cast<Eigen::Index>(cfg.k) * cfg.k;
  Vec vs;
  if (cfg.v.empty()) vs = generic_section_point(cfg.k, cfg.seed);
  else if (static_cast<Eigen::Index>(cfg.v.size()) == kk) vs = Eigen::Map<const Vec>(cfg.v.data(), kk);
  else throw ConfigError("orbitope-gap: v must have k^2 entries");
  const Vec v = fs.sigma.embed(vs);

  VerificationReport r("orbitope-gap");
  r.budgets["orbit"] = cfg.orbit_budget;
  r.budgets["base_points"] = cfg.base_points;
  r.budgets["patch_samples"] = cfg.patch_samples;
  r.seeds["orbit"] = cfg.seed;
  const int bound = cfg.k * cfg.n - cfg.k * (cfg.k + 1) / 2;
  const int full = cfg.k * cfg.k;
  r.note("bound_kn_minus_k(k+1)/2", bound);
  r.note("k_squared", full);
  r.details["v_section"] = detail::vec_json(vs);
  if (vs.norm() == 0.0) {
    r.note("a_local_dimension", 0);
    r.note("b_orbitope_dimension", 0);
    r.check("seed_generic", 0.0, Compare::eq, 1.0);
    r.verdict = "non-generic-seed";
    return r;
  }

  auto measure = [&](int scale) {
    const int a = detail::local_projected_dimension(fs, v, scale * cfg.base_points, scale * cfg.patch_samples,
                                                    cfg.patch_radius, cfg.local_rel_tol, cfg.seed);
    const OrbitCloud big = orbit(fs.big, Point(v), scale * cfg.orbit_budget, cfg.seed);
    const int a_global = affine_dimension(PointCloud(detail::sigma_coords(fs.sigma, big.base.matrix())), cfg.global_rel_tol);
    const OrbitCloud small = orbit(fs.reduced, Point(vs), scale * cfg.orbit_budget, cfg.seed ^ 0x77);
    const int b = affine_dimension(small.base, cfg.global_rel_tol);
    return std::array<int, 3>{a, a_global, b};
  };
  const auto once = measure(1);
  const auto twice = measure(2);
  const int a = once[0], b = once[2];
  r.note("projected_affine_span", once[1]);
  r.note("a_doubled", twice[0]);
  r.note("b_doubled", twice[2]);
  r.check("a_local_dimension", a, Compare::le, bound);
  r.check("b_orbitope_dimension", b, Compare::eq, full);
  r.check("a_strictly_below_b", b - a, Compare::ge, 1.0);
  r.check("ranks_stable_under_doubling", (once == twice) ? 1.0 : 0.0, Compare::eq, 1.0);
  r.verdict = r.passed() ? "projection-strictly-inside-orbitope" : "gap-not-confirmed";
  return r;
}

// ---------------------------------------------------------------------------
// Finite groups: Σ = V is a fat section but orbits are not convex.

struct FiniteCounterexampleConfig {
  nlohmann::json group = {{"family", "sign"}, {"n", 2}};
  std::vector<double> v{1.0, 0.0};
  double tol = 1e-6;
  int probe_budget = 40;
  int per_radius_budget = 16;
  std::uint64_t seed = kDefaultSeed;
};

inline VerificationReport scenario_finite_counterexample(const FiniteCounterexampleConfig& cfg) {
  const GroupAction action = make_action(cfg.group);
  if (!action.exact()) throw ConfigError("finite-counterexample: the group must be finite");
  if (action.finite_group()->order() < 2) throw ConfigError("finite-counterexample: the group is trivial (order 1)");
  const Point v(Eigen::Map<const Vec>(cfg.v.data(), static_cast<Eigen::Index>(cfg.v.size())));
  require_dim("finite-counterexample", action.ambient_dim(), v.dim());

  VerificationReport r("finite-counterexample");
  r.seeds["probes"] = cfg.seed;
  r.budgets["probes"] = cfg.probe_budget;
  r.note("group_order", static_cast<double>(action.finite_group()->order()));
  r.note("tol", cfg.tol);
  const OrbitCloud f = orbit(action, v, 1, cfg.seed);
  const Mat& pts = f.base.matrix();
  r.note("orbit_size", static_cast<double>(pts.cols()));
  if (pts.cols() < 2) {
    r.verdict = "degenerate-seed";
    r.check("orbit_size", static_cast<double>(pts.cols()), Compare::ge, 2.0);
    return r;
  }

  // Midpoint certificate over all pairs, re-checked against the raw point list.
  const SaturatedSet s = SaturatedSet::fibers(action, {v});
  double best = -1.0;
  Eigen::Index bi = 0, bj = 0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i)
    for (Eigen::Index j = i + 1; j < pts.cols(); ++j) {
      const double d = distance_to_saturated(s, Point(0.5 * (pts.col(i) + pts.col(j))));
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  const Vec mid = 0.5 * (pts.col(bi) + pts.col(bj));
  const double recheck = (pts.colwise() - mid).colwise().norm().minCoeff();
  r.note("certificate_distance", best);
  r.check("certificate_recheck_margin", recheck, Compare::ge, 10.0 * cfg.tol);
  r.details["certificate"] = {{"p", detail::vec_json(pts.col(bi))},
                              {"q", detail::vec_json(pts.col(bj))},
                              {"midpoint", detail::vec_json(mid)},
                              {"distance", json_number(recheck)}};

  DetectConfig dc;
  dc.probe_budget = cfg.probe_budget;
  dc.per_radius_budget = cfg.per_radius_budget;
  dc.seed = cfg.seed;
  const VerificationReport det = convexity_detect(s, dc);
  r.note("detector_min_raw_slope", det.value("min_raw_slope"));
  r.check("detector_found_witness", det.verdict == "nonconvex-witness" ? 1.0 : 0.0, Compare::eq, 1.0);
  r.details["detector_witness"] = det.details["witness"];

  // With Σ = V the inclusion pi_Σ(F) ⊂ conv(F ∩ Σ) reads F ⊂ conv(F).
  const SupportOracle hull(f.base);
  int outside = 0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i)
    if (!conv_membership(hull, Point(pts.col(i)), kTol.exact_assertion, 1000).inside) ++outside;
  r.check("inclusion_violations", outside, Compare::eq, 0.0);
  r.tables.push_back(detail::cloud_table("orbit", pts));
  r.verdict = r.passed() ? "orbit-not-convex" : "counterexample-not-confirmed";
  return r;
}

// ---------------------------------------------------------------------------
// Fixed points

struct FixedPointsConfig {
  nlohmann::json action = {{"family", "S"}, {"n", 3}};
  int sample_budget = 32;
  int orbit_budget = 200;
  int fat_n = 4;
  int fat_k = 3;
  double tol = kTol.exact_assertion;
  double nearest_tol = 1e-6;
  std::uint64_t seed = kDefaultSeed;
};

inline VerificationReport scenario_fixed_points(const FixedPointsConfig& cfg) {
  const GroupAction action = make_action(cfg.action);
  const Eigen::Index d = action.ambient_dim();
  VerificationReport r("fixed-points");
  r.budgets["samples"] = cfg.sample_budget;
  r.budgets["orbit"] = cfg.orbit_budget;
  r.seeds["samples"] = cfg.seed;
  const Subspace v0 = fixed_point_subspace(action, cfg.sample_budget, cfg.seed);
  r.note("fixed_dim", static_cast<double>(v0.dim()));

  // (i) the null space is fixed: orbits of its vectors are singletons.
  double residual = 0.0;
  for (Eigen::Index j = 0; j < v0.dim(); ++j) {
    const Point u(Vec(v0.basis().col(j)));
    const OrbitCloud o = orbit(action, u, cfg.orbit_budget, cfg.seed ^ 0xf1);
    residual = std::max(residual, (o.base.matrix().colwise() - u.vec()).colwise().norm().maxCoeff());
  }
  r.check("fixed_orbit_residual", residual, Compare::le, cfg.tol);

  // (ii) translating by a fixed vector maps orbits to orbits.
  Rng rng(cfg.seed, 0, /*salt=*/0xf2);
  const Vec v = rng.gaussian(d);
  const Vec u0 = v0.dim() > 0 ? v0.embed(rng.gaussian(v0.dim())) : Vec::Zero(d);
  const Mat shifted = orbit(action, Point(v + u0), cfg.orbit_budget, cfg.seed).base.matrix();
  const Mat moved = orbit(action, Point(v), cfg.orbit_budget, cfg.seed).base.matrix().colwise() + u0;
  double translation_gap = 0.0;
  for (Eigen::Index i = 0; i < shifted.cols(); ++i)
    translation_gap = std::max(translation_gap, (moved.colwise() - shifted.col(i)).colwise().norm().minCoeff());
  for (Eigen::Index i = 0; i < moved.cols(); ++i)
    translation_gap = std::max(translation_gap, (shifted.colwise() - moved.col(i)).colwise().norm().minCoeff());
  r.check("translation_gap", translation_gap, Compare::le, cfg.tol);

  // (iii) fat section of the built-in family: V0 ∩ Σ against the fixed space of the reduced action.
  const FatSectionSetup fs = fat_section_setup(cfg.fat_n, cfg.fat_k, cfg.seed);
  const Subspace big0 = fixed_point_subspace(fs.big, cfg.sample_budget, cfg.seed);
  const Subspace small0 = fixed_point_subspace(fs.reduced, cfg.sample_budget, cfg.seed);
  Eigen::Index meet = 0;
  if (big0.dim() > 0) {
    Mat both(fs.sigma.ambient_dim(), big0.dim() + fs.sigma.dim());
    both << big0.basis(), fs.sigma.basis();
    const Eigen::Index sum = Eigen::FullPivLU<Mat>(both).setThreshold(1e-10).rank();
    meet = big0.dim() + fs.sigma.dim() - sum;
  }
  r.note("fat_fixed_dim_in_section", static_cast<double>(meet));
  r.note("reduced_fixed_dim", static_cast<double>(small0.dim()));
  r.check("fat_fixed_dim_gap", std::abs(static_cast<double>(meet - small0.dim())), Compare::eq, 0.0);

  // (iv) the point of a saturated convex set closest to the origin is fixed.
  const Point w(rng.gaussian(d));
  const std::optional<SupportOracle> hull = orbit_support_oracle(action, w);
  const SupportOracle oracle = hull ? *hull : SupportOracle(orbit(action, w, cfg.orbit_budget, cfg.seed).base);
  const MembershipResult near = conv_membership(oracle, Point(Vec::Zero(d)), 1e-10, 20000);
  double moved_by = 0.0;
  for (int i = 0; i < cfg.sample_budget; ++i)
    moved_by = std::max(moved_by, (action.act(action.sample_element(cfg.seed ^ 0xf3, static_cast<std::uint64_t>(i)), near.nearest) -
                                   near.nearest).norm());
  if (const FiniteOrthogonalGroup* g = action.finite_group())
    for (const Mat& e : g->elements) moved_by = std::max(moved_by, (action.act(e, near.nearest) - near.nearest).norm());
  r.note("nearest_norm", near.nearest.norm());
  r.check("nearest_point_fixed_residual", moved_by, Compare::le, cfg.nearest_tol);
  r.details["fixed_basis"] = nlohmann::json::array();
  for (Eigen::Index j = 0; j < v0.dim(); ++j) r.details["fixed_basis"].push_back(detail::vec_json(v0.basis().col(j)));
  r.verdict = r.passed() ? "fixed-point-properties-hold" : "fixed-point-check-failed";
  return r;
}

// ---------------------------------------------------------------------------
// Randomized property suites

struct PolarSuiteConfig {
  int clouds = 100;
  int max_dim = 5;
  int min_points = 6;
  int max_points = 40;
  int direction_budget = 200;
  double tol = 1e-6;
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
};

/// Random cloud with its centroid moved to the origin, so the origin lies in
/// the interior of the hull.
inline PointCloud random_centered_cloud(Eigen::Index dim, int points, std::uint64_t seed, std::uint64_t index) {
  Rng rng(seed, index, /*salt=*/0xc1);
  Mat m = rng.gaussian(dim, points);
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) *= rng.uniform(0.5, 2.0);
  m.colwise() -= Vec(m.rowwise().mean());
  return PointCloud(m, "random");
}

inline VerificationReport scenario_bipolar(const PolarSuiteConfig& cfg) {
  VerificationReport r("bipolar");
  r.budgets["clouds"] = cfg.clouds;
  r.budgets["directions"] = cfg.direction_budget;
  r.seeds["clouds"] = cfg.seed;
  std::vector<double> gaps(static_cast<std::size_t>(cfg.clouds));
  std::vector<int> ok(gaps.size());
  parallel_for(gaps.size(), cfg.jobs, [&](std::size_t i) {
    Rng rng(cfg.seed, i, /*salt=*/0xc2);
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.index_below(static_cast<std::size_t>(cfg.max_dim)));
    const int pts = cfg.min_points + static_cast<int>(rng.index_below(static_cast<std::size_t>(cfg.max_points - cfg.min_points + 1)));
    const VerificationReport one = bipolar_check(random_centered_cloud(dim, pts, cfg.seed, i), cfg.direction_budget, cfg.tol, mix64(cfg.seed + i));
    ok[i] = one.value("origin_in_hull") == 1.0;
    gaps[i] = ok[i] ? one.value("max_support_gap") : std::numeric_limits<double>::infinity();
  });
  r.check("clouds_with_origin", static_cast<double>(std::accumulate(ok.begin(), ok.end(), 0)), Compare::eq, cfg.clouds);
  r.check("max_support_gap", gaps.empty() ? 0.0 : *std::max_element(gaps.begin(), gaps.end()), Compare::le, cfg.tol);
  r.verdict = r.passed() ? "bipolar-identity-holds" : "bipolar-gap-exceeded";
  return r;
}

inline VerificationReport scenario_projection_polar(const PolarSuiteConfig& cfg) {
  VerificationReport r("projection-polar");
  r.budgets["clouds"] = cfg.clouds;
  r.budgets["directions"] = cfg.direction_budget;
  r.seeds["clouds"] = cfg.seed;
  std::vector<double> gaps(static_cast<std::size_t>(cfg.clouds));
  parallel_for(gaps.size(), cfg.jobs, [&](std::size_t i) {
    Rng rng(cfg.seed, i, /*salt=*/0xc3);
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(rng.index_below(static_cast<std::size_t>(std::max(1, cfg.max_dim - 1))));
    const int pts = cfg.min_points + static_cast<int>(rng.index_below(static_cast<std::size_t>(cfg.max_points - cfg.min_points + 1)));
    const Eigen::Index sub = 1 + static_cast<Eigen::Index>(rng.index_below(static_cast<std::size_t>(dim - 1)));
    const Eigen::HouseholderQR<Mat> qr(rng.gaussian(dim, sub));
    const Subspace sigma(dim, qr.householderQ() * Mat::Identity(dim, sub));
    const VerificationReport one = projection_polar_check(random_centered_cloud(dim, pts, cfg.seed ^ 0x33, i), sigma,
                                                          cfg.direction_budget, cfg.tol, mix64(cfg.seed + i));
    gaps[i] = one.value("origin_in_hull") == 1.0 ? one.value("max_support_gap") : std::numeric_limits<double>::infinity();
  });
  r.check("max_support_gap", gaps.empty() ? 0.0 : *std::max_element(gaps.begin(), gaps.end()), Compare::le, cfg.tol);
  r.verdict = r.passed() ? "projection-polar-identity-holds" : "projection-polar-gap-exceeded";
  return r;
}

struct BusemannConfig {
  int samples = 1000;
  int dim = 5;
  double max_norm = 5.0;
  double t = 1e4;
  double tol = 2e-3;
  std::uint64_t seed = kDefaultSeed;
};

inline VerificationReport scenario_busemann(const BusemannConfig& cfg) {
  if (!(cfg.t > 2.0 * cfg.max_norm)) throw ConfigError("busemann: t must exceed twice the largest norm");
  VerificationReport r("busemann");
  r.budgets["samples"] = cfg.samples;
  r.seeds["samples"] = cfg.seed;
  double worst = 0.0, worst_vs_bound = -std::numeric_limits<double>::infinity(), below = 0.0;
  const std::vector<double> grid{cfg.t};
  for (int i = 0; i < cfg.samples; ++i) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(i), /*salt=*/0xe1);
    const Point v(rng.in_ball(cfg.dim, cfg.max_norm));
    const Point u(rng.unit_vector(cfg.dim));
    const double exact = v.vec().dot(u.vec());
    const double b = busemann_pairing(v, u, grid);
    const double gap = exact - b;
    worst = std::max(worst, std::abs(gap));
    worst_vs_bound = std::max(worst_vs_bound, gap - v.vec().squaredNorm() / (2.0 * (cfg.t - v.norm())));
    below = std::max(below, -gap);
  }
  r.check("max_gap", worst, Compare::le, cfg.tol);
  r.check("max_excess_over_bound", worst_vs_bound, Compare::le, 1e-12);
  r.check("max_overshoot", below, Compare::le, 1e-12);
  r.verdict = r.passed() ? "busemann-identity-holds" : "busemann-gap-exceeded";
  return r;
}

struct BasicSuiteConfig {
  int exact_tests = 1000;
  int sampled_tests = 1000;
  int orbits_per_action = 5;
  int sampled_orbit_budget = 4000;
  double exact_tol = 1e-8;
  double sampled_tol = 1e-3;
  std::uint64_t seed = kDefaultSeed;
};

/// Support functions of orbits are constant on orbits, across exact
/// (finite) and sampled (compact) actions; hull membership is invariant.
inline VerificationReport scenario_basic_functions(const BasicSuiteConfig& cfg) {
  VerificationReport r("basic-functions");
  r.budgets["exact_tests"] = cfg.exact_tests;
  r.budgets["sampled_tests"] = cfg.sampled_tests;
  r.budgets["sampled_orbit"] = cfg.sampled_orbit_budget;
  r.seeds["suite"] = cfg.seed;
  const std::vector<nlohmann::json> exact{{{"family", "S"}, {"n", 3}},        {{"family", "dihedral"}, {"n", 10}},
                                          {{"family", "sign"}, {"n", 2}},     {{"family", "cyclic"}, {"n", 5}},
                                          {{"family", "S"}, {"n", 4}}};
  const std::vector<nlohmann::json> sampled{{{"family", "O"}, {"n", 2}}, {{"family", "SO"}, {"n", 2}}};
  auto run = [&](const std::vector<nlohmann::json>& actions, int tests, double tol, bool is_exact, const char* prefix) {
    const int per = std::max(1, tests / static_cast<int>(actions.size() * static_cast<std::size_t>(cfg.orbits_per_action)));
    double gap = 0.0, formula = 0.0, disagreements = 0.0;
    int done = 0;
    for (std::size_t a = 0; a < actions.size(); ++a) {
      const GroupAction action = make_action(actions[a]);
      for (int o = 0; o < cfg.orbits_per_action; ++o) {
        Rng rng(cfg.seed, a * 1000 + static_cast<std::size_t>(o), /*salt=*/is_exact ? 0xe2 : 0xe3);
        const Point w(rng.gaussian(action.ambient_dim()));
        const OrbitCloud f = orbit(action, w, cfg.sampled_orbit_budget, mix64(cfg.seed + a * 1000 + static_cast<std::size_t>(o)));
        BasicCheckConfig bc;
        bc.test_pairs = per;
        bc.tol = tol;
        bc.seed = mix64(cfg.seed ^ (a * 7919 + static_cast<std::size_t>(o)));
        const VerificationReport one = basic_function_check(action, f, bc);
        gap = std::max(gap, one.value("max_support_gap"));
        formula = std::max(formula, one.value("radial_formula_gap"));
        if (is_exact) disagreements += one.value("membership_disagreements");
        done += per;
      }
    }
    r.note(std::string(prefix) + "tests", done);
    r.check(std::string(prefix) + "max_support_gap", gap, Compare::le, tol, !is_exact);
    r.check(std::string(prefix) + "radial_formula_gap", formula, Compare::le, 1e-3, !is_exact);
    if (is_exact) r.check("membership_disagreements", disagreements, Compare::eq, 0.0);
  };
  run(exact, cfg.exact_tests, cfg.exact_tol, true, "exact_");
  run(sampled, cfg.sampled_tests, cfg.sampled_tol, false, "sampled_");
  r.verdict = r.passed() ? "support-functions-basic" : "basicness-violated";
  return r;
}

// ---------------------------------------------------------------------------
// Slope criterion: detector against the midpoint oracle

struct SlopeSuiteConfig {
  int probe_budget = 200;
  int per_radius_budget = 32;
  double tol = 0.02;
  int random_sets = 50;
  int suite_probe_budget = 60;
  int suite_per_radius_budget = 24;
  int pair_budget = 300;
  double oracle_tol = 1e-6;
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
};

/// Deterministic pseudo-random saturated set number `index`: radial
/// intervals, unions of fibers and support-function sublevel sets over
/// O(2), S_3, the dihedral group of order 10, and two actions on R^4.
inline SaturatedSet random_saturated_set(std::uint64_t seed, std::uint64_t index) {
  Rng rng(seed, index, /*salt=*/0xe5);
  static const std::vector<nlohmann::json> actions{
      {{"family", "O"}, {"n", 2}},
      {{"family", "S"}, {"n", 3}},
      {{"family", "dihedral"}, {"n", 10}},
      {{"family", "O"}, {"n", 2}, {"rep", "diagonal"}, {"copies", 2}},
      {{"family", "generators"},
       {"dim", 4},
       {"name", "S3+1"},
       {"generators", {{{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}},
                       {{0, 0, 1, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 1}}}}}};
  const GroupAction action = make_action(actions[index % actions.size()]);
  const Eigen::Index d = action.ambient_dim();
  const bool sublevel_ok = action.exact() || (action.rep() == Rep::standard);
  const std::size_t kind = (index / actions.size()) % 3;
  const bool convex = rng.uniform() < 0.5;
  if (kind == 0 || (kind == 2 && !sublevel_ok)) {
    const double hi = rng.uniform(0.5, 2.0);
    return SaturatedSet::radial(action, convex ? 0.0 : rng.uniform(0.5, 1.0) * hi, hi);
  }
  if (kind == 1) {
    if (convex) {
      const Subspace v0 = fixed_point_subspace(action, 16, seed);
      const Vec p = v0.dim() > 0 ? v0.embed(rng.gaussian(v0.dim())) : Vec::Zero(d);
      return SaturatedSet::fibers(action, {Point(p)});
    }
    std::vector<Point> reps{Point(rng.gaussian(d))};
    if (rng.uniform() < 0.5) reps.emplace_back(rng.gaussian(d));
    return SaturatedSet::fibers(action, std::move(reps));
  }
  return SaturatedSet::sublevel(action, Point(rng.gaussian(d)), rng.uniform(0.5, 2.0));
}

inline VerificationReport scenario_slope_criterion(const SlopeSuiteConfig& cfg) {
  VerificationReport r("slope-criterion");
  r.budgets["probes"] = cfg.probe_budget;
  r.budgets["random_sets"] = cfg.random_sets;
  r.seeds["suite"] = cfg.seed;
  const GroupAction o2 = make_action({{"family", "O"}, {"n", 2}});
  DetectConfig dc;
  dc.probe_budget = cfg.probe_budget;
  dc.per_radius_budget = cfg.per_radius_budget;
  dc.tol = cfg.tol;
  dc.seed = cfg.seed;
  dc.jobs = cfg.jobs;

  const VerificationReport disk = convexity_detect(SaturatedSet::radial(o2, 0.0, 1.0), dc);
  r.check("disk_min_raw_slope", disk.value("min_raw_slope"), Compare::ge, 1.0 - cfg.tol);
  r.check("disk_probe_count", disk.value("probe_count"), Compare::ge, cfg.probe_budget);
  const VerificationReport circle = convexity_detect(SaturatedSet::radial(o2, 1.0, 1.0), dc);
  r.check("circle_witness_slope", circle.value("min_raw_slope"), Compare::le, -0.9);
  Vec witness(2);
  witness << circle.details["witness"]["point"][0].get<double>(), circle.details["witness"]["point"][1].get<double>();
  r.check("circle_witness_norm", witness.norm(), Compare::le, 0.1);

  std::vector<std::string> det(static_cast<std::size_t>(cfg.random_sets)), ora(det.size());
  std::vector<nlohmann::json> sets(det.size());
  parallel_for(det.size(), cfg.jobs, [&](std::size_t i) {
    const SaturatedSet s = random_saturated_set(cfg.seed, i);
    DetectConfig sc = dc;
    sc.jobs = 1;
    sc.probe_budget = cfg.suite_probe_budget;
    sc.per_radius_budget = cfg.suite_per_radius_budget;
    sc.seed = mix64(cfg.seed + i);
    det[i] = convexity_detect(s, sc).verdict;
    ora[i] = midpoint_convexity_oracle(s, cfg.pair_budget, cfg.oracle_tol, mix64(cfg.seed ^ i)).verdict;
    sets[i] = s.descriptor();
  });
  int disagreements = 0, nonconvex = 0;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < det.size(); ++i) {
    const bool d_nc = det[i] == "nonconvex-witness";
    const bool o_nc = ora[i] == "nonconvex-certificate";
    if (d_nc != o_nc) ++disagreements;
    if (o_nc) ++nonconvex;
    rows.push_back({{"set", sets[i]}, {"detector", det[i]}, {"oracle", ora[i]}});
  }
  r.details["suite"] = rows;
  r.note("suite_nonconvex", nonconvex);
  r.check("suite_disagreements", disagreements, Compare::eq, 0.0);
  r.verdict = r.passed() ? "slope-criterion-consistent" : "slope-criterion-mismatch";
  return r;
}

}  // namespace orbitcvx

#endif  // ORBITCVX_SCENARIOS_HPP
