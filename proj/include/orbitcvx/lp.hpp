#ifndef ORBITCVX_LP_HPP
#define ORBITCVX_LP_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "orbitcvx/geomcore.hpp"

namespace orbitcvx::lp {

inline constexpr Eigen::Index kMaxVariables = 12;
inline constexpr Eigen::Index kMaxConstraints = 100000;

/// maximize <objective, x> subject to <constraints.col(i), x> <= rhs[i].
/// All right-hand sides are non-negative, so the origin is always feasible.
struct Problem {
  Mat constraints;  // d x m, one constraint normal per column
  Vec rhs;          // m
  Vec objective;    // d
};

enum class Outcome { optimal, unbounded };

struct Result {
  Outcome outcome = Outcome::optimal;
  double value = 0.0;
  Vec argmax;     // primal optimum (optimal only)
  Vec recession;  // unit r with <a_i, r> <= 0 for all i and <c, r> > 0 (unbounded only)
  /// Dual certificate: objective = sum y_i a_i with y_i >= 0 and sum y_i rhs_i = value.
  std::vector<std::pair<Eigen::Index, double>> dual;
  int iterations = 0;
  double max_violation = 0.0;
};

struct Options {
  int max_iterations = 200000;
  int degenerate_before_bland = 25;
  double reduced_cost_eps = 1e-11;
  double pivot_eps = 1e-11;
};

namespace detail {

// Revised simplex on the dual problem
//   minimize rhs^T y  subject to  A y = c,  y >= 0,
// which has only d rows. Columns 0..m-1 are constraint normals; columns
// m..m+d-1 are phase-one artificials.
class DualSimplex {
 public:
  DualSimplex(const Problem& p, const Options& opt) : p_(p), opt_(opt), d_(p.objective.size()), m_(p.constraints.cols()) {
    sign_.resize(d_);
    for (Eigen::Index r = 0; r < d_; ++r) sign_[r] = p_.objective[r] < 0 ? -1.0 : 1.0;
    basis_.resize(static_cast<std::size_t>(d_));
    for (Eigen::Index r = 0; r < d_; ++r) basis_[static_cast<std::size_t>(r)] = m_ + r;
    is_basic_.assign(static_cast<std::size_t>(m_ + d_), false);
    for (Eigen::Index r = 0; r < d_; ++r) is_basic_[static_cast<std::size_t>(m_ + r)] = true;
  }

  Result run() {
    Result out;
    iterate(/*phase=*/1, out.iterations);
    refresh();
    const double infeasibility = phase_objective(1);
    const double scale = 1.0 + p_.objective.cwiseAbs().maxCoeff();
    if (infeasibility > 1e-9 * scale) {
      // Phase-one multipliers separate the objective from the cone of normals.
      out.outcome = Outcome::unbounded;
      const Vec pi = multipliers(1);
      const double n = pi.norm();
      out.recession = n > 0 ? Vec(pi / n) : pi;
      return out;
    }
    drive_out_artificials();
    iterate(/*phase=*/2, out.iterations);
    refresh();
    const Vec x = multipliers(2);
    out.outcome = Outcome::optimal;
    out.argmax = x;
    out.value = p_.objective.dot(x);
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const Eigen::Index j = basis_[i];
      if (j < m_ && xb_[static_cast<Eigen::Index>(i)] > 0) out.dual.emplace_back(j, xb_[static_cast<Eigen::Index>(i)]);
    }
    out.max_violation = m_ > 0 ? ((p_.constraints.transpose() * x) - p_.rhs).maxCoeff() : 0.0;
    return out;
  }

 private:
  Vec column(Eigen::Index j) const {
    if (j < m_) return p_.constraints.col(j);
    Vec e = Vec::Zero(d_);
    e[j - m_] = sign_[j - m_];
    return e;
  }
  double cost(Eigen::Index j, int phase) const {
    if (phase == 1) return j < m_ ? 0.0 : 1.0;
    return j < m_ ? p_.rhs[j] : 0.0;
  }

  void refresh() {
    Mat b(d_, d_);
    for (Eigen::Index i = 0; i < d_; ++i) b.col(i) = column(basis_[static_cast<std::size_t>(i)]);
    lu_.compute(b);
    xb_ = lu_.solve(p_.objective);
  }
  Vec multipliers(int phase) const {
    Vec cb(d_);
    for (Eigen::Index i = 0; i < d_; ++i) cb[i] = cost(basis_[static_cast<std::size_t>(i)], phase);
    return lu_.transpose().solve(cb);
  }
  double phase_objective(int phase) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < d_; ++i) s += cost(basis_[static_cast<std::size_t>(i)], phase) * xb_[i];
    return s;
  }

  void pivot(std::size_t leave, Eigen::Index enter) {
    is_basic_[static_cast<std::size_t>(basis_[leave])] = false;
    basis_[leave] = enter;
    is_basic_[static_cast<std::size_t>(enter)] = true;
  }

  void iterate(int phase, int& iterations) {
    bool bland = false;
    int degenerate_run = 0;
    for (;;) {
      if (++iterations > opt_.max_iterations) throw std::runtime_error("lp: iteration limit reached");
      refresh();
      const Vec pi = multipliers(phase);
      Vec reduced = -(p_.constraints.transpose() * pi);
      if (phase == 2) reduced += p_.rhs;
      Eigen::Index enter = -1;
      double best = 0.0;
      for (Eigen::Index j = 0; j < m_; ++j) {
        if (is_basic_[static_cast<std::size_t>(j)]) continue;
        const double tol = opt_.reduced_cost_eps * (1.0 + p_.constraints.col(j).cwiseAbs().maxCoeff());
        if (reduced[j] >= -tol) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (reduced[j] < best) {
          best = reduced[j];
          enter = j;
        }
      }
      if (enter < 0) return;

      const Vec dir = lu_.solve(column(enter));
      std::size_t leave = basis_.size();
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < basis_.size(); ++i) {
        const double di = dir[static_cast<Eigen::Index>(i)];
        if (di <= opt_.pivot_eps) continue;
        const double r = std::max(0.0, xb_[static_cast<Eigen::Index>(i)]) / di;
        if (r < ratio - 1e-14 || (std::abs(r - ratio) <= 1e-14 && leave < basis_.size() && basis_[i] < basis_[leave])) {
          ratio = r;
          leave = i;
        }
      }
      if (leave == basis_.size()) throw std::runtime_error("lp: dual problem unbounded (numerical breakdown)");
      degenerate_run = ratio <= 1e-13 ? degenerate_run + 1 : 0;
      if (degenerate_run > opt_.degenerate_before_bland) bland = true;
      pivot(leave, enter);
    }
  }

  void drive_out_artificials() {
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (basis_[i] < m_) continue;
      refresh();
      Vec e = Vec::Zero(d_);
      e[static_cast<Eigen::Index>(i)] = 1.0;
      const Vec row = p_.constraints.transpose() * Vec(lu_.transpose().solve(e));
      Eigen::Index enter = -1;
      double best = 1e-9;
      for (Eigen::Index j = 0; j < m_; ++j) {
        if (is_basic_[static_cast<std::size_t>(j)]) continue;
        const double a = std::abs(row[j]) / (1.0 + p_.constraints.col(j).norm());
        if (a > best) {
          best = a;
          enter = j;
        }
      }
      // No candidate: the row is redundant and the artificial stays at zero.
      if (enter >= 0) pivot(i, enter);
    }
  }

  const Problem& p_;
  Options opt_;
  Eigen::Index d_;
  Eigen::Index m_;
  std::vector<double> sign_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> is_basic_;
  Eigen::PartialPivLU<Mat> lu_;
  Vec xb_;
};

}  // namespace detail

inline Result solve(const Problem& p, const Options& opt = {}) {
  const Eigen::Index d = p.objective.size();
  if (d <= 0) throw std::invalid_argument("lp: objective must be non-empty");
  if (d > kMaxVariables) throw std::invalid_argument("lp: at most 12 variables supported, got " + std::to_string(d));
  require_dim("lp::solve constraints", d, p.constraints.rows());
  require_dim("lp::solve rhs", p.constraints.cols(), p.rhs.size());
  if (p.constraints.cols() > kMaxConstraints) throw std::invalid_argument("lp: too many constraints");
  if (p.rhs.size() > 0 && p.rhs.minCoeff() < 0) throw std::invalid_argument("lp: right-hand sides must be non-negative");
  if (!p.constraints.allFinite() || !p.rhs.allFinite() || !p.objective.allFinite())
    throw std::invalid_argument("lp: non-finite input");
  detail::DualSimplex s(p, opt);
  return s.run();
}

}  // namespace orbitcvx::lp

#endif  // ORBITCVX_LP_HPP
