#ifndef ORBITCVX_RNG_HPP
#define ORBITCVX_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace orbitcvx {

/// splitmix64 finalizer; used to derive independent streams from (seed, index).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index,
                                   std::uint64_t salt = 0) {
  return mix64(mix64(seed ^ mix64(salt)) + index);
}

/// Deterministic random source keyed by (seed, index, salt). Every sampled
/// quantity in the library is drawn from one of these, so batches can be
/// evaluated in any order and still merge to identical results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t index = 0, std::uint64_t salt = 0)
      : engine_(stream_key(seed, index, salt)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }

  std::size_t index_below(std::size_t n) {
    return static_cast<std::size_t>(std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_));
  }

  Eigen::VectorXd gaussian(Eigen::Index dim) {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

  Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  /// Uniform on the unit sphere S^{dim-1}.
  Eigen::VectorXd unit_vector(Eigen::Index dim) {
    for (;;) {
      Eigen::VectorXd v = gaussian(dim);
      const double n = v.norm();
      if (n > 1e-12) return v / n;
    }
  }

  /// Uniform in the closed ball of the given radius.
  Eigen::VectorXd in_ball(Eigen::Index dim, double radius) {
    const double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(dim));
    return r * unit_vector(dim);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace orbitcvx

#endif  // ORBITCVX_RNG_HPP
