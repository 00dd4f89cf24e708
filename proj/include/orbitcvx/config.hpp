#ifndef ORBITCVX_CONFIG_HPP
#define ORBITCVX_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace orbitcvx {

/// Numerical thresholds shared by every module. Scenario-specific sampled
/// tolerances live in the scenario configs instead.
struct Tolerances {
  double orthonormal = 1e-10;         ///< basis Gram matrix vs. identity
  double orthogonal_matrix = 1e-9;    ///< |M^T M - I|_inf for group elements
  double orbit_sphere = 2e-9;         ///< orbit points share the seed norm
  double matrix_dedup = 1e-8;         ///< Frobenius identification in closures
  double fixed_point_sv = 1e-8;       ///< singular-value cut for null spaces
  double degenerate_cloud = 1e-12;    ///< clouds this small collapse to a point
  double exact_assertion = 1e-8;      ///< inclusions, ranks, certificates
  double lp_feasibility = 1e-9;       ///< slack allowed on LP constraints
};

inline constexpr Tolerances kTol{};

/// Malformed or inconsistent configuration (bad descriptor, violated
/// scenario hypothesis). The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Seed used whenever a caller does not provide one.
inline constexpr std::uint64_t kDefaultSeed = 20240607ULL;

}  // namespace orbitcvx

#endif  // ORBITCVX_CONFIG_HPP
