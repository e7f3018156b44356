#ifndef FJREC_NUMERICS_SETTINGS_HPP_
#define FJREC_NUMERICS_SETTINGS_HPP_

#include <cstddef>

namespace fjrec {

/// Numerical tolerances shared by every module.
struct NumericSettings
{
  /// Residual scale for linear solves.
  double linear_tol = 1e-10;
  /// Pivots with magnitude below this are treated as singular.
  double pivot_tol = 1e-13;
  /// Scaled KKT residual accepted as optimal by the QP solver.
  double qp_kkt_tol = 1e-9;
  /// Scaled equality residual accepted by the QP feasibility phase.
  double qp_feasibility_tol = 1e-9;
  /// Relative threshold for dropping numerically dependent equality directions.
  double qp_rank_tol = 1e-10;
  std::size_t qp_max_iter = 1000;
  double power_tol = 1e-10;
  std::size_t power_max_iter = 10000;
};

inline constexpr NumericSettings default_settings{};

}  // namespace fjrec

#endif  // FJREC_NUMERICS_SETTINGS_HPP_
