#ifndef FJREC_PLANT_HPP_
#define FJREC_PLANT_HPP_

/**
 * @file
 * @brief Controlled LTI-with-offset plant x(t+1) = Ax + Bu + Λ̃x0 obtained by
 * turning the recommender node of an opinion network into a scalar input.
 */

#include <cstddef>
#include <string>

#include "fjrec/error.hpp"
#include "fjrec/numerics/linalg.hpp"
#include "fjrec/numerics/matrix.hpp"
#include "fjrec/numerics/settings.hpp"
#include "fjrec/opinion_model.hpp"

namespace fjrec {

/// Margin below 1 that the spectral radius of A must clear.
inline constexpr double kStabilityMargin = 1e-9;

struct ControlledPlant
{
  DenseMatrix a;
  DenseVector b;
  DenseVector lambda_tilde;
  DenseVector x0;
  std::size_t rs_index = 0;

  ControlledPlant() = default;

  ControlledPlant(DenseMatrix a_, DenseVector b_, DenseVector lambda_, DenseVector x0_, std::size_t rs = 0)
      : a(std::move(a_)), b(std::move(b_)), lambda_tilde(std::move(lambda_)), x0(std::move(x0_)), rs_index(rs)
  {
    const std::size_t n = a.rows();
    if (n == 0 || !a.is_square() || b.size() != n || lambda_tilde.size() != n || x0.size() != n) {
      throw Error(ErrorKind::DimensionMismatch, "plant matrices have inconsistent sizes");
    }
  }

  [[nodiscard]] std::size_t n() const noexcept { return a.rows(); }

  /// Λ̃·x0
  [[nodiscard]] DenseVector offset() const { return hadamard(lambda_tilde, x0); }
};

/// Deletes node `rs_index` and turns its column into the input vector.
inline ControlledPlant extract_plant(const OpinionNetwork & net, std::size_t rs_index,
                                     const NumericSettings & s = default_settings)
{
  require_valid(net);
  const std::size_t total = net.n_total();
  if (rs_index >= total) { throw Error(ErrorKind::InvalidIndex, "recommender index out of range"); }
  if (total < 2) { throw Error(ErrorKind::InvalidArgument, "network needs at least one user besides the recommender"); }
  const std::size_t n = total - 1;
  DenseMatrix a(n, n);
  DenseVector b(n);
  DenseVector lambda(n);
  DenseVector x0(n);
  for (std::size_t i = 0, ii = 0; i < total; ++i) {
    if (i == rs_index) { continue; }
    const double keep = 1.0 - net.stubbornness[i];
    for (std::size_t j = 0, jj = 0; j < total; ++j) {
      if (j == rs_index) { continue; }
      a(ii, jj++) = keep * net.adjacency(i, j);
    }
    b[ii] = keep * net.adjacency(i, rs_index);
    lambda[ii] = net.stubbornness[i];
    x0[ii] = net.initial_opinions[i];
    ++ii;
  }
  const double rho = spectral_radius(a, s.power_tol, s.power_max_iter);
  if (rho >= 1.0 - kStabilityMargin) {
    throw Error(ErrorKind::NotLambdaConnected, "user subsystem is not λ-connected (spectral radius " +
                                                   std::to_string(rho) + ")");
  }
  return ControlledPlant(std::move(a), std::move(b), std::move(lambda), std::move(x0), rs_index);
}

inline void require_unit_input(double u)
{
  if (!(u >= 0.0 && u <= 1.0)) { throw Error(ErrorKind::InputOutOfRange, "input must lie in [0, 1]"); }
}

inline DenseVector plant_step(const ControlledPlant & p, const DenseVector & x, double u)
{
  if (x.size() != p.n()) { throw Error(ErrorKind::DimensionMismatch, "plant_step: state size"); }
  require_unit_input(u);
  DenseVector next = p.a * x;
  for (std::size_t i = 0; i < next.size(); ++i) { next[i] += p.b[i] * u + p.lambda_tilde[i] * p.x0[i]; }
  return next;
}

struct ReachabilityBounds
{
  DenseVector lower;  ///< steady state under u ≡ 0
  DenseVector upper;  ///< steady state under u ≡ 1
};

/// (I − A)⁻¹(Bu + Λ̃x0)
inline DenseVector constant_input_steady_state(const ControlledPlant & p, double u,
                                               const NumericSettings & s = default_settings)
{
  require_unit_input(u);
  const DenseMatrix m = DenseMatrix::identity(p.n()) - p.a;
  DenseVector rhs = p.offset();
  rhs.axpy(u, p.b);
  return solve_linear(m, rhs, s);
}

inline ReachabilityBounds reachability_bounds(const ControlledPlant & p, const NumericSettings & s = default_settings)
{
  const LuDecomposition lu(DenseMatrix::identity(p.n()) - p.a, s.pivot_tol);
  const DenseVector off = p.offset();
  return {lu.solve(off), lu.solve(off + p.b)};
}

}  // namespace fjrec

#endif  // FJREC_PLANT_HPP_
