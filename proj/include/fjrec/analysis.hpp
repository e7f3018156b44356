#ifndef FJREC_ANALYSIS_HPP_
#define FJREC_ANALYSIS_HPP_

/**
 * @file
 * @brief Steady-state equivalence certificate, opinion-shift metrics,
 * recommender-free baseline, engagement sampling and controller comparison.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "fjrec/controllers.hpp"
#include "fjrec/error.hpp"
#include "fjrec/numerics/linalg.hpp"
#include "fjrec/numerics/matrix.hpp"
#include "fjrec/opinion_model.hpp"
#include "fjrec/plant.hpp"

namespace fjrec {

/**
 * Algebra relating the model-free and model-based equilibria.
 *
 * G = I − A − (1/n)B1ᵀ, C = (I − A)⁻¹B, D = (1ᵀC)1 − nC. The model-based
 * matrix is G + αBDᵀ with α = 1/(n(1ᵀC − n)), so by Woodbury
 * x*_MF − x*_MB = KΛ̃x0 with K = G⁻¹B(α⁻¹ + DᵀG⁻¹B)⁻¹DᵀG⁻¹. K has rank one,
 * and the equilibria coincide exactly when DᵀG⁻¹Λ̃x0 = 0.
 */
struct EquivalenceCertificate
{
  DenseMatrix g;
  DenseVector c;
  DenseVector d;
  double alpha = 0.0;
  DenseMatrix k;
  /// Row functional Λ̃ᵀG⁻ᵀD; its inner product with x0 decides equivalence.
  DenseVector kernel_functional;
  double gap = 0.0;
  /// KΛ̃x0 = x*_MF − x*_MB
  DenseVector difference;
};

inline EquivalenceCertificate equivalence_certificate(const ControlledPlant & p,
                                                      const NumericSettings & s = default_settings)
{
  const std::size_t n = p.n();
  const double nn = static_cast<double>(n);
  EquivalenceCertificate cert;
  cert.g = DenseMatrix::identity(n) - mf_closed_loop_matrix(p);
  cert.c = solve_linear(DenseMatrix::identity(n) - p.a, p.b, s);
  const double c_sum = cert.c.sum();
  cert.d = DenseVector(n, c_sum);
  cert.d.axpy(-nn, cert.c);

  const double denom = nn * (c_sum - nn);
  if (std::abs(denom) < s.pivot_tol) { throw Error(ErrorKind::SingularMatrix, "1ᵀC = n makes α undefined"); }
  cert.alpha = 1.0 / denom;

  const LuDecomposition lu(cert.g, s.pivot_tol);
  const DenseVector g_inv_b = lu.solve(p.b);
  const DenseMatrix g_inv = invert(cert.g, s);
  // row vector DᵀG⁻¹
  const DenseVector dg = transpose_times(g_inv, cert.d);
  const double middle = 1.0 / cert.alpha + dot(cert.d, g_inv_b);
  if (std::abs(middle) < s.pivot_tol) { throw Error(ErrorKind::SingularMatrix, "Woodbury capacitance vanishes"); }
  cert.k = (1.0 / middle) * outer(g_inv_b, dg);

  cert.kernel_functional = hadamard(p.lambda_tilde, dg);
  cert.gap = std::abs(dot(cert.kernel_functional, p.x0));
  cert.difference = cert.k * p.offset();
  return cert;
}

inline constexpr double kShiftEpsilon = 1e-9;

struct ShiftResult
{
  DenseVector percent;                ///< 0 at excluded components
  std::vector<std::size_t> excluded;  ///< components with x_free < ε

  [[nodiscard]] std::size_t included() const noexcept { return percent.size() - excluded.size(); }

  [[nodiscard]] double average() const
  {
    if (included() == 0) { return 0.0; }
    double s = 0.0;
    for (std::size_t i = 0, e = 0; i < percent.size(); ++i) {
      if (e < excluded.size() && excluded[e] == i) {
        ++e;
        continue;
      }
      s += percent[i];
    }
    return s / static_cast<double>(included());
  }

  [[nodiscard]] double maximum() const { return percent.empty() ? 0.0 : percent.max(); }
};

/// 100·|x_s − x_free| / max(x_free, ε) per user.
inline ShiftResult opinion_shift(const DenseVector & x_steady, const DenseVector & x_free)
{
  if (x_steady.size() != x_free.size()) { throw Error(ErrorKind::DimensionMismatch, "opinion_shift: sizes differ"); }
  ShiftResult r{DenseVector(x_free.size()), {}};
  for (std::size_t i = 0; i < x_free.size(); ++i) {
    if (x_free[i] < kShiftEpsilon) {
      r.excluded.push_back(i);
      continue;
    }
    r.percent[i] = 100.0 * std::abs(x_steady[i] - x_free[i]) / std::max(x_free[i], kShiftEpsilon);
  }
  return r;
}

/// The network with the recommender node deleted and rows rescaled proportionally.
inline OpinionNetwork remove_recommender(const OpinionNetwork & net, std::size_t rs_index)
{
  const std::size_t total = net.n_total();
  if (rs_index >= total) { throw Error(ErrorKind::InvalidIndex, "recommender index out of range"); }
  const std::size_t n = total - 1;
  DenseMatrix w(n, n);
  DenseVector lambda(n);
  DenseVector o0(n);
  for (std::size_t i = 0, ii = 0; i < total; ++i) {
    if (i == rs_index) { continue; }
    for (std::size_t j = 0, jj = 0; j < total; ++j) {
      if (j != rs_index) { w(ii, jj++) = net.adjacency(i, j); }
    }
    const double s = w.row_sum(ii);
    if (s > 0.0) {
      for (double & v : w.row(ii)) { v /= s; }
    } else {
      w(ii, ii) = 1.0;
    }
    lambda[ii] = net.stubbornness[i];
    o0[ii] = net.initial_opinions[i];
    ++ii;
  }
  return OpinionNetwork(std::move(w), std::move(lambda), std::move(o0));
}

inline DenseVector free_evolution_steady_state(const OpinionNetwork & net, std::size_t rs_index,
                                               const NumericSettings & s = default_settings)
{
  return fj_equilibrium(remove_recommender(net, rs_index), s);
}

/// Bernoulli draw with success probability clamp(1 − θ(x, u), 0, 1).
template <class Rng>
bool sample_engagement(const DenseVector & x, double u, Rng & rng)
{
  const double p = std::clamp(1.0 - theta(x, u), 0.0, 1.0);
  return std::bernoulli_distribution(p)(rng);
}

inline bool sample_engagement(const DenseVector & x, double u, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  return sample_engagement(x, u, rng);
}

struct ComparisonOptions
{
  std::size_t steps = 50;
  MpcOptions mpc;
  bool keep_traces = true;
};

struct ComparisonReport
{
  DenseVector x_mf;  ///< state after `steps` steps
  DenseVector x_mb;
  DenseVector x_free;
  double cost_mf = 0.0;  ///< cumulative Σ_{t<steps} θ
  double cost_mb = 0.0;
  double cost_mf_ss = 0.0;  ///< θ at t = steps with that step's input
  double cost_mb_ss = 0.0;
  double improvement_pct = 0.0;     ///< cumulative
  double improvement_ss_pct = 0.0;  ///< final-step
  ShiftResult shift_mf;
  ShiftResult shift_mb;
  double avg_shift_gap_pct = 0.0;  ///< avg MB shift − avg MF shift, in percentage points
  MbTarget target;
  std::optional<ClosedLoopTrace> trace_mf;
  std::optional<ClosedLoopTrace> trace_mb;
};

inline double improvement(double reference, double value)
{
  return reference > 0.0 ? 100.0 * (reference - value) / reference : 0.0;
}

/**
 * Runs both closed loops on the plant and compares costs and opinion shifts
 * against the recommender-free baseline of `net`.
 *
 * Throws TerminalInfeasible when the MPC problem has no solution at t = 0.
 */
inline ComparisonReport compare_controllers(const ControlledPlant & p, const OpinionNetwork & net, std::size_t rs_index,
                                            const ComparisonOptions & opt = {})
{
  ComparisonReport r;
  r.target = mb_target(p, true, opt.mpc.numerics);
  MpcController mpc(p, r.target, opt.mpc);
  MfController mf;
  ClosedLoopTrace tr_mf = closed_loop(p, mf, opt.steps);
  ClosedLoopTrace tr_mb = closed_loop(p, mpc, opt.steps);

  r.x_mf = tr_mf.states.back();
  r.x_mb = tr_mb.states.back();
  r.cost_mf = tr_mf.cumulative_cost();
  r.cost_mb = tr_mb.cumulative_cost();
  r.cost_mf_ss = tr_mf.final_cost();
  r.cost_mb_ss = tr_mb.final_cost();
  r.improvement_pct = improvement(r.cost_mf, r.cost_mb);
  r.improvement_ss_pct = improvement(r.cost_mf_ss, r.cost_mb_ss);

  r.x_free = free_evolution_steady_state(net, rs_index, opt.mpc.numerics);
  r.shift_mf = opinion_shift(r.x_mf, r.x_free);
  r.shift_mb = opinion_shift(r.x_mb, r.x_free);
  r.avg_shift_gap_pct = r.shift_mb.average() - r.shift_mf.average();
  if (opt.keep_traces) {
    r.trace_mf = std::move(tr_mf);
    r.trace_mb = std::move(tr_mb);
  }
  return r;
}

}  // namespace fjrec

#endif  // FJREC_ANALYSIS_HPP_
