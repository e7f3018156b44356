#ifndef FJREC_CONTROLLERS_HPP_
#define FJREC_CONTROLLERS_HPP_

/**
 * @file
 * @brief Engagement cost, model-free averaging controller, model-based
 * steady-state target and receding-horizon MPC, plus a shared closed-loop runner.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fjrec/error.hpp"
#include "fjrec/numerics/linalg.hpp"
#include "fjrec/numerics/matrix.hpp"
#include "fjrec/numerics/qp.hpp"
#include "fjrec/numerics/settings.hpp"
#include "fjrec/plant.hpp"

namespace fjrec {

/// ‖x − u·1‖²
inline double theta(const DenseVector & x, double u)
{
  double s = 0.0;
  for (double v : x) { s += (v - u) * (v - u); }
  return s;
}

/// Pointwise minimiser of θ(x, ·): the mean opinion.
inline double mf_input(const DenseVector & x) { return std::clamp(x.mean(), 0.0, 1.0); }

/// A + (1/n)B·1ᵀ, the model-free closed-loop state matrix.
inline DenseMatrix mf_closed_loop_matrix(const ControlledPlant & p)
{
  DenseMatrix m = p.a;
  const double inv_n = 1.0 / static_cast<double>(p.n());
  for (std::size_t i = 0; i < p.n(); ++i) {
    for (double & v : m.row(i)) { v += inv_n * p.b[i]; }
  }
  return m;
}

/// S_MF = (I − A − (1/n)B1ᵀ)⁻¹Λ̃
inline DenseMatrix mf_gain(const ControlledPlant & p, const NumericSettings & s = default_settings)
{
  const DenseMatrix g = DenseMatrix::identity(p.n()) - mf_closed_loop_matrix(p);
  return invert(g, s) * DenseMatrix::diagonal(p.lambda_tilde);
}

inline DenseVector mf_equilibrium(const ControlledPlant & p, const NumericSettings & s = default_settings)
{
  const DenseMatrix g = DenseMatrix::identity(p.n()) - mf_closed_loop_matrix(p);
  return solve_linear(g, p.offset(), s);
}

/// Stage cost in quadratic form over z = (x, u): zᵀHz = θ(x, u).
struct StageCostH
{
  DenseMatrix h;       ///< [[I, −1], [−1ᵀ, n]]
  DenseVector linear;  ///< 2H·(x*, u*)

  static StageCostH make(const DenseVector & x_star, double u_star)
  {
    const std::size_t n = x_star.size();
    StageCostH c{DenseMatrix::identity(n + 1), DenseVector(n + 1)};
    for (std::size_t i = 0; i < n; ++i) {
      c.h(i, n) = -1.0;
      c.h(n, i) = -1.0;
    }
    c.h(n, n) = static_cast<double>(n);
    DenseVector z(n + 1);
    for (std::size_t i = 0; i < n; ++i) { z[i] = x_star[i]; }
    z[n] = u_star;
    c.linear = 2.0 * (c.h * z);
    return c;
  }

  [[nodiscard]] double value(const DenseVector & x, double u) const
  {
    DenseVector z(x.size() + 1);
    for (std::size_t i = 0; i < x.size(); ++i) { z[i] = x[i]; }
    z[x.size()] = u;
    return dot(z, h * z);
  }
};

struct MbTarget
{
  DenseVector x_star;
  double u_star = 0.0;
  DenseMatrix s_mb;
  DenseVector v;
  /// Closed-form steady state before any QP override.
  DenseVector x_closed_form;
  /// Steady state from the direct (x, u) QP; empty if the cross-check was skipped.
  DenseVector x_qp;
  double u_qp = 0.0;
  std::vector<std::string> diagnostics;
};

inline constexpr double kTargetAgreementTol = 1e-7;

namespace detail {

/// min θ(x, u) s.t. (I − A)x − Bu = Λ̃x0, u ∈ [0, 1]; x boxed loosely.
inline QpSolution mb_target_qp(const ControlledPlant & p, const NumericSettings & s)
{
  const std::size_t n = p.n();
  const StageCostH stage = StageCostH::make(DenseVector(n), 0.0);
  DenseMatrix e(n, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) { e(i, j) = (i == j ? 1.0 : 0.0) - p.a(i, j); }
    e(i, n) = -p.b[i];
  }
  DenseVector lo(n + 1, -1.0);
  DenseVector hi(n + 1, 2.0);
  lo[n] = 0.0;
  hi[n] = 1.0;
  const QpProblem qp(2.0 * stage.h, DenseVector(n + 1), e, p.offset(), lo, hi);
  return solve_qp(qp, s);
}

}  // namespace detail

/**
 * Optimal steady state (x*, u*) of the plant under the engagement cost.
 *
 * x* comes from the closed form S_MB·x0, u* from least squares on the
 * steady-state equation. With `cross_check` the same problem is solved as a
 * QP in (x, u); on disagreement above 1e-7 the QP answer is used and a
 * diagnostic is recorded.
 */
inline MbTarget mb_target(const ControlledPlant & p, bool cross_check = true,
                          const NumericSettings & s = default_settings)
{
  const std::size_t n = p.n();
  const DenseMatrix i_minus_a = DenseMatrix::identity(n) - p.a;
  const LuDecomposition lu(i_minus_a, s.pivot_tol);

  MbTarget t;
  t.v = lu.solve(p.b);
  for (double & x : t.v) { x -= 1.0; }
  const double v_sum = t.v.sum();
  if (std::abs(v_sum) < s.pivot_tol) { throw Error(ErrorKind::SingularMatrix, "vᵀ1 vanishes"); }
  DenseMatrix g_mb = i_minus_a - (1.0 / v_sum) * outer(p.b, t.v);
  t.s_mb = invert(g_mb, s) * DenseMatrix::diagonal(p.lambda_tilde);
  t.x_closed_form = solve_linear(g_mb, p.offset(), s);
  t.x_star = t.x_closed_form;

  const double bb = dot(p.b, p.b);
  if (bb > 1e-28) {
    const DenseVector r = i_minus_a * t.x_star - p.offset();
    t.u_star = dot(p.b, r) / bb;
  } else {
    t.u_star = t.x_star.mean();
  }
  const double clamped = std::clamp(t.u_star, 0.0, 1.0);
  if (std::abs(clamped - t.u_star) > kTargetAgreementTol) {
    t.diagnostics.push_back("u* clamped from " + std::to_string(t.u_star));
  }
  t.u_star = clamped;

  if (cross_check) {
    const QpSolution q = detail::mb_target_qp(p, s);
    if (q.status != QpStatus::Optimal) {
      throw Error(ErrorKind::QpFailure, std::string("steady-state QP: ") + to_string(q.status));
    }
    t.x_qp = DenseVector(n);
    for (std::size_t i = 0; i < n; ++i) { t.x_qp[i] = q.point[i]; }
    t.u_qp = q.point[n];
    const double diff = max_abs_diff(t.x_qp, t.x_closed_form);
    if (diff > kTargetAgreementTol) {
      t.diagnostics.push_back("closed form differs from QP by " + std::to_string(diff) + "; using QP");
      t.x_star = t.x_qp;
      t.u_star = std::clamp(t.u_qp, 0.0, 1.0);
    }
  }
  return t;
}

struct MpcOptions
{
  std::size_t horizon = 50;
  /// Replaces the terminal equality by weight·‖x_T − x*‖² when set.
  std::optional<double> soft_terminal;
  NumericSettings numerics = default_settings;
};

inline constexpr double kTerminalTol = 1e-7;

struct OcpSolution
{
  DenseVector inputs;
  std::vector<DenseVector> predicted_states;  ///< x_0 … x_T
  double cost = 0.0;                          ///< Σ_{k<T} θ(x_k, u_k)
  QpStatus status = QpStatus::MaxIterations;
  double kkt_residual = 0.0;
  double terminal_residual = 0.0;
  std::size_t iterations = 0;
};

/**
 * Receding-horizon controller in condensed form.
 *
 * With x_k = A^k x + d_k + Γ_k u the objective is Σ‖M_k u + f_k‖² where
 * M_k = Γ_k − 1e_kᵀ, so the Hessian and the terminal rows Γ_T depend only on
 * the plant and are built once.
 */
class MpcController
{
public:
  MpcController(ControlledPlant plant, MbTarget target, MpcOptions options = {})
      : plant_(std::move(plant)), target_(std::move(target)), opt_(std::move(options))
  {
    const std::size_t n = plant_.n();
    const std::size_t t_len = opt_.horizon;
    if (t_len == 0) { throw Error(ErrorKind::InvalidArgument, "horizon must be positive"); }
    if (target_.x_star.size() != n) { throw Error(ErrorKind::DimensionMismatch, "target does not match plant"); }
    if (!opt_.soft_terminal && t_len < n) {
      throw Error(ErrorKind::TerminalInfeasible, "horizon shorter than state dimension cannot meet terminal equality");
    }
    if (opt_.soft_terminal && !(*opt_.soft_terminal > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "soft terminal weight must be positive");
    }

    // powers A^k and offsets d_k = Σ_{j<k} A^j Λ̃x0
    powers_.reserve(t_len + 1);
    powers_.push_back(DenseMatrix::identity(n));
    offsets_.reserve(t_len + 1);
    offsets_.emplace_back(n);
    const DenseVector c = plant_.offset();
    for (std::size_t k = 1; k <= t_len; ++k) {
      powers_.push_back(plant_.a * powers_.back());
      offsets_.push_back(plant_.a * offsets_.back() + c);
    }
    // impulse responses A^m B
    std::vector<DenseVector> ab;
    ab.reserve(t_len);
    ab.push_back(plant_.b);
    for (std::size_t m = 1; m < t_len; ++m) { ab.push_back(plant_.a * ab.back()); }

    // M_k as n×T, stacked
    m_blocks_.reserve(t_len);
    for (std::size_t k = 0; k < t_len; ++k) {
      DenseMatrix mk(n, t_len);
      for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < n; ++i) { mk(i, j) = ab[k - 1 - j][i]; }
      }
      for (std::size_t i = 0; i < n; ++i) { mk(i, k) -= 1.0; }
      m_blocks_.push_back(std::move(mk));
    }
    terminal_ = DenseMatrix(n, t_len);
    for (std::size_t j = 0; j < t_len; ++j) {
      for (std::size_t i = 0; i < n; ++i) { terminal_(i, j) = ab[t_len - 1 - j][i]; }
    }

    hessian_ = DenseMatrix(t_len, t_len);
    for (const auto & mk : m_blocks_) { hessian_ += mk.transpose() * mk; }
    if (opt_.soft_terminal) { hessian_ += *opt_.soft_terminal * (terminal_.transpose() * terminal_); }
    hessian_ *= 2.0;
  }

  [[nodiscard]] const ControlledPlant & plant() const noexcept { return plant_; }
  [[nodiscard]] const MbTarget & target() const noexcept { return target_; }
  [[nodiscard]] const MpcOptions & options() const noexcept { return opt_; }
  [[nodiscard]] std::size_t horizon() const noexcept { return opt_.horizon; }
  [[nodiscard]] const std::optional<DenseVector> & warm_start() const noexcept { return warm_; }
  [[nodiscard]] const std::optional<OcpSolution> & last_solution() const noexcept { return last_; }

  void reset() noexcept
  {
    warm_.reset();
    last_.reset();
  }

  /// Solves the finite-horizon problem from x_now using the stored warm start.
  [[nodiscard]] OcpSolution solve(const DenseVector & x_now) const
  {
    const std::size_t n = plant_.n();
    const std::size_t t_len = opt_.horizon;
    if (x_now.size() != n) { throw Error(ErrorKind::DimensionMismatch, "MPC state size"); }

    DenseVector q(t_len);
    for (std::size_t k = 0; k < t_len; ++k) {
      const DenseVector fk = powers_[k] * x_now + offsets_[k];
      q += transpose_times(m_blocks_[k], fk);
    }
    const DenseVector ft = powers_[t_len] * x_now + offsets_[t_len];
    const DenseVector rhs = target_.x_star - ft;
    if (opt_.soft_terminal) { q.axpy(-*opt_.soft_terminal, transpose_times(terminal_, rhs)); }
    q *= 2.0;

    const DenseVector lo(t_len, 0.0);
    const DenseVector hi(t_len, 1.0);
    const QpProblem qp = opt_.soft_terminal ? QpProblem(hessian_, q, lo, hi)
                                            : QpProblem(hessian_, q, terminal_, rhs, lo, hi);
    const NumericSettings & s = opt_.numerics;
    // without a previous solution, the constant target input already meets the
    // terminal equality up to A^T(x_now − x*)
    const DenseVector start = warm_ ? *warm_ : DenseVector(t_len, target_.u_star);
    const QpSolution sol = solve_qp(qp, s.qp_kkt_tol, s.qp_max_iter, start, s);
    if (sol.status == QpStatus::Infeasible) {
      throw Error(ErrorKind::TerminalInfeasible, "terminal state unreachable within the horizon");
    }
    if (sol.status != QpStatus::Optimal) {
      throw Error(ErrorKind::QpFailure, "MPC QP: " + std::string(to_string(sol.status)) +
                                            " (kkt " + std::to_string(sol.kkt_residual) + ")");
    }

    OcpSolution out;
    out.inputs = sol.point;
    for (double & u : out.inputs) { u = std::clamp(u, 0.0, 1.0); }
    out.status = sol.status;
    out.kkt_residual = sol.kkt_residual;
    out.iterations = sol.iterations;
    out.predicted_states.reserve(t_len + 1);
    out.predicted_states.push_back(x_now);
    for (std::size_t k = 0; k < t_len; ++k) {
      const DenseVector & x = out.predicted_states.back();
      out.cost += theta(x, out.inputs[k]);
      DenseVector next = plant_.a * x;
      for (std::size_t i = 0; i < n; ++i) { next[i] += plant_.b[i] * out.inputs[k] + plant_.lambda_tilde[i] * plant_.x0[i]; }
      out.predicted_states.push_back(std::move(next));
    }
    out.terminal_residual = max_abs_diff(out.predicted_states.back(), target_.x_star);
    if (!opt_.soft_terminal && out.terminal_residual > kTerminalTol * (target_.x_star.norm_inf() + 1.0)) {
      throw Error(ErrorKind::TerminalInfeasible,
                  "terminal residual " + std::to_string(out.terminal_residual) + " above tolerance");
    }
    return out;
  }

  /// First optimal input; stores the shifted sequence (tail + u*) as next warm start.
  double input(const DenseVector & x_now)
  {
    OcpSolution sol = solve(x_now);
    DenseVector shifted(opt_.horizon);
    for (std::size_t k = 0; k + 1 < opt_.horizon; ++k) { shifted[k] = sol.inputs[k + 1]; }
    shifted[opt_.horizon - 1] = target_.u_star;
    warm_ = std::move(shifted);
    const double u = sol.inputs[0];
    last_ = std::move(sol);
    return u;
  }

  /// V*_t of the most recent solve.
  [[nodiscard]] double last_value() const { return last_ ? last_->cost : 0.0; }

private:
  ControlledPlant plant_;
  MbTarget target_;
  MpcOptions opt_;
  std::vector<DenseMatrix> powers_;
  std::vector<DenseVector> offsets_;
  std::vector<DenseMatrix> m_blocks_;
  DenseMatrix terminal_;
  DenseMatrix hessian_;
  std::optional<DenseVector> warm_;
  std::optional<OcpSolution> last_;
};

inline OcpSolution solve_ocp(const MpcController & c, const DenseVector & x_now) { return c.solve(x_now); }

inline double mpc_input(MpcController & c, const DenseVector & x_now) { return c.input(x_now); }

struct MfController
{
  double input(const DenseVector & x) const { return mf_input(x); }
};

/**
 * Closed-loop trace over `steps` applied inputs.
 *
 * states, inputs and costs have steps + 1 entries: the last input is what the
 * controller would apply at x(steps) and is recorded but not applied, so
 * costs.back() is the cost at the final step.
 */
struct ClosedLoopTrace
{
  std::vector<DenseVector> states;
  std::vector<double> inputs;
  std::vector<double> costs;
  /// V*_t per step for MPC runs, empty otherwise.
  std::vector<double> values;

  /// Σ_{t<steps} θ(x(t), u(t))
  [[nodiscard]] double cumulative_cost() const
  {
    double s = 0.0;
    for (std::size_t t = 0; t + 1 < costs.size(); ++t) { s += costs[t]; }
    return s;
  }

  [[nodiscard]] double final_cost() const { return costs.back(); }
};

template <class Controller>
ClosedLoopTrace closed_loop(const ControlledPlant & p, Controller && controller, std::size_t steps)
{
  if (steps == 0) { throw Error(ErrorKind::InvalidArgument, "closed loop needs at least one step"); }
  ClosedLoopTrace tr;
  tr.states.reserve(steps + 1);
  tr.inputs.reserve(steps + 1);
  tr.costs.reserve(steps + 1);
  DenseVector x = p.x0;
  for (std::size_t t = 0; t <= steps; ++t) {
    const double u = controller.input(x);
    tr.states.push_back(x);
    tr.inputs.push_back(u);
    tr.costs.push_back(theta(x, u));
    if constexpr (requires { controller.last_value(); }) { tr.values.push_back(controller.last_value()); }
    if (t < steps) { x = plant_step(p, x, u); }
  }
  return tr;
}

}  // namespace fjrec

#endif  // FJREC_CONTROLLERS_HPP_
