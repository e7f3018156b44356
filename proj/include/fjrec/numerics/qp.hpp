#ifndef FJREC_NUMERICS_QP_HPP_
#define FJREC_NUMERICS_QP_HPP_

/**
 * @file
 * @brief Dense convex QP with linear equalities and box bounds.
 *
 * The problem is
 *
 *   min ½ xᵀPx + qᵀx   s.t.  Ex = f,  lo ≤ x ≤ hi
 *
 * with P symmetric positive semi-definite. Equalities are eliminated with a
 * rank-revealing null-space basis of the columns of E belonging to the free
 * variables; numerically dependent equality directions are dropped. The box
 * is handled by a primal active-set iteration that fixes variables at their
 * bounds. Whenever several bounds qualify for addition or release, the
 * lowest index is taken, which also rules out cycling.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "fjrec/error.hpp"
#include "fjrec/numerics/linalg.hpp"
#include "fjrec/numerics/matrix.hpp"
#include "fjrec/numerics/settings.hpp"

namespace fjrec {

class QpProblem
{
public:
  QpProblem(DenseMatrix hessian, DenseVector linear, DenseMatrix eq_matrix, DenseVector eq_rhs, DenseVector lower,
            DenseVector upper)
      : hessian_(std::move(hessian)),
        linear_(std::move(linear)),
        eq_matrix_(std::move(eq_matrix)),
        eq_rhs_(std::move(eq_rhs)),
        lower_(std::move(lower)),
        upper_(std::move(upper))
  {
    const std::size_t d = linear_.size();
    if (d == 0) { throw Error(ErrorKind::InvalidArgument, "QP needs at least one variable"); }
    if (hessian_.rows() != d || hessian_.cols() != d) { throw Error(ErrorKind::DimensionMismatch, "QP hessian shape"); }
    if (eq_matrix_.rows() == 0) {
      eq_matrix_ = DenseMatrix(0, d);
    } else if (eq_matrix_.cols() != d) {
      throw Error(ErrorKind::DimensionMismatch, "QP equality matrix columns");
    }
    if (eq_rhs_.size() != eq_matrix_.rows()) { throw Error(ErrorKind::DimensionMismatch, "QP equality rhs size"); }
    if (lower_.size() != d || upper_.size() != d) { throw Error(ErrorKind::DimensionMismatch, "QP bound sizes"); }
    for (std::size_t i = 0; i < d; ++i) {
      if (lower_[i] > upper_[i]) { throw Error(ErrorKind::InvalidArgument, "QP lower bound exceeds upper bound"); }
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) {
        const double s = 0.5 * (hessian_(i, j) + hessian_(j, i));
        hessian_(i, j) = s;
        hessian_(j, i) = s;
      }
    }
  }

  /// Box-only problem.
  QpProblem(DenseMatrix hessian, DenseVector linear, DenseVector lower, DenseVector upper)
      : QpProblem(std::move(hessian), std::move(linear), DenseMatrix(), DenseVector(), std::move(lower), std::move(upper))
  {}

  [[nodiscard]] std::size_t dim() const noexcept { return linear_.size(); }
  [[nodiscard]] std::size_t n_eq() const noexcept { return eq_matrix_.rows(); }
  [[nodiscard]] const DenseMatrix & hessian() const noexcept { return hessian_; }
  [[nodiscard]] const DenseVector & linear() const noexcept { return linear_; }
  [[nodiscard]] const DenseMatrix & eq_matrix() const noexcept { return eq_matrix_; }
  [[nodiscard]] const DenseVector & eq_rhs() const noexcept { return eq_rhs_; }
  [[nodiscard]] const DenseVector & lower() const noexcept { return lower_; }
  [[nodiscard]] const DenseVector & upper() const noexcept { return upper_; }

  [[nodiscard]] double objective(const DenseVector & x) const { return 0.5 * dot(x, hessian_ * x) + dot(linear_, x); }

private:
  DenseMatrix hessian_;
  DenseVector linear_;
  DenseMatrix eq_matrix_;
  DenseVector eq_rhs_;
  DenseVector lower_;
  DenseVector upper_;
};

enum class QpStatus { Optimal, Infeasible, MaxIterations };

inline const char * to_string(QpStatus s)
{
  switch (s) {
    case QpStatus::Optimal: return "Optimal";
    case QpStatus::Infeasible: return "Infeasible";
    case QpStatus::MaxIterations: return "MaxIterations";
  }
  return "Unknown";
}

struct QpSolution
{
  DenseVector point;
  double objective = 0.0;
  QpStatus status = QpStatus::MaxIterations;
  double kkt_residual = std::numeric_limits<double>::infinity();
  /// Indices of variables held at a bound.
  std::vector<std::size_t> active_set;
  DenseVector eq_multipliers;
  std::size_t iterations = 0;
};

namespace detail {

enum class Bound : std::int8_t { Free = 0, Lower = -1, Upper = 1 };

struct ActiveSetState
{
  DenseVector x;
  std::vector<Bound> bound;
  std::size_t iterations = 0;
  bool converged = false;
};

inline std::vector<std::size_t> free_indices(const std::vector<Bound> & bound)
{
  std::vector<std::size_t> f;
  for (std::size_t i = 0; i < bound.size(); ++i) {
    if (bound[i] == Bound::Free) { f.push_back(i); }
  }
  return f;
}

/// E restricted to the columns in `cols`, transposed (|cols| × m).
inline DenseMatrix columns_transposed(const DenseMatrix & e, const std::vector<std::size_t> & cols)
{
  DenseMatrix t(cols.size(), e.rows());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    for (std::size_t i = 0; i < e.rows(); ++i) { t(k, i) = e(i, cols[k]); }
  }
  return t;
}

struct Scales
{
  double dual = 1.0;
  double primal = 1.0;
};

inline Scales problem_scales(const QpProblem & p, const DenseVector & x)
{
  Scales s;
  s.dual = std::max({1.0, p.linear().norm_inf(), (p.hessian() * x).norm_inf()});
  s.primal = std::max({1.0, p.eq_rhs().norm_inf(), p.eq_matrix().max_abs()});
  return s;
}

/// Equality multipliers by least squares on the free columns, and the resulting box multipliers.
struct Multipliers
{
  DenseVector eq;
  DenseVector reduced;  ///< Px + q + Eᵀμ
};

inline Multipliers compute_multipliers(const QpProblem & p, const DenseVector & x, const std::vector<std::size_t> & free,
                                       double rank_tol)
{
  DenseVector g = p.hessian() * x + p.linear();
  DenseVector mu(p.n_eq());
  if (p.n_eq() > 0 && !free.empty()) {
    const PivotedQr qr(columns_transposed(p.eq_matrix(), free), rank_tol);
    DenseVector neg_g(free.size());
    for (std::size_t k = 0; k < free.size(); ++k) { neg_g[k] = -g[free[k]]; }
    mu = qr.least_squares(neg_g);
  }
  if (p.n_eq() > 0) { g += transpose_times(p.eq_matrix(), mu); }
  return {std::move(mu), std::move(g)};
}

/**
 * Primal active-set iteration from a point feasible for the box and
 * (to tolerance) for the equalities. Steps stay in the numerical null space
 * of the free equality columns, so equality feasibility is preserved.
 */
inline void active_set_iterate(const QpProblem & p, ActiveSetState & st, double tol, double rank_tol,
                               std::size_t max_iter)
{
  const std::size_t d = p.dim();
  const std::size_t m = p.n_eq();
  const DenseMatrix & h = p.hessian();
  st.converged = false;

  while (st.iterations < max_iter) {
    ++st.iterations;
    const std::vector<std::size_t> free = free_indices(st.bound);
    const std::size_t k = free.size();
    const DenseVector g = h * st.x + p.linear();
    const Scales scales = problem_scales(p, st.x);

    DenseVector step(d);
    bool ray = false;
    if (k > 0) {
      DenseMatrix z;
      if (m > 0) {
        z = PivotedQr(columns_transposed(p.eq_matrix(), free), rank_tol).complement_basis();
      } else {
        z = DenseMatrix::identity(k);
      }
      const std::size_t nz = z.cols();
      if (nz > 0) {
        // reduced Hessian ZᵀH_FF Z and gradient Zᵀg_F
        DenseMatrix hz(k, nz);
        for (std::size_t a = 0; a < k; ++a) {
          for (std::size_t b = 0; b < k; ++b) {
            const double hab = h(free[a], free[b]);
            if (hab == 0.0) { continue; }
            for (std::size_t c = 0; c < nz; ++c) { hz(a, c) += hab * z(b, c); }
          }
        }
        DenseMatrix hr(nz, nz);
        DenseVector gr(nz);
        for (std::size_t a = 0; a < k; ++a) {
          for (std::size_t c = 0; c < nz; ++c) {
            const double zac = z(a, c);
            if (zac == 0.0) { continue; }
            gr[c] += zac * g[free[a]];
            for (std::size_t e = 0; e < nz; ++e) { hr(c, e) += zac * hz(a, e); }
          }
        }
        DenseVector y(nz);
        if (auto sol = cholesky_solve(hr, -1.0 * gr)) {
          y = std::move(*sol);
        } else {
          // singular reduced Hessian: pseudo-solve, or a descent ray if the
          // gradient has a component in its null space
          const SymmetricEigen eig = symmetric_eigen(hr);
          const double top = std::max(eig.values.norm_inf(), 1e-300);
          DenseVector null_part(nz);
          for (std::size_t i = 0; i < nz; ++i) {
            double c = 0.0;
            for (std::size_t j = 0; j < nz; ++j) { c += eig.vectors(j, i) * gr[j]; }
            if (eig.values[i] > 1e-12 * top) {
              for (std::size_t j = 0; j < nz; ++j) { y[j] -= c / eig.values[i] * eig.vectors(j, i); }
            } else {
              for (std::size_t j = 0; j < nz; ++j) { null_part[j] -= c * eig.vectors(j, i); }
            }
          }
          if (null_part.norm_inf() > tol * scales.dual) {
            y = std::move(null_part);
            ray = true;
          }
        }
        const DenseVector pf = z * y;
        for (std::size_t a = 0; a < k; ++a) { step[free[a]] = pf[a]; }
      }
    }

    const double step_size = step.norm_inf();
    if (step_size > 1e-15 * (1.0 + st.x.norm_inf())) {
      // ratio test against the box; ties resolve to the lowest index
      double alpha = ray ? std::numeric_limits<double>::infinity() : 1.0;
      std::optional<std::size_t> blocking;
      Bound blocking_side = Bound::Free;
      for (std::size_t i : free) {
        double a = std::numeric_limits<double>::infinity();
        Bound side = Bound::Free;
        if (step[i] < 0.0) {
          a = (p.lower()[i] - st.x[i]) / step[i];
          side = Bound::Lower;
        } else if (step[i] > 0.0) {
          a = (p.upper()[i] - st.x[i]) / step[i];
          side = Bound::Upper;
        }
        if (side == Bound::Free) { continue; }
        a = std::max(a, 0.0);
        if (a < alpha) {
          alpha = a;
          blocking = i;
          blocking_side = side;
        }
      }
      if (!blocking && ray) {
        throw Error(ErrorKind::QpFailure, "QP objective unbounded below along a feasible ray");
      }
      st.x.axpy(alpha, step);
      if (blocking) {
        const std::size_t b = *blocking;
        st.x[b] = blocking_side == Bound::Lower ? p.lower()[b] : p.upper()[b];
        st.bound[b] = blocking_side;
        continue;
      }
    }

    // subspace minimum reached: check the signs of the bound multipliers
    const Multipliers mult = compute_multipliers(p, st.x, free_indices(st.bound), rank_tol);
    const double dual_tol = tol * problem_scales(p, st.x).dual;
    std::optional<std::size_t> release;
    for (std::size_t i = 0; i < d; ++i) {
      if (st.bound[i] == Bound::Free || p.lower()[i] == p.upper()[i]) { continue; }
      const double lambda = st.bound[i] == Bound::Lower ? mult.reduced[i] : -mult.reduced[i];
      if (lambda < -dual_tol) {
        release = i;
        break;
      }
    }
    if (!release) {
      st.converged = true;
      return;
    }
    st.bound[*release] = Bound::Free;
  }
}

inline DenseVector clamp(DenseVector x, const DenseVector & lo, const DenseVector & hi)
{
  for (std::size_t i = 0; i < x.size(); ++i) { x[i] = std::clamp(x[i], lo[i], hi[i]); }
  return x;
}

inline std::vector<Bound> bounds_at(const DenseVector & x, const DenseVector & lo, const DenseVector & hi)
{
  std::vector<Bound> b(x.size(), Bound::Free);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= lo[i]) {
      b[i] = Bound::Lower;
    } else if (x[i] >= hi[i]) {
      b[i] = Bound::Upper;
    }
  }
  return b;
}

/// Moves the free variables by the minimum-norm correction that zeroes the equality residual, if it fits the box.
inline void polish_equalities(const QpProblem & p, DenseVector & x, double rank_tol)
{
  if (p.n_eq() == 0) { return; }
  const std::vector<Bound> bound = bounds_at(x, p.lower(), p.upper());
  const std::vector<std::size_t> free = free_indices(bound);
  if (free.empty()) { return; }
  const DenseVector residual = p.eq_rhs() - p.eq_matrix() * x;
  const PivotedQr qr(columns_transposed(p.eq_matrix(), free), rank_tol);
  const DenseVector delta = qr.min_norm_transposed(residual);
  DenseVector candidate = x;
  for (std::size_t k = 0; k < free.size(); ++k) { candidate[free[k]] += delta[k]; }
  for (std::size_t i : free) {
    if (candidate[i] < p.lower()[i] || candidate[i] > p.upper()[i]) { return; }
  }
  x = std::move(candidate);
}

inline double equality_residual(const QpProblem & p, const DenseVector & x)
{
  if (p.n_eq() == 0) { return 0.0; }
  return (p.eq_matrix() * x - p.eq_rhs()).norm_inf();
}

}  // namespace detail

/**
 * @brief Solves a convex QP by null-space elimination and primal active set.
 *
 * @param warm_start optional initial point; used when it is feasible to
 *        tolerance after clamping to the box (its at-bound variables seed the
 *        active set), otherwise a feasibility phase runs first.
 */
inline QpSolution solve_qp(const QpProblem & p, double tol, std::size_t max_iter,
                           const std::optional<DenseVector> & warm_start = std::nullopt,
                           const NumericSettings & settings = default_settings)
{
  using detail::Bound;
  const std::size_t d = p.dim();
  const double feas_tol = settings.qp_feasibility_tol * std::max(1.0, p.eq_rhs().norm_inf());
  QpSolution sol;

  std::optional<DenseVector> start;
  if (warm_start && warm_start->size() == d) {
    DenseVector x = detail::clamp(*warm_start, p.lower(), p.upper());
    if (detail::equality_residual(p, x) > feas_tol) { detail::polish_equalities(p, x, settings.qp_rank_tol); }
    if (detail::equality_residual(p, x) <= feas_tol) { start = std::move(x); }
  }

  std::size_t used = 0;
  if (!start) {
    DenseVector x(d);
    if (p.n_eq() > 0) {
      // feasibility phase: min ½‖Ex − f‖² over the box
      const DenseMatrix et = p.eq_matrix().transpose();
      const PivotedQr qr(et, settings.qp_rank_tol);
      x = detail::clamp(qr.min_norm_transposed(p.eq_rhs()), p.lower(), p.upper());
      QpProblem phase1(et * p.eq_matrix(), -1.0 * transpose_times(p.eq_matrix(), p.eq_rhs()), p.lower(), p.upper());
      detail::ActiveSetState st{x, detail::bounds_at(x, p.lower(), p.upper())};
      for (std::size_t i = 0; i < d; ++i) {
        if (p.lower()[i] < p.upper()[i] && st.bound[i] != Bound::Free) { st.bound[i] = Bound::Free; }
        if (p.lower()[i] == p.upper()[i]) { st.bound[i] = Bound::Lower; }
      }
      detail::active_set_iterate(phase1, st, 1e-14, settings.qp_rank_tol, max_iter);
      used = st.iterations;
      x = std::move(st.x);
      detail::polish_equalities(p, x, settings.qp_rank_tol);
      if (detail::equality_residual(p, x) > feas_tol) {
        sol.point = std::move(x);
        sol.status = QpStatus::Infeasible;
        sol.objective = p.objective(sol.point);
        sol.iterations = used;
        return sol;
      }
    } else {
      x = detail::clamp(std::move(x), p.lower(), p.upper());
    }
    start = std::move(x);
  }

  detail::ActiveSetState st{std::move(*start), {}};
  st.bound = detail::bounds_at(st.x, p.lower(), p.upper());
  st.iterations = used;
  detail::active_set_iterate(p, st, tol, settings.qp_rank_tol, max_iter + used);

  // KKT residual
  const std::vector<std::size_t> free = detail::free_indices(st.bound);
  const detail::Multipliers mult = detail::compute_multipliers(p, st.x, free, settings.qp_rank_tol);
  const detail::Scales scales = detail::problem_scales(p, st.x);
  double stationarity = 0.0;
  double dual_infeasibility = 0.0;
  double complementarity = 0.0;
  double box_violation = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    box_violation = std::max({box_violation, p.lower()[i] - st.x[i], st.x[i] - p.upper()[i]});
    if (st.bound[i] == Bound::Free) {
      stationarity = std::max(stationarity, std::abs(mult.reduced[i]));
      continue;
    }
    if (p.lower()[i] == p.upper()[i]) { continue; }
    const double lambda = st.bound[i] == Bound::Lower ? mult.reduced[i] : -mult.reduced[i];
    const double gap = st.bound[i] == Bound::Lower ? st.x[i] - p.lower()[i] : p.upper()[i] - st.x[i];
    dual_infeasibility = std::max(dual_infeasibility, -lambda);
    complementarity = std::max(complementarity, std::abs(lambda * gap));
  }
  const double eq_res = detail::equality_residual(p, st.x);
  sol.kkt_residual = std::max({stationarity / scales.dual, dual_infeasibility / scales.dual,
                               complementarity / scales.dual, eq_res / scales.primal, box_violation});
  sol.point = std::move(st.x);
  sol.objective = p.objective(sol.point);
  sol.eq_multipliers = mult.eq;
  sol.iterations = st.iterations;
  for (std::size_t i = 0; i < d; ++i) {
    if (st.bound[i] != Bound::Free) { sol.active_set.push_back(i); }
  }
  sol.status = st.converged && sol.kkt_residual <= tol ? QpStatus::Optimal : QpStatus::MaxIterations;
  return sol;
}

inline QpSolution solve_qp(const QpProblem & p, const NumericSettings & settings = default_settings)
{
  return solve_qp(p, settings.qp_kkt_tol, settings.qp_max_iter, std::nullopt, settings);
}

}  // namespace fjrec

#endif  // FJREC_NUMERICS_QP_HPP_
