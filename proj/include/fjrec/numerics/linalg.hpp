#ifndef FJREC_NUMERICS_LINALG_HPP_
#define FJREC_NUMERICS_LINALG_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fjrec/error.hpp"
#include "fjrec/numerics/matrix.hpp"
#include "fjrec/numerics/settings.hpp"

namespace fjrec {

/// LU factorization with partial (row) pivoting, PA = LU stored in place.
class LuDecomposition
{
public:
  explicit LuDecomposition(const DenseMatrix & a, double pivot_tol = default_settings.pivot_tol)
      : lu_(a), perm_(a.rows())
  {
    if (!a.is_square() || a.rows() == 0) { throw Error(ErrorKind::DimensionMismatch, "LU needs a non-empty square matrix"); }
    const std::size_t n = a.rows();
    for (std::size_t i = 0; i < n; ++i) { perm_[i] = i; }
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t p = k;
      double best = std::abs(lu_(k, k));
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(lu_(i, k)) > best) {
          best = std::abs(lu_(i, k));
          p = i;
        }
      }
      if (best < pivot_tol) {
        throw Error(ErrorKind::SingularMatrix, "pivot " + std::to_string(best) + " at column " + std::to_string(k));
      }
      if (p != k) {
        std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
        std::swap(perm_[k], perm_[p]);
      }
      const double pivot = lu_(k, k);
      for (std::size_t i = k + 1; i < n; ++i) {
        const double f = lu_(i, k) / pivot;
        lu_(i, k) = f;
        if (f == 0.0) { continue; }
        for (std::size_t j = k + 1; j < n; ++j) { lu_(i, j) -= f * lu_(k, j); }
      }
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return lu_.rows(); }

  [[nodiscard]] DenseVector solve(const DenseVector & b) const
  {
    const std::size_t n = size();
    if (b.size() != n) { throw Error(ErrorKind::DimensionMismatch, "LU solve: rhs size"); }
    DenseVector x(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = b[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) { s -= lu_(i, j) * x[j]; }
      x[i] = s;
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = x[i];
      for (std::size_t j = i + 1; j < n; ++j) { s -= lu_(i, j) * x[j]; }
      x[i] = s / lu_(i, i);
    }
    return x;
  }

private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

/// Solves Ax = b with one step of iterative refinement.
inline DenseVector solve_linear(const DenseMatrix & a, const DenseVector & b, const NumericSettings & s = default_settings)
{
  if (!a.is_square()) { throw Error(ErrorKind::DimensionMismatch, "solve_linear: matrix not square"); }
  if (b.size() != a.rows()) { throw Error(ErrorKind::DimensionMismatch, "solve_linear: rhs size"); }
  const LuDecomposition lu(a, s.pivot_tol);
  DenseVector x = lu.solve(b);
  x += lu.solve(b - a * x);
  return x;
}

inline DenseMatrix invert(const DenseMatrix & a, const NumericSettings & s = default_settings)
{
  if (!a.is_square()) { throw Error(ErrorKind::DimensionMismatch, "invert: matrix not square"); }
  const std::size_t n = a.rows();
  const LuDecomposition lu(a, s.pivot_tol);
  DenseMatrix inv(n, n);
  DenseVector e(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    DenseVector c = lu.solve(e);
    c += lu.solve(e - a * c);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) { inv(i, j) = c[i]; }
  }
  return inv;
}

namespace detail {

/// Result of one power-iteration run; nullopt means the run did not settle.
inline std::optional<double> power_run(const DenseMatrix & m, DenseVector x, double tol, std::size_t budget)
{
  x *= 1.0 / x.norm_inf();
  double prev = -1.0;
  double prev_delta = -1.0;
  for (std::size_t k = 0; k < budget; ++k) {
    DenseVector y = m * x;
    const double mu = y.norm_inf();
    if (mu == 0.0) { return 0.0; }

    // Collatz-Wielandt bracket, valid when the iterate is strictly positive.
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    bool positive = true;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] <= 1e-150) {
        positive = false;
        break;
      }
      lo = std::min(lo, y[i] / x[i]);
      hi = std::max(hi, y[i] / x[i]);
    }
    if (positive && hi - lo <= tol) { return 0.5 * (hi + lo); }

    y *= 1.0 / mu;
    if (y == x) { return mu; }  // exact eigenvector
    const double delta = std::abs(mu - prev);
    if (prev >= 0.0) {
      // geometric tail estimate of the remaining error
      if (prev_delta > 0.0) {
        const double ratio = delta / prev_delta;
        if (ratio < 1.0 && delta * ratio / (1.0 - ratio) <= tol && delta <= tol) { return mu; }
      }
    }
    prev_delta = prev >= 0.0 ? delta : -1.0;
    prev = mu;
    x = std::move(y);
  }
  return std::nullopt;
}

/// True iff sI − A is a nonsingular M-matrix (A nonnegative), i.e. s > ρ(A):
/// Gaussian elimination without pivoting must keep every pivot positive.
inline bool exceeds_spectral_radius(const DenseMatrix & a, double s)
{
  const std::size_t n = a.rows();
  DenseMatrix m = -1.0 * a;
  for (std::size_t i = 0; i < n; ++i) { m(i, i) += s; }
  for (std::size_t k = 0; k < n; ++k) {
    const double pivot = m(k, k);
    if (!(pivot > 0.0)) { return false; }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m(i, k) / pivot;
      if (f == 0.0) { continue; }
      for (std::size_t j = k + 1; j < n; ++j) { m(i, j) -= f * m(k, j); }
    }
  }
  return true;
}

/// Bisection on the M-matrix test over [0, max row sum].
inline double spectral_radius_bisection(const DenseMatrix & a, double tol)
{
  double lo = 0.0;
  double hi = a.norm_inf() + tol;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (exceeds_spectral_radius(a, mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/**
 * @brief Dominant eigenvalue modulus of a nonnegative square matrix.
 *
 * Power iteration from the all-ones vector. If that run stagnates (periodic
 * matrices make the norm ratio oscillate) the iteration restarts on A + I
 * from a randomly perturbed start; for nonnegative A the Perron root of A + I
 * is ρ(A) + 1 and A + I is aperiodic. Reducible matrices whose diagonal blocks
 * share nearly the same radius converge sublinearly under both runs; those
 * are settled by bisection with an M-matrix certificate.
 */
inline double spectral_radius(const DenseMatrix & a, double tol = default_settings.power_tol,
                              std::size_t max_iter = default_settings.power_max_iter)
{
  if (!a.is_square() || a.rows() == 0) { throw Error(ErrorKind::DimensionMismatch, "spectral_radius: not square"); }
  for (double v : a.values()) {
    if (v < 0.0) { throw Error(ErrorKind::InvalidArgument, "spectral_radius: matrix has negative entries"); }
  }
  const std::size_t n = a.rows();
  const std::size_t first = std::max<std::size_t>(1, max_iter / 2);
  if (auto r = detail::power_run(a, DenseVector::ones(n), tol, first)) { return *r; }

  DenseMatrix shifted = a;
  for (std::size_t i = 0; i < n; ++i) { shifted(i, i) += 1.0; }
  std::mt19937_64 rng(0x5eed5eedULL);
  std::uniform_real_distribution<double> jitter(0.0, 0.1);
  DenseVector start = DenseVector::ones(n);
  for (double & v : start) { v += jitter(rng); }
  if (auto r = detail::power_run(shifted, std::move(start), tol, max_iter - first)) { return std::max(0.0, *r - 1.0); }
  const double rho = detail::spectral_radius_bisection(a, tol);
  if (std::isfinite(rho)) { return rho; }
  throw Error(ErrorKind::NotConverged, "spectral_radius: no convergence after " + std::to_string(max_iter) + " iterations");
}

/**
 * @brief Householder QR with column pivoting, M·Π = Q·R.
 *
 * Q is formed explicitly. The numerical rank is the number of diagonal
 * entries of R with |R_kk| > rel_tol·|R_00|.
 */
class PivotedQr
{
public:
  PivotedQr(const DenseMatrix & m, double rel_tol) : q_(DenseMatrix::identity(m.rows())), r_(m), perm_(m.cols())
  {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    for (std::size_t j = 0; j < cols; ++j) { perm_[j] = j; }
    std::vector<double> norms(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t i = 0; i < rows; ++i) { norms[j] += r_(i, j) * r_(i, j); }
    }
    const std::size_t steps = std::min(rows, cols);
    std::vector<double> v(rows);
    double top = 0.0;
    rank_ = 0;
    for (std::size_t k = 0; k < steps; ++k) {
      // exact column norms of the trailing block; sizes are small
      std::size_t p = k;
      double best = -1.0;
      for (std::size_t j = k; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < rows; ++i) { s += r_(i, j) * r_(i, j); }
        norms[j] = s;
        if (s > best) {
          best = s;
          p = j;
        }
      }
      const double colnorm = std::sqrt(std::max(best, 0.0));
      if (k == 0) { top = colnorm; }
      if (colnorm <= rel_tol * top || colnorm == 0.0) { break; }
      if (p != k) {
        for (std::size_t i = 0; i < rows; ++i) { std::swap(r_(i, k), r_(i, p)); }
        std::swap(perm_[k], perm_[p]);
      }
      // Householder vector for column k below the diagonal.
      const double alpha = r_(k, k) >= 0.0 ? -colnorm : colnorm;
      std::fill(v.begin(), v.end(), 0.0);
      v[k] = r_(k, k) - alpha;
      for (std::size_t i = k + 1; i < rows; ++i) { v[i] = r_(i, k); }
      double vnorm2 = 0.0;
      for (std::size_t i = k; i < rows; ++i) { vnorm2 += v[i] * v[i]; }
      if (vnorm2 > 0.0) {
        for (std::size_t j = k; j < cols; ++j) {
          double s = 0.0;
          for (std::size_t i = k; i < rows; ++i) { s += v[i] * r_(i, j); }
          s *= 2.0 / vnorm2;
          for (std::size_t i = k; i < rows; ++i) { r_(i, j) -= s * v[i]; }
        }
        // Q <- Q·(I - 2vvᵀ/vᵀv)
        for (std::size_t i = 0; i < rows; ++i) {
          double s = 0.0;
          for (std::size_t l = k; l < rows; ++l) { s += q_(i, l) * v[l]; }
          s *= 2.0 / vnorm2;
          for (std::size_t l = k; l < rows; ++l) { q_(i, l) -= s * v[l]; }
        }
      }
      r_(k, k) = alpha;
      for (std::size_t i = k + 1; i < rows; ++i) { r_(i, k) = 0.0; }
      ++rank_;
    }
  }

  [[nodiscard]] std::size_t rank() const noexcept { return rank_; }
  [[nodiscard]] const DenseMatrix & q() const noexcept { return q_; }
  [[nodiscard]] const DenseMatrix & r() const noexcept { return r_; }
  [[nodiscard]] const std::vector<std::size_t> & perm() const noexcept { return perm_; }

  /// Orthonormal basis of the orthogonal complement of range(M), as columns.
  [[nodiscard]] DenseMatrix complement_basis() const
  {
    const std::size_t rows = q_.rows();
    DenseMatrix z(rows, rows - rank_);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = rank_; j < rows; ++j) { z(i, j - rank_) = q_(i, j); }
    }
    return z;
  }

  /// Least-squares y minimizing ‖M·y − b‖ restricted to the independent pivot columns.
  [[nodiscard]] DenseVector least_squares(const DenseVector & b) const
  {
    const DenseVector qtb = transpose_times(q_, b);
    DenseVector yp(rank_);
    for (std::size_t i = rank_; i-- > 0;) {
      double s = qtb[i];
      for (std::size_t j = i + 1; j < rank_; ++j) { s -= r_(i, j) * yp[j]; }
      yp[i] = s / r_(i, i);
    }
    DenseVector y(perm_.size());
    for (std::size_t i = 0; i < rank_; ++i) { y[perm_[i]] = yp[i]; }
    return y;
  }

  /// Minimum-norm z with Mᵀz = c on the independent pivot columns of M.
  [[nodiscard]] DenseVector min_norm_transposed(const DenseVector & c) const
  {
    // (MΠ)ᵀ z = Rᵀ Qᵀ z; take Qᵀz = (w, 0) with R11ᵀ w = (Πᵀc)[:rank].
    DenseVector w(rank_);
    for (std::size_t i = 0; i < rank_; ++i) {
      double s = c[perm_[i]];
      for (std::size_t j = 0; j < i; ++j) { s -= r_(j, i) * w[j]; }
      w[i] = s / r_(i, i);
    }
    DenseVector z(q_.rows());
    for (std::size_t i = 0; i < q_.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < rank_; ++j) { s += q_(i, j) * w[j]; }
      z[i] = s;
    }
    return z;
  }

private:
  DenseMatrix q_;
  DenseMatrix r_;
  std::vector<std::size_t> perm_;
  std::size_t rank_ = 0;
};

/// Cholesky solve of a symmetric matrix; nullopt when not numerically positive definite.
inline std::optional<DenseVector> cholesky_solve(const DenseMatrix & h, const DenseVector & b, double rel_tol = 1e-12)
{
  const std::size_t n = h.rows();
  DenseMatrix l(n, n);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) { max_diag = std::max(max_diag, h(i, i)); }
  if (max_diag <= 0.0) { return std::nullopt; }
  for (std::size_t j = 0; j < n; ++j) {
    double d = h(j, j);
    for (std::size_t k = 0; k < j; ++k) { d -= l(j, k) * l(j, k); }
    if (d <= rel_tol * max_diag) { return std::nullopt; }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = h(i, j);
      for (std::size_t k = 0; k < j; ++k) { s -= l(i, k) * l(j, k); }
      l(i, j) = s / ljj;
    }
  }
  DenseVector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) { s -= l(i, k) * y[k]; }
    y[i] = s / l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = y[i];
    for (std::size_t k = i + 1; k < n; ++k) { s -= l(k, i) * y[k]; }
    y[i] = s / l(i, i);
  }
  return y;
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
struct SymmetricEigen
{
  DenseVector values;
  DenseMatrix vectors;  ///< columns are eigenvectors
};

inline SymmetricEigen symmetric_eigen(DenseMatrix a, std::size_t max_sweeps = 100)
{
  const std::size_t n = a.rows();
  DenseMatrix v = DenseMatrix::identity(n);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        total += a(i, j) * a(i, j);
        if (i != j) { off += a(i, j) * a(i, j); }
      }
    }
    if (off <= 1e-30 * total || off == 0.0) { break; }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) { continue; }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  DenseVector values(n);
  for (std::size_t i = 0; i < n; ++i) { values[i] = a(i, i); }
  return {std::move(values), std::move(v)};
}

}  // namespace fjrec

#endif  // FJREC_NUMERICS_LINALG_HPP_
