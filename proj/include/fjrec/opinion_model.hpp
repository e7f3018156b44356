#ifndef FJREC_OPINION_MODEL_HPP_
#define FJREC_OPINION_MODEL_HPP_

/**
 * @file
 * @brief Friedkin-Johnsen opinion network: validation, P-dependence, dynamics, equilibrium.
 *
 * Edge convention: adjacency(i, j) is the weight with which node i listens
 * to node j. Influence therefore flows j -> i whenever adjacency(i, j) > 0.
 */

#include <cmath>
#include <cstddef>
#include <deque>
#include <sstream>
#include <string>
#include <vector>

#include "fjrec/error.hpp"
#include "fjrec/numerics/linalg.hpp"
#include "fjrec/numerics/matrix.hpp"
#include "fjrec/numerics/settings.hpp"

namespace fjrec {

inline constexpr double kRowSumTol = 1e-9;
/// λ above this counts as prejudiced.
inline constexpr double kPrejudiceThreshold = 1e-12;

struct OpinionNetwork
{
  DenseMatrix adjacency;
  DenseVector stubbornness;
  DenseVector initial_opinions;

  OpinionNetwork() = default;

  OpinionNetwork(DenseMatrix w, DenseVector lambda, DenseVector o0)
      : adjacency(std::move(w)), stubbornness(std::move(lambda)), initial_opinions(std::move(o0))
  {
    const std::size_t n = adjacency.rows();
    if (n == 0 || !adjacency.is_square()) { throw Error(ErrorKind::DimensionMismatch, "adjacency must be square and non-empty"); }
    if (stubbornness.size() != n || initial_opinions.size() != n) {
      throw Error(ErrorKind::DimensionMismatch, "stubbornness and initial opinions must have one entry per node");
    }
  }

  [[nodiscard]] std::size_t n_total() const noexcept { return adjacency.rows(); }
};

enum class ViolationKind { NegativeWeight, RowSum, StubbornnessRange, OpinionRange };

struct Violation
{
  ViolationKind kind;
  std::size_t index;  ///< node (row) index
  double value;

  [[nodiscard]] std::string describe() const
  {
    std::ostringstream os;
    switch (kind) {
      case ViolationKind::NegativeWeight: os << "negative adjacency weight in row " << index; break;
      case ViolationKind::RowSum: os << "row " << index << ": sum " << value; break;
      case ViolationKind::StubbornnessRange: os << "stubbornness out of range at " << index << ": " << value; break;
      case ViolationKind::OpinionRange: os << "initial opinion out of range at " << index << ": " << value; break;
    }
    return os.str();
  }
};

/// Every violated network invariant; empty means valid.
inline std::vector<Violation> validate(const OpinionNetwork & net)
{
  std::vector<Violation> out;
  const std::size_t n = net.n_total();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (double w : net.adjacency.row(i)) {
      sum += w;
      if (w < 0.0) {
        out.push_back({ViolationKind::NegativeWeight, i, w});
      }
    }
    if (std::abs(sum - 1.0) > kRowSumTol) { out.push_back({ViolationKind::RowSum, i, sum}); }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double l = net.stubbornness[i];
    if (!(l >= 0.0 && l <= 1.0)) { out.push_back({ViolationKind::StubbornnessRange, i, l}); }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double o = net.initial_opinions[i];
    if (!(o >= 0.0 && o <= 1.0)) { out.push_back({ViolationKind::OpinionRange, i, o}); }
  }
  return out;
}

inline void require_valid(const OpinionNetwork & net)
{
  const auto violations = validate(net);
  if (violations.empty()) { return; }
  std::string msg = "invalid network:";
  for (const auto & v : violations) { msg += " [" + v.describe() + "]"; }
  throw Error(ErrorKind::InvalidArgument, msg);
}

/// Rescales every row with positive mass to sum to one (ingestion of rounded weights).
inline OpinionNetwork renormalize_rows(OpinionNetwork net)
{
  for (std::size_t i = 0; i < net.n_total(); ++i) {
    const double s = net.adjacency.row_sum(i);
    if (s > 0.0) {
      for (double & w : net.adjacency.row(i)) { w /= s; }
    }
  }
  return net;
}

struct ConnectivityReport
{
  std::vector<std::size_t> prejudiced;
  std::vector<std::size_t> p_dependent;
  bool lambda_connected = false;
};

/// Prejudiced nodes and everything they reach along influence edges (BFS).
inline ConnectivityReport connectivity(const OpinionNetwork & net)
{
  const std::size_t n = net.n_total();
  ConnectivityReport rep;
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (net.stubbornness[i] > kPrejudiceThreshold) {
      rep.prejudiced.push_back(i);
      seen[i] = true;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t j = queue.front();
    queue.pop_front();
    // j influences every i that listens to it
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen[i] && net.adjacency(i, j) > 0.0) {
        seen[i] = true;
        queue.push_back(i);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i]) { rep.p_dependent.push_back(i); }
  }
  rep.lambda_connected = rep.p_dependent.size() == n;
  return rep;
}

/// (I − Λ)W
inline DenseMatrix fj_iteration_matrix(const OpinionNetwork & net)
{
  DenseVector keep(net.n_total());
  for (std::size_t i = 0; i < keep.size(); ++i) { keep[i] = 1.0 - net.stubbornness[i]; }
  return scale_rows(keep, net.adjacency);
}

/// One step o(t+1) = (I − Λ)W·o(t) + Λ·o(0).
inline DenseVector fj_step(const OpinionNetwork & net, const DenseVector & o)
{
  const std::size_t n = net.n_total();
  if (o.size() != n) { throw Error(ErrorKind::DimensionMismatch, "fj_step: opinion vector size"); }
  DenseVector next = net.adjacency * o;
  for (std::size_t i = 0; i < n; ++i) {
    const double l = net.stubbornness[i];
    next[i] = (1.0 - l) * next[i] + l * net.initial_opinions[i];
  }
  return next;
}

/// Trajectory o(0), …, o(steps).
inline std::vector<DenseVector> fj_simulate(const OpinionNetwork & net, std::size_t steps)
{
  std::vector<DenseVector> traj;
  traj.reserve(steps + 1);
  traj.push_back(net.initial_opinions);
  for (std::size_t t = 0; t < steps; ++t) { traj.push_back(fj_step(net, traj.back())); }
  return traj;
}

/// Unique equilibrium (I − (I − Λ)W)⁻¹Λ·o(0); only defined for λ-connected networks.
inline DenseVector fj_equilibrium(const OpinionNetwork & net, const NumericSettings & s = default_settings)
{
  if (!connectivity(net).lambda_connected) {
    throw Error(ErrorKind::NotLambdaConnected, "equilibrium requires every node to be P-dependent");
  }
  const std::size_t n = net.n_total();
  const DenseMatrix m = DenseMatrix::identity(n) - fj_iteration_matrix(net);
  return solve_linear(m, hadamard(net.stubbornness, net.initial_opinions), s);
}

}  // namespace fjrec

#endif  // FJREC_OPINION_MODEL_HPP_
