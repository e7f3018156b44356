#ifndef FJREC_HARNESS_GENERATOR_HPP_
#define FJREC_HARNESS_GENERATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

#include "fjrec/error.hpp"
#include "fjrec/numerics/matrix.hpp"
#include "fjrec/opinion_model.hpp"

namespace fjrec {

/// splitmix64 finaliser; spreads consecutive seeds across the state space.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::size_t kMaxGenerationAttempts = 100;
inline constexpr double kLambdaLow = 0.01;
inline constexpr double kLambdaHigh = 0.99;
/// Opinion held by the recommender node; it only matters for validity.
inline constexpr double kRecommenderOpinion = 0.5;

struct GeneratedNetwork
{
  OpinionNetwork network;
  std::size_t rs_index = 0;  ///< always the last node
  std::size_t attempts = 0;
};

namespace detail {

inline OpinionNetwork draw_network(std::size_t n_users, double connectivity_pct, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // 1 − U lies in (0, 1]: weights of present edges are strictly positive
  auto weight = [&] { return 1.0 - unit(rng); };
  const double p_edge = connectivity_pct / 100.0;
  const std::size_t total = n_users + 1;
  const std::size_t rs = n_users;

  DenseMatrix w(total, total);
  for (std::size_t i = 0; i < n_users; ++i) {
    for (std::size_t j = 0; j < n_users; ++j) {
      if (j == i) { continue; }
      if (unit(rng) < p_edge) { w(i, j) = weight(); }
    }
    w(i, i) = weight();
    w(i, rs) = weight();
    const double s = w.row_sum(i);
    for (double & v : w.row(i)) { v /= s; }
  }
  w(rs, rs) = 1.0;

  DenseVector lambda(total, 1.0);
  for (std::size_t i = 0; i < n_users; ++i) { lambda[i] = kLambdaLow + (kLambdaHigh - kLambdaLow) * unit(rng); }
  DenseVector o0(total, kRecommenderOpinion);
  for (std::size_t i = 0; i < n_users; ++i) { o0[i] = unit(rng); }
  return OpinionNetwork(std::move(w), std::move(lambda), std::move(o0));
}

}  // namespace detail

/**
 * Random network of n_users plus a recommender node at index n_users.
 *
 * Each ordered user pair (i ≠ j) is an edge with probability pct/100; every
 * user also listens to itself and to the recommender. Raw weights are drawn
 * from (0, 1] and rows normalised. λ ~ U(0.01, 0.99), x(0) ~ U(0, 1). The
 * recommender is fully stubborn with a self-loop. Draws that are not
 * λ-connected are repeated with a derived seed.
 */
inline GeneratedNetwork generate_network(std::size_t n_users, double connectivity_pct, std::uint64_t seed)
{
  if (n_users < 2) { throw Error(ErrorKind::InvalidArgument, "need at least two users"); }
  if (!(connectivity_pct > 0.0 && connectivity_pct <= 100.0)) {
    throw Error(ErrorKind::InvalidArgument, "connectivity percentage must lie in (0, 100]");
  }
  for (std::size_t attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : splitmix64(seed ^ (0xa5a5a5a5ULL + attempt));
    OpinionNetwork net = detail::draw_network(n_users, connectivity_pct, s);
    if (validate(net).empty() && connectivity(net).lambda_connected) {
      return {std::move(net), n_users, attempt + 1};
    }
  }
  throw Error(ErrorKind::GenerationFailed, "no λ-connected network after 100 draws");
}

}  // namespace fjrec

#endif  // FJREC_HARNESS_GENERATOR_HPP_
