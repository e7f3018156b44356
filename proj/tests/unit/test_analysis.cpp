#include <gtest/gtest.h>

#include <random>

#include "fjrec/analysis.hpp"
#include "test_support.hpp"

using namespace fjrec;
namespace ts = fjrec::test_support;

namespace {

struct Case
{
  OpinionNetwork net;
  ControlledPlant plant;
};

Case random_case(std::mt19937_64 & rng, std::size_t n, double density = 0.4)
{
  OpinionNetwork net = ts::random_plant_network(rng, n, density);
  ControlledPlant p = extract_plant(net, n);
  return {std::move(net), std::move(p)};
}

ControlledPlant with_x0(ControlledPlant p, const DenseVector & x0)
{
  p.x0 = x0;
  return p;
}

ComparisonOptions options(std::size_t steps, std::size_t horizon, std::optional<double> soft = std::nullopt)
{
  ComparisonOptions o;
  o.steps = steps;
  o.mpc.horizon = horizon;
  o.mpc.soft_terminal = soft;
  return o;
}

}  // namespace

TEST(EquivalenceCertificate, ConsensusHasZeroGap)
{
  std::mt19937_64 rng(61);
  const ControlledPlant p = with_x0(random_case(rng, 7).plant, DenseVector(7, 0.6));
  const EquivalenceCertificate c = equivalence_certificate(p);
  EXPECT_LE(c.gap, 1e-9);
  EXPECT_LE(max_abs_diff(mf_equilibrium(p), mb_target(p).x_star), 1e-7);
}

TEST(EquivalenceCertificate, ZeroInputVectorGivesZeroKernel)
{
  const OpinionNetwork net(DenseMatrix{{0.3, 0.7, 0}, {0.6, 0.4, 0}, {0, 0, 1}}, DenseVector{0.2, 0.4, 1.0},
                           DenseVector{0.1, 0.9, 0.5});
  const ControlledPlant p = extract_plant(net, 2);
  const EquivalenceCertificate c = equivalence_certificate(p);
  EXPECT_EQ(c.k.max_abs(), 0.0);
  EXPECT_EQ(c.gap, 0.0);
  EXPECT_LE(max_abs_diff(mf_equilibrium(p), mb_target(p).x_star), 1e-12);
}

TEST(EquivalenceProperty, AlgebraicIdentities)
{
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 19;
    const ControlledPlant p = random_case(rng, n, trial % 2 == 0 ? 0.2 : 0.8).plant;
    const EquivalenceCertificate c = equivalence_certificate(p);
    EXPECT_LE(std::abs(c.d.sum()), 1e-9);
    EXPECT_GE(c.gap, 0.0);
    EXPECT_LE((c.k * p.lambda_tilde).norm_inf(), 1e-9);

    // Woodbury: (G + αBDᵀ)⁻¹ against G⁻¹ − K, both inverted directly
    const DenseMatrix lhs = invert(c.g + c.alpha * outer(p.b, c.d));
    const DenseMatrix rhs = invert(c.g) - c.k;
    EXPECT_LE(max_abs_diff(lhs, rhs), 1e-8) << "trial " << trial;

    // the model-based matrix really is G + αBDᵀ
    const DenseVector x_mb = solve_linear(c.g + c.alpha * outer(p.b, c.d), p.offset());
    const MbTarget t = mb_target(p);
    EXPECT_LE(max_abs_diff(x_mb, t.x_star), 1e-9);
    EXPECT_LE(max_abs_diff(c.difference, mf_equilibrium(p) - t.x_star), 1e-9);
  }
}

TEST(EquivalenceProperty, GapPredicateSeparates)
{
  std::mt19937_64 rng(63);
  int zero_cases = 0;
  int large_cases = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 15;
    ControlledPlant p = random_case(rng, n).plant;
    if (trial % 2 == 0) {
      // move x0 into the kernel of the functional
      const DenseVector k = equivalence_certificate(p).kernel_functional;
      DenseVector x0 = p.x0;
      x0.axpy(-dot(k, x0) / dot(k, k), k);
      p = with_x0(p, x0);
    }
    const EquivalenceCertificate c = equivalence_certificate(p);
    const double diff = max_abs_diff(mf_equilibrium(p), mb_target(p, false).x_star);
    if (c.gap <= 1e-9) {
      ++zero_cases;
      EXPECT_LE(diff, 1e-7) << "trial " << trial;
    } else if (c.gap >= 1e-3) {
      ++large_cases;
      EXPECT_GE(diff, 1e-9) << "trial " << trial;
    }
  }
  EXPECT_GT(zero_cases, 20);
  EXPECT_GT(large_cases, 20);
}

TEST(OpinionShift, Examples)
{
  const DenseVector x{0.2, 0.7};
  const ShiftResult same = opinion_shift(x, x);
  EXPECT_EQ(same.percent, DenseVector(2, 0.0));
  EXPECT_NEAR(opinion_shift(DenseVector{0.6}, DenseVector{0.5}).percent[0], 20.0, 1e-12);
  EXPECT_THROW(opinion_shift(DenseVector{0.6}, DenseVector{0.5, 0.1}), Error);
}

TEST(OpinionShift, ZeroBaselineIsExcluded)
{
  const ShiftResult r = opinion_shift(DenseVector{0.6, 0.0, 0.3}, DenseVector{0.5, 0.0, 0.2});
  EXPECT_EQ(r.excluded, (std::vector<std::size_t>{1}));
  EXPECT_EQ(r.included(), 2u);
  EXPECT_NEAR(r.average(), 0.5 * (20.0 + 50.0), 1e-12);
  EXPECT_NEAR(r.maximum(), 50.0, 1e-12);
}

TEST(FreeEvolution, UsersIgnoringRecommenderAreUnchanged)
{
  const OpinionNetwork net(DenseMatrix{{0.3, 0.7, 0}, {0.6, 0.4, 0}, {0, 0, 1}}, DenseVector{0.2, 0.4, 1.0},
                           DenseVector{0.1, 0.9, 0.5});
  const OpinionNetwork users(DenseMatrix{{0.3, 0.7}, {0.6, 0.4}}, DenseVector{0.2, 0.4}, DenseVector{0.1, 0.9});
  EXPECT_LE(max_abs_diff(free_evolution_steady_state(net, 2), fj_equilibrium(users)), 1e-15);
}

TEST(FreeEvolution, StubbornUsersKeepInitialOpinions)
{
  std::mt19937_64 rng(64);
  OpinionNetwork net = ts::random_plant_network(rng, 5, 0.5);
  net.stubbornness = DenseVector(6, 1.0);
  const DenseVector xf = free_evolution_steady_state(net, 5);
  for (std::size_t i = 0; i < 5; ++i) { EXPECT_DOUBLE_EQ(xf[i], net.initial_opinions[i]); }
}

TEST(FreeEvolution, RecommenderOnlyListenerGetsSelfLoop)
{
  // user 1 listens only to the recommender (node 2)
  const OpinionNetwork net(DenseMatrix{{0.5, 0.25, 0.25}, {0, 0, 1}, {0, 0, 1}}, DenseVector{0.3, 0.0, 1.0},
                           DenseVector{0.4, 0.8, 0.5});
  const OpinionNetwork reduced = remove_recommender(net, 2);
  EXPECT_NEAR(reduced.adjacency(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(reduced.adjacency(0, 1), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(reduced.adjacency(1, 1), 1.0);
  // λ = 0 on a self-looped node leaves it outside every prejudiced set
  EXPECT_THROW(free_evolution_steady_state(net, 2), Error);
}

TEST(FreeEvolution, AgreesWithLongSimulation)
{
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 10; ++trial) {
    const OpinionNetwork net = ts::random_plant_network(rng, 3 + trial, 0.3);
    const std::size_t rs = net.n_total() - 1;
    const DenseVector xf = free_evolution_steady_state(net, rs);
    const auto traj = fj_simulate(remove_recommender(net, rs), 10000);
    EXPECT_LE(max_abs_diff(traj.back(), xf), 1e-9);
  }
}

TEST(SampleEngagement, Examples)
{
  const DenseVector consensus(4, 0.3);
  for (std::uint64_t seed = 0; seed < 200; ++seed) { EXPECT_TRUE(sample_engagement(consensus, 0.3, seed)); }
  const DenseVector far{1.0, 1.0};
  for (std::uint64_t seed = 0; seed < 200; ++seed) { EXPECT_FALSE(sample_engagement(far, 0.0, seed)); }
  EXPECT_EQ(sample_engagement(DenseVector{0.5, 0.0}, 0.0, 99), sample_engagement(DenseVector{0.5, 0.0}, 0.0, 99));
}

TEST(SampleEngagement, EmpiricalRate)
{
  // θ = 0.5² = 0.25
  const DenseVector x{0.5};
  std::mt19937_64 rng(66);
  int hits = 0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) { hits += sample_engagement(x, 0.0, rng) ? 1 : 0; }
  EXPECT_NEAR(static_cast<double>(hits) / draws, 0.75, 0.005);
}

TEST(CompareControllers, InertPlantGivesEqualCosts)
{
  std::mt19937_64 rng(67);
  OpinionNetwork net = ts::random_plant_network(rng, 4, 0.5);
  net.stubbornness = DenseVector(5, 1.0);
  const ControlledPlant p = extract_plant(net, 4);
  const ComparisonReport r = compare_controllers(p, net, 4, options(20, 10));
  EXPECT_NEAR(r.cost_mf, r.cost_mb, 1e-12);
  EXPECT_NEAR(r.improvement_pct, 0.0, 1e-9);

  // no user listens to the recommender; only a soft terminal keeps MPC well-posed
  const OpinionNetwork deaf(DenseMatrix{{0.3, 0.7, 0}, {0.6, 0.4, 0}, {0, 0, 1}}, DenseVector{0.2, 0.4, 1.0},
                            DenseVector{0.1, 0.9, 0.5});
  const ComparisonReport d = compare_controllers(extract_plant(deaf, 2), deaf, 2, options(20, 10, 1e6));
  EXPECT_NEAR(d.cost_mf, d.cost_mb, 1e-9);
}

TEST(CompareControllers, ConsensusCostsNothing)
{
  std::mt19937_64 rng(68);
  OpinionNetwork net = ts::random_plant_network(rng, 5, 0.5);
  for (std::size_t i = 0; i < 5; ++i) { net.initial_opinions[i] = 0.45; }
  const ComparisonReport r = compare_controllers(extract_plant(net, 5), net, 5, options(20, 10));
  EXPECT_NEAR(r.cost_mf, 0.0, 1e-20);
  EXPECT_NEAR(r.cost_mb, 0.0, 1e-12);
  ASSERT_TRUE(r.trace_mb.has_value());
  EXPECT_EQ(r.trace_mb->states.size(), 21u);
}

TEST(CompareControllersProperty, ModelBasedNeverWorseCumulatively)
{
  std::mt19937_64 rng(69);
  for (int trial = 0; trial < 20; ++trial) {
    const Case c = random_case(rng, 10, 0.25 * (1 + trial % 4));
    ComparisonOptions o = options(50, 50);
    o.keep_traces = false;
    const ComparisonReport r = compare_controllers(c.plant, c.net, 10, o);
    EXPECT_LE(r.cost_mb, r.cost_mf + 1e-6) << "trial " << trial;
    EXPECT_GE(r.improvement_pct, -1e-6);
  }
}
