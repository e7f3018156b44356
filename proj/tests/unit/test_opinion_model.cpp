#include <gtest/gtest.h>

#include <random>

#include "fjrec/opinion_model.hpp"
#include "test_support.hpp"

using namespace fjrec;
namespace ts = fjrec::test_support;

namespace {

OpinionNetwork swap_pair()
{
  // node 1 fully stubborn at 1, node 2 listens only to node 1
  return OpinionNetwork(DenseMatrix{{0, 1}, {1, 0}}, DenseVector{1, 0}, DenseVector{1, 0});
}

bool has_kind(const std::vector<Violation> & v, ViolationKind k, std::size_t index)
{
  for (const auto & x : v) {
    if (x.kind == k && x.index == index) { return true; }
  }
  return false;
}

}  // namespace

TEST(Validate, AcceptsIdentityNetwork)
{
  const OpinionNetwork net(DenseMatrix::identity(4), DenseVector(4, 0.5), DenseVector{0, 0.3, 0.7, 1});
  EXPECT_TRUE(validate(net).empty());
  EXPECT_NO_THROW(require_valid(net));
}

TEST(Validate, ReportsRowSumWithIndex)
{
  DenseMatrix w = DenseMatrix::identity(4);
  w(3, 0) = 0.2;
  const auto v = validate(OpinionNetwork(w, DenseVector(4, 0.5), DenseVector(4, 0.5)));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, ViolationKind::RowSum);
  EXPECT_EQ(v[0].index, 3u);
  EXPECT_NEAR(v[0].value, 1.2, 1e-15);
}

TEST(Validate, ReportsStubbornnessAndOpinionRange)
{
  const auto v = validate(OpinionNetwork(DenseMatrix::identity(3), DenseVector{0.5, 0.5, 1.5}, DenseVector{0, -0.1, 1}));
  EXPECT_TRUE(has_kind(v, ViolationKind::StubbornnessRange, 2));
  EXPECT_TRUE(has_kind(v, ViolationKind::OpinionRange, 1));
  EXPECT_EQ(v.size(), 2u);
  EXPECT_THROW(require_valid(OpinionNetwork(DenseMatrix::identity(3), DenseVector{0.5, 0.5, 1.5}, DenseVector(3))),
               Error);
}

TEST(Validate, ReportsNegativeWeights)
{
  const auto v = validate(OpinionNetwork(DenseMatrix{{1.5, -0.5}, {0, 1}}, DenseVector(2), DenseVector(2)));
  EXPECT_TRUE(has_kind(v, ViolationKind::NegativeWeight, 0));
}

TEST(OpinionNetworkShape, RejectsMismatchedSizes)
{
  EXPECT_THROW(OpinionNetwork(DenseMatrix::identity(3), DenseVector(2), DenseVector(3)), Error);
  EXPECT_THROW(OpinionNetwork(DenseMatrix(2, 3), DenseVector(2), DenseVector(2)), Error);
}

TEST(RenormalizeRows, FixesRoundedLabels)
{
  const OpinionNetwork raw(DenseMatrix{{0.333, 0.333, 0.333}, {0.5, 0.501, 0}, {0, 0, 1}}, DenseVector(3, 0.5),
                           DenseVector(3, 0.5));
  EXPECT_FALSE(validate(raw).empty());
  const OpinionNetwork fixed = renormalize_rows(raw);
  EXPECT_TRUE(validate(fixed).empty());
  EXPECT_NEAR(fixed.adjacency(1, 0) / fixed.adjacency(1, 1), 0.5 / 0.501, 1e-15);
}

TEST(Connectivity, AllPrejudiced)
{
  const auto rep = connectivity(OpinionNetwork(DenseMatrix::identity(3), DenseVector(3, 0.2), DenseVector(3)));
  EXPECT_EQ(rep.prejudiced.size(), 3u);
  EXPECT_TRUE(rep.lambda_connected);
}

TEST(Connectivity, NoPrejudice)
{
  const auto rep = connectivity(OpinionNetwork(DenseMatrix::identity(3), DenseVector(3, 0.0), DenseVector(3)));
  EXPECT_TRUE(rep.prejudiced.empty());
  EXPECT_TRUE(rep.p_dependent.empty());
  EXPECT_FALSE(rep.lambda_connected);
}

TEST(Connectivity, ChainFollowsInfluenceDirection)
{
  // node 1 listens to 0, node 2 listens to 1
  const DenseMatrix w{{1, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const auto rep = connectivity(OpinionNetwork(w, DenseVector{1, 0, 0}, DenseVector(3)));
  EXPECT_EQ(rep.p_dependent, (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(rep.lambda_connected);

  // prejudice at the tail of the chain reaches nobody upstream
  const auto tail = connectivity(OpinionNetwork(w, DenseVector{0, 0, 1}, DenseVector(3)));
  EXPECT_EQ(tail.p_dependent, (std::vector<std::size_t>{2}));
  EXPECT_FALSE(tail.lambda_connected);
}

TEST(FjStep, Examples)
{
  std::mt19937_64 rng(1);
  const DenseVector o0{0.1, 0.5, 0.9};
  const OpinionNetwork stubborn(ts::random_network(rng, 3, 0.7, 1.0).adjacency, DenseVector(3, 1.0), o0);
  EXPECT_EQ(fj_step(stubborn, DenseVector{0.3, 0.3, 0.3}), o0);

  const OpinionNetwork fixed(DenseMatrix::identity(3), DenseVector(3, 0.0), o0);
  const DenseVector o{0.2, 0.4, 0.6};
  EXPECT_EQ(fj_step(fixed, o), o);

  EXPECT_EQ(fj_step(swap_pair(), DenseVector{1, 0}), (DenseVector{1, 1}));
  EXPECT_THROW(fj_step(fixed, DenseVector{1, 0}), Error);
}

TEST(FjSimulate, Examples)
{
  const OpinionNetwork net = swap_pair();
  const auto zero = fj_simulate(net, 0);
  ASSERT_EQ(zero.size(), 1u);
  EXPECT_EQ(zero[0], net.initial_opinions);

  const OpinionNetwork stubborn(DenseMatrix::identity(2), DenseVector(2, 1.0), DenseVector{0.25, 0.75});
  const auto copies = fj_simulate(stubborn, 5);
  ASSERT_EQ(copies.size(), 6u);
  for (const auto & o : copies) { EXPECT_EQ(o, stubborn.initial_opinions); }

  const auto traj = fj_simulate(net, 20);
  EXPECT_LE(max_abs_diff(traj.back(), DenseVector{1, 1}), 1e-15);
}

TEST(FjEquilibrium, Examples)
{
  const OpinionNetwork stubborn(DenseMatrix{{0.5, 0.5}, {0.5, 0.5}}, DenseVector(2, 1.0), DenseVector{0.25, 0.75});
  EXPECT_LE(max_abs_diff(fj_equilibrium(stubborn), stubborn.initial_opinions), 1e-15);

  const DenseVector eq = fj_equilibrium(swap_pair());
  EXPECT_LE(max_abs_diff(eq, DenseVector{1, 1}), 1e-12);
  EXPECT_LE(max_abs_diff(fj_simulate(swap_pair(), 200).back(), eq), 1e-12);

  std::mt19937_64 rng(3);
  OpinionNetwork consensus = ts::random_network(rng, 8, 0.4, 1.0);
  consensus.initial_opinions = DenseVector(8, 0.37);
  EXPECT_LE(max_abs_diff(fj_equilibrium(consensus), DenseVector(8, 0.37)), 1e-12);
}

TEST(FjEquilibrium, RefusesNetworksThatAreNotLambdaConnected)
{
  const OpinionNetwork net(DenseMatrix::identity(2), DenseVector{0.5, 0.0}, DenseVector{0.1, 0.2});
  try {
    fj_equilibrium(net);
    FAIL() << "expected NotLambdaConnected";
  } catch (const Error & e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotLambdaConnected);
  }
}

TEST(OpinionModelProperty, StepStaysInUnitCube)
{
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 2 + trial % 19;
    const OpinionNetwork net = ts::random_network(rng, n, 0.3, 0.7);
    const DenseVector o = ts::random_vector(rng, n);
    const DenseVector next = fj_step(net, o);
    ASSERT_GE(next.min(), -1e-12);
    ASSERT_LE(next.max(), 1.0 + 1e-12);
  }
}

TEST(OpinionModelProperty, LambdaConnectivityMatchesSpectralRadius)
{
  std::mt19937_64 rng(22);
  int connected = 0;
  int disconnected = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 2 + trial % 15;
    const OpinionNetwork net = ts::random_network(rng, n, 0.15, trial % 2 == 0 ? 0.15 : 0.6);
    const double rho = spectral_radius(fj_iteration_matrix(net), 1e-12, 100000);
    if (std::abs(rho - 1.0) < 1e-6) {
      if (!connectivity(net).lambda_connected) { ++disconnected; }
      continue;
    }
    const bool connected_now = connectivity(net).lambda_connected;
    EXPECT_EQ(connected_now, rho < 1.0 - 1e-9) << "trial " << trial << " rho " << rho;
    connected += connected_now ? 1 : 0;
  }
  // both classes must actually be exercised
  EXPECT_GT(connected, 20);
  EXPECT_GT(disconnected, 20);
}

TEST(OpinionModelProperty, EquilibriumIsFixedPointAndLimit)
{
  std::mt19937_64 rng(23);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + trial % 19;
    const OpinionNetwork net = ts::random_network(rng, n, 0.4, 0.6);
    if (!connectivity(net).lambda_connected) { continue; }
    ++checked;
    const DenseVector eq = fj_equilibrium(net);
    EXPECT_LE(max_abs_diff(fj_step(net, eq), eq), 1e-9);

    double prev = max_abs_diff(net.initial_opinions, eq);
    DenseVector o = net.initial_opinions;
    for (int t = 1; t <= 10000; ++t) {
      o = fj_step(net, o);
      const double err = max_abs_diff(o, eq);
      ASSERT_LE(err, prev + 1e-15) << "trial " << trial << " t " << t;
      prev = err;
    }
    EXPECT_LE(prev, 1e-6) << "trial " << trial;
  }
  EXPECT_GT(checked, 20);
}
