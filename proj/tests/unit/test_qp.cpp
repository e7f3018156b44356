#include <gtest/gtest.h>

#include <random>

#include "fjrec/numerics/qp.hpp"
#include "test_support.hpp"

using namespace fjrec;
namespace ts = fjrec::test_support;

namespace {

QpSolution solve(const QpProblem & p) { return solve_qp(p, 1e-9, 1000); }

bool contains(const std::vector<std::size_t> & v, std::size_t i) { return std::find(v.begin(), v.end(), i) != v.end(); }

}  // namespace

TEST(SolveQp, UnconstrainedMinimumInsideBox)
{
  // min ‖u‖²  ->  P = 2I, q = 0
  const QpProblem p(2.0 * DenseMatrix::identity(2), DenseVector(2), DenseVector{-1, -1}, DenseVector{1, 1});
  const QpSolution s = solve(p);
  ASSERT_EQ(s.status, QpStatus::Optimal);
  EXPECT_NEAR(s.point.norm_inf(), 0.0, 1e-12);
  EXPECT_TRUE(s.active_set.empty());
  EXPECT_LE(s.kkt_residual, 1e-9);
}

TEST(SolveQp, ProjectionOntoUpperBound)
{
  // min (u − 2)² over [0, 1]
  const QpProblem p(DenseMatrix{{2.0}}, DenseVector{-4.0}, DenseVector{0.0}, DenseVector{1.0});
  const QpSolution s = solve(p);
  ASSERT_EQ(s.status, QpStatus::Optimal);
  EXPECT_DOUBLE_EQ(s.point[0], 1.0);
  EXPECT_TRUE(contains(s.active_set, 0));
}

TEST(SolveQp, EqualityConstrainedSymmetricPoint)
{
  // min u1² + u2² s.t. u1 + u2 = 1, [0,1]²  ->  (0.5, 0.5)
  const QpProblem p(2.0 * DenseMatrix::identity(2), DenseVector(2), DenseMatrix{{1, 1}}, DenseVector{1.0},
                    DenseVector{0, 0}, DenseVector{1, 1});
  const QpSolution s = solve(p);
  ASSERT_EQ(s.status, QpStatus::Optimal);
  EXPECT_NEAR(s.point[0], 0.5, 1e-12);
  EXPECT_NEAR(s.point[1], 0.5, 1e-12);

  // grid oracle at step 1e-3
  const DenseVector row{1, 1};
  const auto g = ts::grid_search(p.hessian(), p.linear(), p.lower(), p.upper(), 1e-3, &row, 1.0);
  ASSERT_TRUE(g.found);
  EXPECT_NEAR(g.point[0], s.point[0], 2e-3);
  EXPECT_NEAR(g.point[1], s.point[1], 2e-3);
}

TEST(SolveQp, InfeasibleEqualityAgainstBox)
{
  // u1 + u2 = 3 cannot hold on [0,1]²
  const QpProblem p(2.0 * DenseMatrix::identity(2), DenseVector(2), DenseMatrix{{1, 1}}, DenseVector{3.0},
                    DenseVector{0, 0}, DenseVector{1, 1});
  EXPECT_EQ(solve(p).status, QpStatus::Infeasible);
}

TEST(SolveQp, RedundantEqualityRowsAreTolerated)
{
  const QpProblem p(2.0 * DenseMatrix::identity(3), DenseVector{0, 0, 0}, DenseMatrix{{1, 1, 1}, {2, 2, 2}},
                    DenseVector{1.5, 3.0}, DenseVector(3, 0.0), DenseVector(3, 1.0));
  const QpSolution s = solve(p);
  ASSERT_EQ(s.status, QpStatus::Optimal);
  for (double v : s.point) { EXPECT_NEAR(v, 0.5, 1e-12); }
}

TEST(SolveQp, DegenerateHessianPicksDeterministicPoint)
{
  // objective (u1 − u2)², minimisers form the diagonal segment
  const DenseMatrix h{{2, -2}, {-2, 2}};
  const QpProblem p(h, DenseVector{0, 0}, DenseVector{0, 0}, DenseVector{1, 1});
  const QpSolution a = solve(p);
  const QpSolution b = solve(p);
  ASSERT_EQ(a.status, QpStatus::Optimal);
  EXPECT_NEAR(a.objective, 0.0, 1e-12);
  EXPECT_EQ(a.point, b.point);
}

TEST(SolveQp, LinearObjectiveRunsToVertex)
{
  // zero Hessian: pure descent ray until the box stops it
  const QpProblem p(DenseMatrix(2, 2), DenseVector{1, -1}, DenseVector{0, 0}, DenseVector{1, 1});
  const QpSolution s = solve(p);
  ASSERT_EQ(s.status, QpStatus::Optimal);
  EXPECT_DOUBLE_EQ(s.point[0], 0.0);
  EXPECT_DOUBLE_EQ(s.point[1], 1.0);
}

TEST(SolveQp, WarmStartGivesSameAnswer)
{
  std::mt19937_64 rng(5);
  const DenseMatrix h = ts::random_spd(rng, 6, 0.5, 4.0);
  const DenseVector q = ts::random_vector(rng, 6, -5, 5);
  const QpProblem p(h, q, DenseMatrix{{1, 1, 1, 1, 1, 1}}, DenseVector{3.0}, DenseVector(6, 0.0), DenseVector(6, 1.0));
  const QpSolution cold = solve(p);
  const QpSolution warm = solve_qp(p, 1e-9, 1000, DenseVector(6, 0.5));
  ASSERT_EQ(cold.status, QpStatus::Optimal);
  ASSERT_EQ(warm.status, QpStatus::Optimal);
  EXPECT_LE(max_abs_diff(cold.point, warm.point), 1e-9);
}

TEST(SolveQp, ShapeValidation)
{
  EXPECT_THROW(QpProblem(DenseMatrix::identity(2), DenseVector(3), DenseVector(3), DenseVector(3)), Error);
  EXPECT_THROW(QpProblem(DenseMatrix::identity(1), DenseVector(1), DenseVector{1.0}, DenseVector{0.0}), Error);
}

// Property: agreement with an exhaustive grid search (step 1e-3) on random
// strictly convex problems with up to three variables, and the solver's
// objective never exceeds the best feasible grid value.
TEST(SolveQpProperty, MatchesGridSearch)
{
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = static_cast<std::size_t>(dim(rng));
    const bool with_eq = d >= 2 && trial % 2 == 0;
    // bounded conditioning keeps the grid argmin within the grid resolution
    const DenseMatrix h = ts::random_spd(rng, d, 1.0, 4.0);
    const DenseVector q = ts::random_vector(rng, d, -4.0, 4.0);
    const DenseVector lo = ts::random_vector(rng, d, -1.0, -0.2);
    DenseVector hi = lo;
    for (double & v : hi) { v += 1.0; }

    DenseMatrix e;
    DenseVector f;
    DenseVector row;
    double rhs = 0.0;
    if (with_eq) {
      // the coordinate solved from the equality gets the largest coefficient,
      // so the grid spacing along the constraint stays close to the step
      row = ts::random_vector(rng, d, 0.5, 1.0);
      row[d - 1] = ts::random_vector(rng, 1, 1.0, 1.5)[0];
      // right-hand side from an interior point so the problem is feasible
      const DenseVector inner = ts::random_vector(rng, d, 0.1, 0.9);
      for (std::size_t i = 0; i < d; ++i) { rhs += row[i] * (lo[i] + inner[i]); }
      e = DenseMatrix::from_row_major(1, d, row.values());
      f = DenseVector{rhs};
    }
    const QpProblem p(h, q, e, f, lo, hi);
    const QpSolution s = solve(p);
    ASSERT_EQ(s.status, QpStatus::Optimal) << "trial " << trial;
    const auto g = ts::grid_search(h, q, lo, hi, 1e-3, with_eq ? &row : nullptr, rhs);
    ASSERT_TRUE(g.found);
    for (std::size_t i = 0; i < d; ++i) { EXPECT_NEAR(s.point[i], g.point[i], 2e-3) << "trial " << trial; }
    EXPECT_LE(s.objective, g.value + 1e-12) << "trial " << trial;
  }
}

// Property: KKT certificate on larger random problems with several equalities.
TEST(SolveQpProperty, KktResidualOnLargerProblems)
{
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 5 + trial % 20;
    const std::size_t m = trial % 4;
    const DenseMatrix h = ts::random_spd(rng, d, trial % 3 == 0 ? 0.0 : 0.1, 3.0);
    const DenseVector q = ts::random_vector(rng, d, -3, 3);
    const DenseMatrix e = ts::random_matrix(rng, m, d);
    const DenseVector feasible = ts::random_vector(rng, d, 0.05, 0.95);
    const DenseVector f = m > 0 ? e * feasible : DenseVector();
    const QpProblem p(h, q, m > 0 ? e : DenseMatrix(), f, DenseVector(d, 0.0), DenseVector(d, 1.0));
    const QpSolution s = solve(p);
    ASSERT_EQ(s.status, QpStatus::Optimal) << "trial " << trial << " kkt " << s.kkt_residual;
    EXPECT_LE(s.kkt_residual, 1e-9);
    EXPECT_LE(s.objective, p.objective(feasible) + 1e-10);
  }
}
