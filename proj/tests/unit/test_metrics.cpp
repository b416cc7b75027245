#include <gtest/gtest.h>

#include <random>

#include "cluslasso/data.hpp"
#include "cluslasso/metrics.hpp"
#include "cluslasso/ssnal.hpp"
#include "oracles.hpp"

using namespace cluslasso;

namespace {

Vec random_vec(std::mt19937_64& g, Index n) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = d(g);
  return v;
}

}  // namespace

TEST(EtaKkt, ZeroAtSolutionOfTrivialProblems) {
  const ProblemData zero{DesignMatrix::identity(3), Vec::Zero(3), {0.5, 0.5}};
  EXPECT_EQ(eta_kkt(Vec::Zero(3), zero), 0.0);
  const ProblemData lasso{DesignMatrix::identity(2), Vec{{2.0, 2.0}}, {1.0, 0.0}};
  EXPECT_EQ(eta_kkt(Vec::Ones(2), lasso), 0.0);
  // x = 0: residual is ||Prox(b)|| = sqrt 2 over 1 + ||b|| = 1 + 2 sqrt 2.
  EXPECT_NEAR(eta_kkt(Vec::Zero(2), lasso), std::sqrt(2.0) / (1.0 + 2.0 * std::sqrt(2.0)), 1e-15);
}

TEST(EtaKkt, MatchesOracleResidual) {
  std::mt19937_64 g(1);
  for (int t = 0; t < 20; ++t) {
    Mat a(6, 4);
    for (Index j = 0; j < 4; ++j) a.col(j) = random_vec(g, 6);
    const ProblemData d{DesignMatrix(a), random_vec(g, 6), {0.3, 0.2}};
    const Vec x = random_vec(g, 4);
    const Vec grad = a.transpose() * (a * x - d.b);
    const double want = oracle::kkt_residual(a, d.b, x, d.pen) / (1.0 + x.norm() + grad.norm());
    EXPECT_NEAR(eta_kkt(x, d), want, 1e-9 * (1.0 + want));
  }
}

TEST(DualityMetrics, NullModelHasNoGap) {
  const Vec b{{1.0, -2.0, 0.5}};
  Mat a(3, 2);
  a << 0.1, 0.0, 0.0, 0.1, 0.1, 0.1;
  const ProblemData d{DesignMatrix(a), b, {10.0, 1.0}};
  const Vec xi = -b;
  const Vec u = -a.transpose() * xi;
  const DualityMetrics m = duality_metrics(Vec::Zero(2), xi, u, d);
  EXPECT_DOUBLE_EQ(m.pobj, 0.5 * b.squaredNorm());
  EXPECT_DOUBLE_EQ(m.dobj, 0.5 * b.squaredNorm());
  EXPECT_EQ(m.eta_gap, 0.0);
  EXPECT_EQ(m.eta_D, 0.0);
}

TEST(DualityMetrics, Formulas) {
  const ProblemData d{DesignMatrix::identity(2), Vec{{1.0, 1.0}}, {1.0, 0.5}};
  const Vec x{{2.0, 0.0}}, xi{{1.0, 0.0}}, u{{0.0, 3.0}};
  const DualityMetrics m = duality_metrics(x, xi, u, d);
  EXPECT_DOUBLE_EQ(m.pobj, 0.5 * 2.0 + 2.0 + 1.0);
  EXPECT_DOUBLE_EQ(m.dobj, -0.5 - 1.0);
  EXPECT_DOUBLE_EQ(m.eta_gap, 5.5 / (1.0 + 4.0 + 1.5));
  EXPECT_DOUBLE_EQ(m.eta_D, std::sqrt(1.0 + 9.0) / 4.0);
  EXPECT_DOUBLE_EQ(primal_objective(x, d), m.pobj);
}

TEST(EtaRel, SignedRelativeDifference) {
  EXPECT_EQ(eta_rel(3.0, 1.0), 1.0);
  EXPECT_EQ(eta_rel(1.0, 3.0), -0.5);
  EXPECT_EQ(eta_rel(2.0, 2.0), 0.0);
}

TEST(Nnz, Examples) {
  EXPECT_EQ(nnz(Vec{{5.0, 0.1, 0.0}}), 2u);
  EXPECT_EQ(nnz(Vec::Zero(4)), 0u);
  EXPECT_EQ(nnz(Vec::Ones(4)), 4u);
  EXPECT_EQ(nnz(Vec{{1.0, 1e-6, 0.0}}), 1u);
}

TEST(Nnz, PermutationAndSignInvariant) {
  std::mt19937_64 g(2);
  for (int t = 0; t < 50; ++t) {
    Vec x = random_vec(g, 20);
    for (Index i = 0; i < 20; i += 3) x[i] *= 1e-7;
    const std::size_t base = nnz(x);
    Vec p = x.reverse();
    p[0] = -p[0];
    EXPECT_EQ(nnz(p), base);
    EXPECT_EQ(nnz(-x), base);
  }
}

TEST(Gnnz, Examples) {
  EXPECT_EQ(gnnz(Vec{{2.0, 2.0, 2.0, 0.0, 0.0}}), 1u);
  EXPECT_EQ(gnnz(Vec{{1.0, 0.9}}), 1u);
  EXPECT_EQ(gnnz(Vec{{1.0, 0.8}}), 2u);
  EXPECT_EQ(gnnz(Vec{{1.0, -1.0}}), 2u);
  EXPECT_EQ(gnnz(Vec::Zero(3)), 0u);
  GroupingRule with_zero;
  with_zero.count_zero_group = true;
  EXPECT_EQ(gnnz(Vec{{2.0, 2.0, 0.0}}, with_zero), 2u);
}

TEST(Gnnz, RecoversPlantedStructure) {
  const Vec x = true_coefficients(1, 3);
  EXPECT_EQ(gnnz(x), 3u);
}

TEST(Gnnz, UnitBoundsCountDistinctValues) {
  EXPECT_EQ(gnnz(Vec{{1.0, 2.0, 2.0, 3.0, -1.0}}, 1e-4, 1.0, 1.0), 4u);
}

TEST(Gnnz, RejectsInvalidBounds) {
  EXPECT_THROW(gnnz(Vec::Ones(2), 1e-4, 1.2, 0.8), std::invalid_argument);
  EXPECT_THROW(gnnz(Vec::Ones(2), -1.0, 0.8, 1.2), std::invalid_argument);
  EXPECT_THROW(gnnz(Vec::Ones(2), 1e-4, 0.0, 1.2), std::invalid_argument);
}

TEST(Gnnz, BoundedByNnzCount) {
  std::mt19937_64 g(3);
  for (int t = 0; t < 50; ++t) {
    const Vec x = random_vec(g, 15);
    std::size_t nonzero = 0;
    for (Index i = 0; i < 15; ++i) nonzero += std::abs(x[i]) >= 1e-4;
    EXPECT_LE(gnnz(x), nonzero);
    EXPECT_GE(gnnz(x), nonzero > 0 ? 1u : 0u);
  }
}

TEST(FullReport, ConsistentWithParts) {
  std::mt19937_64 g(4);
  Mat a(30, 8);
  for (Index j = 0; j < 8; ++j) a.col(j) = random_vec(g, 30);
  const Vec b = random_vec(g, 30);
  const DesignMatrix dm(a);
  const ProblemData d{dm, b, penalties_from_alphas(0.1, 0.1, dm, b)};
  SolverConfig cfg;
  cfg.tol = 1e-9;
  const Solution s = solve(d, cfg);
  const MetricsReport r = full_report(s.x, s.xi, s.u, d, s.pobj);
  const DualityMetrics dm2 = duality_metrics(s.x, s.xi, s.u, d);
  EXPECT_EQ(r.pobj, dm2.pobj);
  EXPECT_EQ(r.dobj, dm2.dobj);
  EXPECT_EQ(r.eta_kkt, eta_kkt(s.x, d));
  ASSERT_TRUE(r.eta_rel.has_value());
  EXPECT_EQ(*r.eta_rel, 0.0);
  EXPECT_EQ(r.nnz, nnz(s.x));
  EXPECT_EQ(r.gnnz, gnnz(s.x));
  EXPECT_LE(r.eta_gap, 1e-9);
  EXPECT_FALSE(full_report(s.x, s.xi, s.u, d).eta_rel.has_value());
}
