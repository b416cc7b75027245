#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <random>

#include "cluslasso/data.hpp"
#include "cluslasso/first_order.hpp"
#include "cluslasso/metrics.hpp"
#include "cluslasso/ssnal.hpp"
#include "oracles.hpp"

using namespace cluslasso;

namespace {

Vec random_vec(std::mt19937_64& g, Index n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = d(g);
  return v;
}

Mat random_mat(std::mt19937_64& g, Index m, Index n) {
  Mat a(m, n);
  for (Index j = 0; j < n; ++j) a.col(j) = random_vec(g, m);
  return a;
}

// Small problem with a planted clustered signal.
ProblemData planted(std::uint64_t seed, Index m, Index n, double a1 = 0.05, double a2 = 0.05) {
  std::mt19937_64 g(seed);
  const Mat a = random_mat(g, m, n);
  Vec x = Vec::Zero(n);
  for (Index i = 0; i < n / 4; ++i) x[i] = 2.0;
  for (Index i = n / 4; i < n / 2; ++i) x[i] = -1.0;
  const Vec b = a * x + 0.1 * random_vec(g, m);
  const DesignMatrix dm(a);
  return {dm, b, penalties_from_alphas(a1, a2, dm, b)};
}

Mat dense_M(const JacobianM& jac) {
  Mat m(jac.n, jac.n);
  for (Index j = 0; j < jac.n; ++j) m.col(j) = apply_M(jac, Vec::Unit(jac.n, j));
  return m;
}

}  // namespace

TEST(GradPsi, ZeroDesign) {
  const ProblemData d{DesignMatrix(Mat::Zero(3, 2)), Vec{{1.0, -2.0, 0.5}}, {0.3, 0.1}};
  const Vec xi{{0.2, 0.4, -1.0}};
  const PsiGradient g = grad_psi(xi, Vec{{5.0, -5.0}}, 2.0, d);
  EXPECT_LT((g.grad - (xi + d.b)).norm(), 1e-15);
}

TEST(GradPsi, FormulaAtMinusB) {
  std::mt19937_64 g(1);
  const ProblemData d{DesignMatrix(random_mat(g, 4, 3)), random_vec(g, 4), {0.1, 0.1}};
  const PsiGradient pg = grad_psi(-d.b, Vec::Zero(3), 1.0, d);
  const Vec want = -d.b + d.b - d.A.matvec(pg.pr.prox);
  EXPECT_LT((pg.grad - want).norm(), 1e-14);
}

TEST(GradPsi, MatchesFiniteDifferences) {
  std::mt19937_64 g(2);
  for (int t = 0; t < 20; ++t) {
    const ProblemData d = planted(100 + t, 8, 6);
    const Vec xt = random_vec(g, 6);
    const double sigma = 0.5 + t * 0.3;
    const Vec xi = random_vec(g, 8);
    const Vec grad = grad_psi(xi, xt, sigma, d).grad;
    for (Index i = 0; i < 8; ++i) {
      const double h = 1e-6;
      const Vec e = Vec::Unit(8, i);
      const double fd = (psi_value(xi + h * e, xt, sigma, d) - psi_value(xi - h * e, xt, sigma, d)) / (2 * h);
      EXPECT_NEAR(fd, grad[i], 1e-5 * (1.0 + std::abs(grad[i])));
    }
  }
}

TEST(PsiValue, ZeroDesignAndZeroData) {
  const ProblemData d{DesignMatrix(Mat::Zero(2, 2)), Vec{{1.0, 1.0}}, {0.5, 0.5}};
  const Vec xi{{1.0, -3.0}};
  // With A = 0: psi = 0.5||xi||^2 + <b, xi> + (sigma/2)||Prox_p(xt/sigma)||^2 - ||xt||^2/(2 sigma).
  EXPECT_NEAR(psi_value(xi, Vec::Zero(2), 2.0, d), 5.0 - 2.0, 1e-15);
  const Vec xt{{4.0, 4.0}};  // Prox_p((2,2)) = (1.5, 1.5)
  EXPECT_NEAR(psi_value(xi, xt, 2.0, d), 3.0 + 1.0 * (1.5 * 1.5 * 2) - 32.0 / 4.0, 1e-14);
}

TEST(PsiValue, StronglyConvexWithModulusOne) {
  std::mt19937_64 g(3);
  const ProblemData d = planted(7, 10, 8);
  const Vec xt = random_vec(g, 8);
  for (int t = 0; t < 100; ++t) {
    const Vec xi = random_vec(g, 10);
    const Vec dxi = random_vec(g, 10);
    const double lhs = psi_value(xi + dxi, xt, 1.7, d) - psi_value(xi, xt, 1.7, d) -
                       grad_psi(xi, xt, 1.7, d).grad.dot(dxi);
    EXPECT_GE(lhs, 0.5 * dxi.squaredNorm() - 1e-10 * (1.0 + dxi.squaredNorm()));
  }
}

TEST(NewtonSystem, ZeroJacobianReturnsRhs) {
  std::mt19937_64 g(4);
  const Mat a = random_mat(g, 5, 4);
  const Penalties pen{1e6, 0.1};
  const JacobianM jac = build_jacobian(prox_clustered(random_vec(g, 4), pen), pen);
  const Vec rhs = random_vec(g, 5);
  EXPECT_LT((solve_newton_system(jac, DesignMatrix(a), 3.0, rhs, {}).h - rhs).norm(), 1e-14);
}

TEST(NewtonSystem, IdentityCase) {
  const Penalties pen{0.0, 0.0};
  const JacobianM jac = build_jacobian(prox_clustered(Vec{{3.0, 1.0, 2.0}}, pen), pen);
  const Vec rhs{{1.0, 2.0, 3.0}};
  const NewtonSolve ns = solve_newton_system(jac, DesignMatrix::identity(3), 4.0, rhs, {});
  EXPECT_LT((ns.h - rhs / 5.0).norm(), 1e-14);
}

TEST(NewtonSystem, MatchesDenseSolveAndVIsBoundedBelow) {
  std::mt19937_64 g(5);
  for (int t = 0; t < 40; ++t) {
    const Index m = 3 + t % 9, n = 2 + (5 * t) % 13;
    const Mat a = random_mat(g, m, n);
    Vec y = random_vec(g, n, 2.0);
    if (n > 3) y[3] = y[0];
    const Penalties pen{0.3, 0.2};
    const JacobianM jac = build_jacobian(prox_clustered(y, pen), pen);
    const double sigma = 0.1 * (t + 1);
    const Mat v = Mat::Identity(m, m) + sigma * a * dense_M(jac) * a.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> es(v);
    EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - 1e-10);
    const Vec rhs = random_vec(g, m);
    SolverConfig cfg;
    const Vec want = v.ldlt().solve(rhs);
    EXPECT_LT((solve_newton_system(jac, DesignMatrix(a), sigma, rhs, cfg).h - want).norm(),
              1e-9 * (1.0 + want.norm()));
    // Force the iterative path.
    cfg.dense_limit = 0;
    const NewtonSolve it = solve_newton_system(jac, DesignMatrix(a), sigma, rhs, cfg);
    EXPECT_LE((v * it.h - rhs).norm(), std::min(cfg.ssn.eta_bar, std::pow(rhs.norm(), 1.0 + cfg.ssn.tau)) * 1.0001);
  }
}

TEST(SsnSolve, ExactStartTakesNoNewtonSteps) {
  const ProblemData d = planted(11, 30, 12);
  SolverConfig cfg;
  cfg.tol = 1e-12;
  const Solution sol = solve(d, cfg);
  ASSERT_EQ(sol.status, Status::Converged);
  const SsnResult r = ssn_solve(sol.x, 2.0, sol.xi, d, cfg, {1e-6, 0.0});
  EXPECT_EQ(r.newton_iters, 0);
  EXPECT_TRUE(r.converged);
}

TEST(SsnSolve, ArmijoConditionHoldsOnAcceptedSteps) {
  const ProblemData d = planted(12, 40, 20);
  SolverConfig cfg;
  cfg.record_steps = true;
  cfg.tol = 1e-9;
  const Solution sol = solve(d, cfg);
  ASSERT_EQ(sol.status, Status::Converged);
  int accepted = 0;
  for (const OuterRecord& r : sol.history) {
    for (const SsnStep& s : r.steps) {
      if (!s.accepted) continue;
      ++accepted;
      EXPECT_LT(s.dir_deriv, 0.0);
      EXPECT_LE(s.merit_after, s.merit_before + cfg.ssn.mu * s.step * s.dir_deriv +
                                   1e-12 * (1.0 + std::abs(s.merit_before)));
    }
  }
  EXPECT_GT(accepted, 0);
}

TEST(Solve, ZeroRhsGivesZero) {
  std::mt19937_64 g(13);
  const ProblemData d{DesignMatrix(random_mat(g, 6, 4)), Vec::Zero(6), {0.1, 0.1}};
  const Solution sol = solve(d);
  EXPECT_EQ(sol.status, Status::Converged);
  EXPECT_EQ(sol.x, Vec::Zero(4));
}

TEST(Solve, NullModelAboveBetaMax) {
  std::mt19937_64 g(14);
  const Mat a = random_mat(g, 10, 5);
  const Vec b = random_vec(g, 10);
  const ProblemData d{DesignMatrix(a), b, {1.01 * (a.transpose() * b).cwiseAbs().maxCoeff(), 0.2}};
  const Solution sol = solve(d);
  EXPECT_EQ(sol.status, Status::Converged);
  EXPECT_LT(sol.x.norm(), 1e-8);
  EXPECT_NEAR(sol.pobj, 0.5 * b.squaredNorm(), 1e-8 * b.squaredNorm());
}

TEST(Solve, DecoupledLassoExample) {
  // Two copies of the one-dimensional lasso: A = I, b = 2, beta = 1 gives x = 1.
  const ProblemData d{DesignMatrix::identity(2), Vec{{2.0, 2.0}}, {1.0, 0.0}};
  SolverConfig cfg;
  cfg.tol = 1e-10;
  const Solution sol = solve(d, cfg);
  EXPECT_EQ(sol.status, Status::Converged);
  EXPECT_LT((sol.x - Vec::Ones(2)).norm(), 1e-8);
}

TEST(Solve, KktResidualAgainstOracle) {
  std::mt19937_64 g(15);
  for (int t = 0; t < 5; ++t) {
    const ProblemData d = planted(200 + t, 12, 8, 0.1, 0.1);
    SolverConfig cfg;
    cfg.tol = 1e-10;
    const Solution sol = solve(d, cfg);
    ASSERT_EQ(sol.status, Status::Converged);
    EXPECT_LE(oracle::kkt_residual(d.A.to_dense(), d.b, sol.x, d.pen), 1e-7);
    EXPECT_LE(sol.eta_kkt, 1e-10);
    EXPECT_LE(sol.eta_gap, 1e-10);
    EXPECT_LE(sol.eta_D, 1e-10);
  }
}

TEST(Solve, WarmStartFromSolutionStopsImmediately) {
  const ProblemData d = planted(16, 50, 20);
  const Solution first = solve(d);
  ASSERT_EQ(first.status, Status::Converged);
  const Solution again = solve(d, {}, dual_state(first));
  EXPECT_EQ(again.status, Status::Converged);
  EXPECT_LE(again.outer_iters, 1);
}

TEST(Solve, ReturnedTripleSatisfiesKkt) {
  // u in the subdifferential at x, A^T xi + u = 0 and xi = Ax - b.
  const ProblemData d = planted(17, 60, 24);
  SolverConfig cfg;
  cfg.tol = 1e-9;
  const Solution sol = solve(d, cfg);
  ASSERT_EQ(sol.status, Status::Converged);
  EXPECT_LT((prox_clustered(sol.x + sol.u, d.pen).prox - sol.x).norm(), 1e-7 * (1.0 + sol.x.norm()));
  EXPECT_LT((d.A.tmatvec(sol.xi) + sol.u).norm(), 1e-8 * (1.0 + sol.u.norm()));
  EXPECT_LT((sol.xi - (d.A.matvec(sol.x) - d.b)).norm(), 1e-7 * (1.0 + sol.xi.norm()));
}

TEST(Solve, AgreesWithPrimalAdmmOnScenario) {
  ScenarioSpec spec;
  spec.id = 1;
  spec.k = 10;
  spec.seed = 42;
  spec.m_override = 2000;
  SyntheticProblem p = generate_scenario(spec);
  p.data.pen = penalties_from_alphas(1e-3, 1.0 / p.data.n(), p.data.A, p.data.b);
  SolverConfig cfg;
  cfg.tol = 1e-8;
  const Solution s = solve(p.data, cfg);
  ASSERT_EQ(s.status, Status::Converged);
  FirstOrderConfig fo;
  fo.tol = 1e-8;
  fo.max_iters = 50000;
  const Solution a = p_admm_solve(p.data, fo);
  EXPECT_LE(std::abs(eta_rel(a.pobj, s.pobj)), 1e-6);
  EXPECT_LE(eta_rel(s.pobj, a.pobj), 1e-8);
}
