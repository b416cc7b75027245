#pragma once

// Augmented Lagrangian method on the dual
//
//   max_xi,u  -0.5||xi||^2 - <b, xi> - p*(u)   s.t.  A^T xi + u = 0,
//
// with each subproblem min_xi psi(xi) solved by a semismooth Newton method.

#include <limits>
#include <optional>

#include "cluslasso/problem.hpp"
#include "cluslasso/solver.hpp"

namespace cluslasso {

struct DualState {
  Vec xi;
  Vec u;
  Vec x;
  double sigma = 1.0;
  int k = 0;
};

// grad psi(xi) = xi + b - sigma A Prox_p(x_tilde/sigma - A^T xi).
struct PsiGradient {
  Vec grad;
  ProxResult pr;  // at y = x_tilde/sigma - A^T xi
};

PsiGradient grad_psi(const Vec& xi, const Vec& x_tilde, double sigma, const ProblemData& data);

// 0.5||xi||^2 + <b, xi> + (sigma/2)||Prox_p(y)||^2 - ||x_tilde||^2/(2 sigma).
double psi_value(const Vec& xi, const Vec& x_tilde, double sigma, const ProblemData& data);

// Solves (I + sigma A M A^T) h = rhs. Direct (Woodbury or dense Cholesky) when
// the factors are small enough, otherwise CG to ||V h - rhs|| <= min(eta_bar, ||rhs||^{1+tau}).
NewtonSolve solve_newton_system(const JacobianM& jac, const DesignMatrix& a, double sigma, const Vec& rhs,
                                const SolverConfig& cfg);

// Inner stopping rule: ||grad|| <= max(floor, min(abs, rel * ||A^T xi + u||)).
struct InnerStop {
  double abs = 0.0;
  double rel = std::numeric_limits<double>::infinity();
};

struct SsnResult {
  Vec xi;
  ProxResult pr;  // at the returned xi
  int newton_iters = 0;
  int cg_iters = 0;
  bool converged = false;
  std::vector<double> grad_norms;
  std::vector<SsnStep> steps;
};

SsnResult ssn_solve(const Vec& x_tilde, double sigma, const Vec& xi0, const ProblemData& data,
                    const SolverConfig& cfg, const InnerStop& stop);

Solution solve(const ProblemData& data, const SolverConfig& cfg = {}, const std::optional<DualState>& warm = {});

// Final iterate of a dual solve, for warm starts along a penalty path.
DualState dual_state(const Solution& sol);

}  // namespace cluslasso
