#pragma once

// Proximal augmented Lagrangian method on the split primal
//
//   min_{x,z} 0.5||Ax - b||^2 + p(z)   s.t.  x = z,
//
// whose subproblems min_x phi(x) are solved by a semismooth Newton method on
// an n x n system. Suited to m >> n.

#include <optional>

#include "cluslasso/problem.hpp"
#include "cluslasso/solver.hpp"

namespace cluslasso {

struct PrimalState {
  Vec x;
  Vec z;
  Vec y;
  double sigma = 1.0;
  int k = 0;
};

// grad phi(x) = A^T(Ax - b) + (sigma + 1/sigma) x - (y_tilde + x_tilde/sigma) - Prox_p(sigma x - y_tilde).
struct PhiGradient {
  Vec grad;
  ProxResult pr;  // at sigma x - y_tilde
};

PhiGradient grad_phi(const Vec& x, const Vec& x_tilde, const Vec& y_tilde, double sigma, const ProblemData& data);

// 0.5||Ax - b||^2 + p(z) - <y_tilde, x - z> + (sigma/2)||x - z||^2 + ||x - x_tilde||^2/(2 sigma)
// with z = Prox_{p/sigma}(x - y_tilde/sigma).
double phi_value(const Vec& x, const Vec& x_tilde, const Vec& y_tilde, double sigma, const ProblemData& data);

// Solves (A^T A + sigma (I - M) + I/sigma) h = rhs. Dense Cholesky when `gram`
// (A^T A) is supplied, otherwise CG with the same inexactness rule as the dual.
NewtonSolve solve_newton_system_primal(const JacobianM& jac, const DesignMatrix& a, double sigma, const Vec& rhs,
                                       const SolverConfig& cfg, const Mat* gram = nullptr);

Solution solve_primal(const ProblemData& data, const SolverConfig& cfg = {},
                      const std::optional<PrimalState>& warm = {});

PrimalState primal_state(const Solution& sol);

}  // namespace cluslasso
