#pragma once

// Baselines: ADMM on the dual (exact, inexact and linearized subproblem
// solves), ADMM on the split primal, and FISTA.

#include <optional>

#include "cluslasso/problem.hpp"
#include "cluslasso/solver.hpp"

namespace cluslasso {

enum class AdmmVariant { Exact, Inexact, Linearized };

struct FirstOrderConfig {
  double kappa = 1.618;  // step length, in (0, (1 + sqrt 5)/2)
  double sigma = 1.0;
  AdmmVariant variant = AdmmVariant::Exact;
  double lin_tau = 0.0;  // <= 0: 1.01 * lambda_max(A A^T) estimate
  double tol = 1e-6;
  // When set, stop on eta_rel(pobj, *pobj_ref) <= tol instead of eta_kkt <= tol.
  std::optional<double> pobj_ref;
  int max_iters = 20000;
  double max_time = 3.0 * 3600.0;
  int check_every = 1;
  // Residual balancing of sigma (off by default).
  bool adaptive_sigma = false;
  bool record_pobj = false;
  Index dense_limit = 4000;

  void validate() const;
};

Solution d_admm_solve(const ProblemData& data, const FirstOrderConfig& cfg = {});
Solution p_admm_solve(const ProblemData& data, const FirstOrderConfig& cfg = {});

// FISTA with fixed step 1/L; L <= 0 estimates it from A.
Solution apg_solve(const ProblemData& data, const FirstOrderConfig& cfg = {}, double lipschitz = 0.0);

// Power iteration on A^T A from the all-ones vector; returns 1.01 * estimate.
double estimate_lipschitz(const DesignMatrix& a, int iters = 100);

}  // namespace cluslasso
