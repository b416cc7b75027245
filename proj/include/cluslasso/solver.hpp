#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cluslasso/linalg.hpp"
#include "cluslasso/jacobian.hpp"

namespace cluslasso {

enum class Status { Converged, MaxIters, MaxTime };

std::string to_string(Status s);

// Semismooth Newton constants; ranges mu in (0, 1/2), eta_bar in (0, 1),
// tau in (0, 1], delta_ls in (0, 1).
struct SsnControls {
  double mu = 1e-4;
  double eta_bar = 0.1;
  double tau = 0.5;
  double delta_ls = 0.5;
  int max_newton = 50;
  int max_line_search = 40;
};

struct SolverConfig {
  // sigma0 <= 0 picks a default from the data: 10 / lambda_max(A A^T) for the
  // dual solver, max(1, ||b|| / sqrt(m)) for the primal one.
  double sigma0 = 0.0;
  double sigma_growth = 3.0;
  double sigma_max = 1e6;
  double sigma_min = 1e-10;
  // Grow sigma only while the constraint residual eta_D lags eta_kkt, and
  // shrink it when eta_kkt lags by more than balance_ratio; otherwise grow every step.
  bool balance_sigma = true;
  double balance_ratio = 10.0;

  // eps_k = eps0 * eps_rate^k, delta_k = delta0 * delta_rate^k, delta'_k = 1/(k+1).
  double eps0 = 1.0;
  double eps_rate = 0.5;
  double delta0 = 0.1;
  double delta_rate = 0.5;

  SsnControls ssn;
  CgControls cg{200, 1e-12, 0.0};
  double ties_tol = kDefaultTiesTol;

  double tol = 1e-6;
  int max_outer = 100;
  double max_time = 3.0 * 3600.0;  // seconds

  // Newton systems up to this size are factorized densely.
  Index dense_limit = 4000;
  bool record_steps = false;

  double eps(int k) const { return eps0 * std::pow(eps_rate, k); }
  double delta(int k) const { return delta0 * std::pow(delta_rate, k); }
  double deltap(int k) const { return 1.0 / (k + 1.0); }

  // Throws std::invalid_argument when a constant is outside its admissible range.
  void validate() const;
};

// Penalty update after an outer step, from the constraint residual and the optimality residual.
double next_sigma(const SolverConfig& cfg, double sigma, double eta_constraint, double eta_opt);

// One accepted (or rejected) Newton step.
struct SsnStep {
  double grad_norm = 0.0;
  double merit_before = 0.0;
  double merit_after = 0.0;
  double step = 0.0;
  double dir_deriv = 0.0;  // <grad, h>
  bool accepted = false;
  int cg_iters = 0;
};

struct OuterRecord {
  int k = 0;
  double sigma = 0.0;
  double pobj = 0.0;
  double dobj = 0.0;
  double eta_kkt = 0.0;
  double eta_gap = 0.0;
  double eta_D = 0.0;
  int newton_iters = 0;
  double inner_tol = 0.0;
  std::vector<double> grad_norms;  // ||grad|| at every Newton iterate, last = exit value
  std::vector<SsnStep> steps;      // filled when record_steps
};

struct Solution {
  Vec x;
  Vec xi;  // dual variable of (D)
  Vec u;
  Vec z;   // primal solver: prox copy of x
  Vec y;   // primal solver: multiplier of x = z

  double pobj = 0.0;
  double dobj = 0.0;
  double eta_kkt = 0.0;
  double eta_gap = 0.0;
  double eta_D = 0.0;
  std::optional<double> eta_rel;

  int outer_iters = 0;
  int total_newton_iters = 0;
  int total_cg_iters = 0;
  double wall_time = 0.0;  // seconds
  Status status = Status::MaxIters;
  double final_sigma = 0.0;

  std::vector<OuterRecord> history;
  std::vector<double> pobj_history;  // first-order solvers, when requested
};

// Result of solving one Newton system.
struct NewtonSolve {
  Vec h;
  int cg_iters = 0;
  bool converged = true;
  double residual = 0.0;
};

}  // namespace cluslasso
