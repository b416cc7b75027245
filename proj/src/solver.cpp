#include "cluslasso/solver.hpp"

#include <algorithm>
#include <stdexcept>

namespace cluslasso {

std::string to_string(Status s) {
  switch (s) {
    case Status::Converged:
      return "converged";
    case Status::MaxIters:
      return "max_iters";
    case Status::MaxTime:
      return "max_time";
  }
  return "unknown";
}

double next_sigma(const SolverConfig& cfg, double sigma, double eta_constraint, double eta_opt) {
  if (!cfg.balance_sigma || eta_constraint > eta_opt) return std::min(cfg.sigma_max, cfg.sigma_growth * sigma);
  if (eta_opt > cfg.balance_ratio * eta_constraint) return std::max(cfg.sigma_min, sigma / cfg.sigma_growth);
  return sigma;
}

void SolverConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("SolverConfig: ") + what); };
  if (!(ssn.mu > 0.0 && ssn.mu < 0.5)) fail("mu must lie in (0, 1/2)");
  if (!(ssn.eta_bar > 0.0 && ssn.eta_bar < 1.0)) fail("eta_bar must lie in (0, 1)");
  if (!(ssn.tau > 0.0 && ssn.tau <= 1.0)) fail("tau must lie in (0, 1]");
  if (!(ssn.delta_ls > 0.0 && ssn.delta_ls < 1.0)) fail("delta_ls must lie in (0, 1)");
  if (ssn.max_newton < 1 || ssn.max_line_search < 1) fail("Newton and line-search budgets must be >= 1");
  if (!(sigma_min > 0.0) || !(sigma_min <= sigma_max)) fail("need 0 < sigma_min <= sigma_max");
  if (!(balance_ratio >= 1.0)) fail("balance_ratio must be >= 1");
  if (!(sigma_growth >= 1.0) || !(sigma_max > 0.0)) fail("sigma_growth >= 1 and sigma_max > 0 required");
  // Summable eps_k, delta_k.
  if (!(eps0 > 0.0) || !(eps_rate > 0.0 && eps_rate < 1.0)) fail("eps sequence must be positive and summable");
  if (!(delta0 > 0.0 && delta0 < 1.0) || !(delta_rate > 0.0 && delta_rate < 1.0)) {
    fail("delta sequence must lie in (0, 1) and be summable");
  }
  if (!(tol > 0.0)) fail("tol must be > 0");
  if (max_outer < 1) fail("max_outer must be >= 1");
  if (!(max_time > 0.0)) fail("max_time must be > 0");
  if (!(ties_tol >= 0.0)) fail("ties_tol must be >= 0");
  if (cg.max_iters < 1) fail("cg.max_iters must be >= 1");
}

}  // namespace cluslasso
