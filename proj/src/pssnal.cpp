#include "cluslasso/pssnal.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "cluslasso/metrics.hpp"

namespace cluslasso {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shared pieces of the subproblem at fixed (x_tilde, y_tilde, sigma).
struct Subproblem {
  const ProblemData& data;
  const Vec& x_tilde;
  const Vec& y_tilde;
  double sigma;
  const Mat* gram;
  const Vec* atb;

  // A^T (A x - b)
  Vec normal_residual(const Vec& x) const {
    if (gram) return (*gram) * x - *atb;
    return data.A.tmatvec(data.A.matvec(x) - data.b);
  }
  // A^T A h
  Vec normal_apply(const Vec& h) const {
    if (gram) return (*gram) * h;
    return data.A.tmatvec(data.A.matvec(h));
  }
};

struct PrimalPoint {
  Vec x;
  Vec atr;  // A^T (A x - b)
  ProxResult pr;
};

PrimalPoint evaluate(const Subproblem& s, Vec x, Vec atr) {
  PrimalPoint p;
  p.x = std::move(x);
  p.atr = std::move(atr);
  p.pr = prox_clustered(s.sigma * p.x - s.y_tilde, s.data.pen);
  return p;
}

Vec gradient(const Subproblem& s, const PrimalPoint& p) {
  return p.atr + (s.sigma + 1.0 / s.sigma) * p.x - (s.y_tilde + s.x_tilde / s.sigma) - p.pr.prox;
}

// Moreau-envelope part of phi: p(z) + (sigma/2)||z - v||^2 with v = x - y_tilde/sigma, z = prox/sigma.
double envelope(const Subproblem& s, const PrimalPoint& p) {
  const Vec z = p.pr.prox / s.sigma;
  return regularizer_value(z, s.data.pen) + 0.5 * s.sigma * (z - p.x + s.y_tilde / s.sigma).squaredNorm();
}

// phi(from.x + alpha h) - phi(from.x); the quadratic parts are expanded
// exactly so only the envelope is differenced.
struct PhiChange {
  double value = 0.0;
  double noise = 0.0;  // rounding error of the envelope difference
};

PhiChange phi_change(const Subproblem& s, const PrimalPoint& from, const PrimalPoint& to, double alpha, const Vec& h,
                     const Vec& atah) {
  const double quad = alpha * from.atr.dot(h) + 0.5 * alpha * alpha * h.dot(atah);
  const double prox_term = (alpha * h).dot(to.x + from.x - 2.0 * s.x_tilde) / (2.0 * s.sigma);
  const double e_to = envelope(s, to);
  const double e_from = envelope(s, from);
  const double eps = std::numeric_limits<double>::epsilon();
  return {quad + prox_term + e_to - e_from, 16.0 * eps * (std::abs(e_to) + std::abs(e_from))};
}

}  // namespace

PhiGradient grad_phi(const Vec& x, const Vec& x_tilde, const Vec& y_tilde, double sigma, const ProblemData& data) {
  if (!(sigma > 0.0)) throw std::invalid_argument("grad_phi: sigma must be > 0");
  require_dim(x.size(), data.n(), "grad_phi x");
  require_dim(x_tilde.size(), data.n(), "grad_phi x_tilde");
  require_dim(y_tilde.size(), data.n(), "grad_phi y_tilde");
  const Subproblem s{data, x_tilde, y_tilde, sigma, nullptr, nullptr};
  PrimalPoint p = evaluate(s, x, s.normal_residual(x));
  return {gradient(s, p), std::move(p.pr)};
}

double phi_value(const Vec& x, const Vec& x_tilde, const Vec& y_tilde, double sigma, const ProblemData& data) {
  if (!(sigma > 0.0)) throw std::invalid_argument("phi_value: sigma must be > 0");
  require_dim(x.size(), data.n(), "phi_value x");
  require_dim(x_tilde.size(), data.n(), "phi_value x_tilde");
  require_dim(y_tilde.size(), data.n(), "phi_value y_tilde");
  const Vec z = prox_scaled(x - y_tilde / sigma, 1.0 / sigma, data.pen);
  const Vec d = x - z;
  return 0.5 * (data.A.matvec(x) - data.b).squaredNorm() + regularizer_value(z, data.pen) - y_tilde.dot(d) +
         0.5 * sigma * d.squaredNorm() + (x - x_tilde).squaredNorm() / (2.0 * sigma);
}

NewtonSolve solve_newton_system_primal(const JacobianM& jac, const DesignMatrix& a, double sigma, const Vec& rhs,
                                       const SolverConfig& cfg, const Mat* gram) {
  const Index n = a.cols();
  require_dim(rhs.size(), n, "solve_newton_system_primal rhs");
  require_dim(jac.n, n, "solve_newton_system_primal jacobian");
  if (!rhs.allFinite()) throw std::invalid_argument("solve_newton_system_primal: non-finite rhs");
  NewtonSolve out;
  if (gram) {
    require_dim(gram->rows(), n, "solve_newton_system_primal gram");
    Mat u = *gram;
    u.diagonal().array() += sigma + 1.0 / sigma;
    add_scaled_M(jac, -sigma, u);
    Eigen::LLT<Mat> llt(u);
    if (llt.info() == Eigen::Success) {
      out.h = llt.solve(rhs);
      return out;
    }
  }
  const LinearOperator apply = [&](const Vec& v, Vec& o) {
    o = a.tmatvec(a.matvec(v)) + (sigma + 1.0 / sigma) * v - sigma * apply_M(jac, v);
  };
  CgControls ctrl = cfg.cg;
  ctrl.abs_tol = std::min(cfg.ssn.eta_bar, std::pow(rhs.norm(), 1.0 + cfg.ssn.tau));
  ctrl.rel_tol = 0.0;
  CgResult res = conjugate_gradient(apply, rhs, ctrl);
  out.h = std::move(res.x);
  out.cg_iters = res.iters;
  out.converged = res.converged;
  out.residual = res.residual;
  return out;
}

PrimalState primal_state(const Solution& sol) {
  return {sol.x, sol.z, sol.y, sol.final_sigma > 0.0 ? sol.final_sigma : 1.0, sol.outer_iters};
}

Solution solve_primal(const ProblemData& data, const SolverConfig& cfg, const std::optional<PrimalState>& warm) {
  data.validate();
  cfg.validate();
  const auto t0 = Clock::now();
  const Index m = data.m();
  const Index n = data.n();
  const SsnControls& c = cfg.ssn;

  std::optional<Mat> gram;
  Vec atb = data.A.tmatvec(data.b);
  if (n <= cfg.dense_limit && m >= 4 * n) gram = data.A.gram();
  const Mat* gp = gram ? &*gram : nullptr;

  Solution sol;
  double sigma = cfg.sigma0 > 0.0 ? cfg.sigma0 : std::max(1.0, data.b.norm() / std::sqrt(double(m)));
  if (warm) {
    require_dim(warm->x.size(), n, "warm x");
    require_dim(warm->z.size(), n, "warm z");
    require_dim(warm->y.size(), n, "warm y");
    if (!(warm->sigma > 0.0)) throw std::invalid_argument("solve_primal: warm sigma must be > 0");
    sol.x = warm->x;
    sol.z = warm->z;
    sol.y = warm->y;
    if (cfg.sigma0 <= 0.0) sigma = warm->sigma;
  } else {
    sol.x = Vec::Zero(n);
    sol.z = Vec::Zero(n);
    sol.y = Vec::Zero(n);
  }

  auto measure = [&](OuterRecord& rec) {
    sol.xi = data.A.matvec(sol.z) - data.b;
    sol.u = prox_conjugate(-data.A.tmatvec(sol.xi), 1.0, data.pen);
    const DualityMetrics d = duality_metrics(sol.x, sol.xi, sol.u, data);
    rec.pobj = d.pobj;
    rec.dobj = d.dobj;
    rec.eta_gap = d.eta_gap;
    rec.eta_D = d.eta_D;
    rec.eta_kkt = eta_kkt(sol.x, data);
    return std::max({rec.eta_gap, rec.eta_D, rec.eta_kkt}) <= cfg.tol;
  };
  auto finish = [&](const OuterRecord& rec, Status st) {
    sol.pobj = rec.pobj;
    sol.dobj = rec.dobj;
    sol.eta_gap = rec.eta_gap;
    sol.eta_D = rec.eta_D;
    sol.eta_kkt = rec.eta_kkt;
    sol.status = st;
    sol.final_sigma = sigma;
    sol.wall_time = seconds_since(t0);
    return sol;
  };

  // Shrinking sigma below its start only slows the proximal term down.
  SolverConfig sigma_cfg = cfg;
  sigma_cfg.sigma_min = std::min(cfg.sigma_max, std::max(cfg.sigma_min, sigma));

  OuterRecord start;
  start.k = -1;
  start.sigma = sigma;
  if (measure(start)) return finish(start, Status::Converged);
  OuterRecord last = start;

  for (int k = 0; k < cfg.max_outer; ++k) {
    const Vec x_tilde = sol.x;
    const Vec y_tilde = sol.y;
    const Vec z_prev = sol.z;
    const Subproblem s{data, x_tilde, y_tilde, sigma, gp, &atb};

    OuterRecord rec;
    rec.k = k;
    rec.sigma = sigma;
    PrimalPoint cur = evaluate(s, sol.x, s.normal_residual(sol.x));
    for (int j = 0;; ++j) {
      const Vec g = gradient(s, cur);
      const double gn = g.norm();
      rec.grad_norms.push_back(gn);
      // Criterion (A2) needs the outer step the current x would produce.
      const Vec z_new = cur.pr.prox / sigma;
      const Vec y_new = y_tilde - sigma * (cur.x - z_new);
      const double move = std::sqrt((cur.x - x_tilde).squaredNorm() + (z_new - z_prev).squaredNorm() +
                                    (y_new - y_tilde).squaredNorm());
      const double floor = 1e-13 * (1.0 + cur.atr.norm() + (sigma + 1.0 / sigma) * cur.x.norm() +
                                    (y_tilde + x_tilde / sigma).norm() + cur.pr.prox.norm());
      const double target = std::max(floor, cfg.eps(k) / sigma * std::min(1.0, move));
      rec.inner_tol = target;
      if (gn <= target || j >= c.max_newton) break;

      const JacobianM jac = build_jacobian(cur.pr, data.pen, cfg.ties_tol);
      NewtonSolve ns = solve_newton_system_primal(jac, data.A, sigma, -g, cfg, gp);
      sol.total_cg_iters += ns.cg_iters;
      const double slope = g.dot(ns.h);
      SsnStep step{gn, 0.0, 0.0, 0.0, slope, false, ns.cg_iters};
      if (!(slope < 0.0)) {
        if (cfg.record_steps) rec.steps.push_back(step);
        break;
      }
      const Vec atah = s.normal_apply(ns.h);
      double alpha = 1.0;
      double change = 0.0;
      std::optional<PrimalPoint> next;
      for (int ls = 0; ls < c.max_line_search; ++ls) {
        PrimalPoint trial = evaluate(s, cur.x + alpha * ns.h, cur.atr + alpha * atah);
        const PhiChange pc = phi_change(s, cur, trial, alpha, ns.h, atah);
        change = pc.value;
        // Near the solution the required decrease drops below the rounding
        // error of phi; then a full step that shrinks the gradient is taken.
        const bool armijo = change <= c.mu * alpha * slope;
        if (armijo || (ls == 0 && change <= c.mu * slope + pc.noise && gradient(s, trial).norm() < gn)) {
          next = std::move(trial);
          break;
        }
        alpha *= c.delta_ls;
      }
      if (cfg.record_steps) {
        step.merit_before = phi_value(cur.x, x_tilde, y_tilde, sigma, data);
        step.merit_after = step.merit_before + change;
        step.step = alpha;
        step.accepted = next.has_value();
        rec.steps.push_back(step);
      }
      if (!next) break;
      ++rec.newton_iters;
      Vec atr = s.normal_residual(next->x);
      cur = evaluate(s, std::move(next->x), std::move(atr));
    }
    sol.total_newton_iters += rec.newton_iters;

    sol.x = cur.x;
    sol.z = cur.pr.prox / sigma;
    sol.y = y_tilde - sigma * (sol.x - sol.z);
    sol.outer_iters = k + 1;
    const bool done = measure(rec);
    sol.history.push_back(rec);
    last = rec;
    if (done) return finish(last, Status::Converged);
    if (seconds_since(t0) > cfg.max_time) return finish(last, Status::MaxTime);
    sigma = next_sigma(sigma_cfg, sigma, (sol.x - sol.z).norm() / (1.0 + sol.x.norm()), rec.eta_kkt);
  }
  return finish(last, Status::MaxIters);
}

}  // namespace cluslasso
