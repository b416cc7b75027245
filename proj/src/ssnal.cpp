#include "cluslasso/ssnal.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "cluslasso/first_order.hpp"
#include "cluslasso/metrics.hpp"

namespace cluslasso {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Dense factors beyond this many entries are not formed; CG is used instead.
constexpr double kMaxDenseEntries = 3.0e7;

// Everything the line search needs at one xi.
struct DualPoint {
  Vec xi;
  Vec atxi;  // A^T xi
  ProxResult pr;
  Vec a_prox;  // A Prox_p(y)
};

DualPoint evaluate(Vec xi, Vec atxi, const Vec& x_tilde, double sigma, const ProblemData& data) {
  DualPoint p;
  p.xi = std::move(xi);
  p.atxi = std::move(atxi);
  p.pr = prox_clustered(x_tilde / sigma - p.atxi, data.pen);
  data.A.matvec(p.pr.prox, p.a_prox);
  return p;
}

Vec gradient(const DualPoint& p, double sigma, const ProblemData& data) {
  return p.xi + data.b - sigma * p.a_prox;
}

// psi(xi + d) - psi(xi), arranged to avoid subtracting two large totals.
double psi_change(const DualPoint& from, const DualPoint& to, double sigma, const ProblemData& data) {
  const Vec d = to.xi - from.xi;
  const Vec dp = to.pr.prox - from.pr.prox;
  const Vec sp = to.pr.prox + from.pr.prox;
  return from.xi.dot(d) + 0.5 * d.squaredNorm() + data.b.dot(d) + 0.5 * sigma * dp.dot(sp);
}

double psi_at(const DualPoint& p, const Vec& x_tilde, double sigma, const ProblemData& data) {
  return 0.5 * p.xi.squaredNorm() + data.b.dot(p.xi) + 0.5 * sigma * p.pr.prox.squaredNorm() -
         x_tilde.squaredNorm() / (2.0 * sigma);
}

}  // namespace

PsiGradient grad_psi(const Vec& xi, const Vec& x_tilde, double sigma, const ProblemData& data) {
  if (!(sigma > 0.0)) throw std::invalid_argument("grad_psi: sigma must be > 0");
  require_dim(xi.size(), data.m(), "grad_psi xi");
  require_dim(x_tilde.size(), data.n(), "grad_psi x_tilde");
  DualPoint p = evaluate(xi, data.A.tmatvec(xi), x_tilde, sigma, data);
  return {gradient(p, sigma, data), std::move(p.pr)};
}

double psi_value(const Vec& xi, const Vec& x_tilde, double sigma, const ProblemData& data) {
  if (!(sigma > 0.0)) throw std::invalid_argument("psi_value: sigma must be > 0");
  require_dim(xi.size(), data.m(), "psi_value xi");
  require_dim(x_tilde.size(), data.n(), "psi_value x_tilde");
  const Vec prox = prox_clustered(x_tilde / sigma - data.A.tmatvec(xi), data.pen).prox;
  // p*(Prox_{p*/sigma}(y)) vanishes: the argument always lies in dom p*.
  return 0.5 * xi.squaredNorm() + data.b.dot(xi) + 0.5 * sigma * prox.squaredNorm() -
         x_tilde.squaredNorm() / (2.0 * sigma);
}

NewtonSolve solve_newton_system(const JacobianM& jac, const DesignMatrix& a, double sigma, const Vec& rhs,
                                const SolverConfig& cfg) {
  require_dim(rhs.size(), a.rows(), "solve_newton_system rhs");
  if (!rhs.allFinite()) throw std::invalid_argument("solve_newton_system: non-finite rhs");
  const AmaFactors f = ama_factors(jac, a);
  const Index m = a.rows();
  const Index g = static_cast<Index>(f.gamma.size());
  const Index r = g + f.au.cols();

  NewtonSolve out;
  if (r == 0) {
    out.h = rhs;
    return out;
  }

  const bool small_rank = r <= std::min(m, cfg.dense_limit) && double(m) * double(r) <= kMaxDenseEntries;
  const bool small_m = m <= cfg.dense_limit;
  if (small_rank || small_m) {
    Mat w(m, r);
    if (g > 0) w.leftCols(g) = f.a_gamma.to_dense();
    w.rightCols(f.au.cols()) = f.au;
    if (small_rank) {
      // (I + sigma W W^T)^{-1} = I - W (I/sigma + W^T W)^{-1} W^T
      Mat inner = Mat::Identity(r, r) / sigma;
      inner.selfadjointView<Eigen::Lower>().rankUpdate(w.transpose());
      Eigen::LLT<Mat> llt(inner.selfadjointView<Eigen::Lower>());
      if (llt.info() == Eigen::Success) {
        out.h = rhs - w * llt.solve(w.transpose() * rhs);
        return out;
      }
    } else {
      Mat v = Mat::Identity(m, m);
      v.selfadjointView<Eigen::Lower>().rankUpdate(w, sigma);
      Eigen::LLT<Mat> llt(v.selfadjointView<Eigen::Lower>());
      if (llt.info() == Eigen::Success) {
        out.h = llt.solve(rhs);
        return out;
      }
    }
  }

  const LinearOperator apply = [&](const Vec& v, Vec& o) {
    o = v;
    if (g > 0) o += sigma * f.a_gamma.matvec(f.a_gamma.tmatvec(v));
    if (f.au.cols() > 0) o.noalias() += sigma * (f.au * (f.au.transpose() * v));
  };
  const double rn = rhs.norm();
  CgControls ctrl = cfg.cg;
  ctrl.abs_tol = std::min(cfg.ssn.eta_bar, std::pow(rn, 1.0 + cfg.ssn.tau));
  ctrl.rel_tol = 0.0;
  CgResult res = conjugate_gradient(apply, rhs, ctrl);
  out.h = std::move(res.x);
  out.cg_iters = res.iters;
  out.converged = res.converged;
  out.residual = res.residual;
  return out;
}

SsnResult ssn_solve(const Vec& x_tilde, double sigma, const Vec& xi0, const ProblemData& data,
                    const SolverConfig& cfg, const InnerStop& stop) {
  if (!(sigma > 0.0)) throw std::invalid_argument("ssn_solve: sigma must be > 0");
  require_dim(xi0.size(), data.m(), "ssn_solve xi0");
  require_dim(x_tilde.size(), data.n(), "ssn_solve x_tilde");
  const SsnControls& c = cfg.ssn;
  const Vec x_scaled = x_tilde / sigma;

  SsnResult out;
  DualPoint cur = evaluate(xi0, data.A.tmatvec(xi0), x_tilde, sigma, data);
  for (int j = 0;; ++j) {
    const Vec g = gradient(cur, sigma, data);
    const double gn = g.norm();
    out.grad_norms.push_back(gn);
    const double infeas = (x_scaled - cur.pr.prox).norm();  // ||A^T xi + u||
    // Below this the gradient is rounding noise.
    const double floor = 1e-13 * (1.0 + cur.xi.norm() + data.b.norm() + sigma * cur.a_prox.norm());
    const double target = std::max(floor, std::min(stop.abs, stop.rel * infeas));
    if (gn <= target) {
      out.converged = true;
      break;
    }
    if (j >= c.max_newton) break;

    const JacobianM jac = build_jacobian(cur.pr, data.pen, cfg.ties_tol);
    NewtonSolve ns = solve_newton_system(jac, data.A, sigma, -g, cfg);
    out.cg_iters += ns.cg_iters;
    const double slope = g.dot(ns.h);
    SsnStep step{gn, 0.0, 0.0, 0.0, slope, false, ns.cg_iters};
    if (!(slope < 0.0)) {
      if (cfg.record_steps) out.steps.push_back(step);
      break;
    }

    const Vec ath = data.A.tmatvec(ns.h);
    double alpha = 1.0;
    std::optional<DualPoint> next;
    double change = 0.0;
    for (int ls = 0; ls < c.max_line_search; ++ls) {
      DualPoint trial = evaluate(cur.xi + alpha * ns.h, cur.atxi + alpha * ath, x_tilde, sigma, data);
      change = psi_change(cur, trial, sigma, data);
      if (change <= c.mu * alpha * slope) {
        next = std::move(trial);
        break;
      }
      alpha *= c.delta_ls;
    }
    if (cfg.record_steps) {
      step.merit_before = psi_at(cur, x_tilde, sigma, data);
      step.merit_after = step.merit_before + change;
      step.step = alpha;
      step.accepted = next.has_value();
      out.steps.push_back(step);
    }
    if (!next) break;
    ++out.newton_iters;
    // Refresh A^T xi so the running update does not drift.
    Vec atxi = data.A.tmatvec(next->xi);
    cur = evaluate(std::move(next->xi), std::move(atxi), x_tilde, sigma, data);
  }
  out.xi = std::move(cur.xi);
  out.pr = std::move(cur.pr);
  return out;
}

DualState dual_state(const Solution& sol) {
  return {sol.xi, sol.u, sol.x, sol.final_sigma > 0.0 ? sol.final_sigma : 1.0, sol.outer_iters};
}

Solution solve(const ProblemData& data, const SolverConfig& cfg, const std::optional<DualState>& warm) {
  data.validate();
  cfg.validate();
  const auto t0 = Clock::now();
  const Index m = data.m();
  const Index n = data.n();

  Solution sol;
  double sigma = cfg.sigma0;
  if (sigma <= 0.0) {
    // psi has curvature up to sigma * lambda_max(A A^T); start where that is O(10).
    const double l = estimate_lipschitz(data.A, 20);
    sigma = l > 0.0 ? 10.0 / l : 1.0;
  }
  if (warm) {
    require_dim(warm->xi.size(), m, "warm xi");
    require_dim(warm->u.size(), n, "warm u");
    require_dim(warm->x.size(), n, "warm x");
    if (!(warm->sigma > 0.0)) throw std::invalid_argument("solve: warm sigma must be > 0");
    sol.xi = warm->xi;
    sol.u = warm->u;
    sol.x = warm->x;
    if (cfg.sigma0 <= 0.0) sigma = warm->sigma;
  } else {
    sol.xi = Vec::Zero(m);
    sol.u = Vec::Zero(n);
    sol.x = Vec::Zero(n);
  }

  auto measure = [&](OuterRecord& rec) {
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

  OuterRecord start;
  start.k = -1;
  start.sigma = sigma;
  if (measure(start)) return finish(start, Status::Converged);
  OuterRecord last = start;

  for (int k = 0; k < cfg.max_outer; ++k) {
    const InnerStop stop{cfg.eps(k) / std::sqrt(sigma), std::min(cfg.delta(k) * std::sqrt(sigma), cfg.deltap(k))};
    SsnResult ssn = ssn_solve(sol.x, sigma, sol.xi, data, cfg, stop);
    sol.total_newton_iters += ssn.newton_iters;
    sol.total_cg_iters += ssn.cg_iters;
    sol.xi = std::move(ssn.xi);
    const Vec y = sol.x / sigma - data.A.tmatvec(sol.xi);
    const double infeas = (sol.x / sigma - ssn.pr.prox).norm();
    sol.u = y - ssn.pr.prox;
    sol.x = sigma * ssn.pr.prox;
    sol.outer_iters = k + 1;

    OuterRecord rec;
    rec.k = k;
    rec.sigma = sigma;
    rec.newton_iters = ssn.newton_iters;
    rec.inner_tol = std::min(stop.abs, stop.rel * infeas);
    rec.grad_norms = std::move(ssn.grad_norms);
    rec.steps = std::move(ssn.steps);
    const bool done = measure(rec);
    sol.history.push_back(rec);
    last = rec;
    if (done) return finish(last, Status::Converged);
    if (seconds_since(t0) > cfg.max_time) return finish(last, Status::MaxTime);
    sigma = next_sigma(cfg, sigma, rec.eta_D, rec.eta_kkt);
  }
  return finish(last, Status::MaxIters);
}

}  // namespace cluslasso
