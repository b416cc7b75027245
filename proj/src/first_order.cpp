#include "cluslasso/first_order.hpp"

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>

#include "cluslasso/metrics.hpp"

namespace cluslasso {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Solves (c I + s K) v = r where K = A A^T (dual side) or A^T A (primal side),
// factorizing whichever Gram matrix is smaller and falling back to CG.
class ShiftedGramSolver {
 public:
  ShiftedGramSolver(const DesignMatrix& a, bool outer, Index dense_limit) : a_(a), outer_(outer) {
    const Index own = outer ? a.rows() : a.cols();
    const Index other = outer ? a.cols() : a.rows();
    if (own <= dense_limit && own <= other) {
      mode_ = Mode::Direct;
      k_ = outer ? a.outer_gram() : a.gram();
    } else if (other <= dense_limit) {
      mode_ = Mode::Woodbury;
      k_ = outer ? a.gram() : a.outer_gram();
    } else if (own <= dense_limit) {
      mode_ = Mode::Direct;
      k_ = outer ? a.outer_gram() : a.gram();
    }
  }

  void set_shift(double c, double s) {
    c_ = c;
    s_ = s;
    if (mode_ == Mode::Cg) return;
    // Woodbury: (cI + s B B^T)^{-1} = (1/c)(I - B (c/s I + B^T B)^{-1} B^T)
    Mat m = k_;
    if (mode_ == Mode::Direct) {
      m *= s;
      m.diagonal().array() += c;
    } else {
      m.diagonal().array() += c / s;
    }
    llt_.compute(m);
    if (llt_.info() != Eigen::Success) mode_ = Mode::Cg;
  }

  // `guess` warm-starts CG; tol is an absolute residual target for CG.
  Vec solve(const Vec& r, const Vec* guess, double tol, int* cg_iters) const {
    switch (mode_) {
      case Mode::Direct:
        return llt_.solve(r);
      case Mode::Woodbury: {
        const Vec br = outer_ ? a_.tmatvec(r) : a_.matvec(r);
        const Vec w = llt_.solve(br);
        return (r - (outer_ ? a_.matvec(w) : a_.tmatvec(w))) / c_;
      }
      case Mode::Cg:
        break;
    }
    const LinearOperator apply = [&](const Vec& v, Vec& o) {
      o = c_ * v + s_ * (outer_ ? a_.matvec(a_.tmatvec(v)) : a_.tmatvec(a_.matvec(v)));
    };
    CgControls ctrl{1000, 0.0, tol};
    CgResult res = conjugate_gradient(apply, r, ctrl, guess);
    if (cg_iters) *cg_iters += res.iters;
    return res.x;
  }

  bool iterative() const { return mode_ == Mode::Cg; }

 private:
  enum class Mode { Direct, Woodbury, Cg };
  const DesignMatrix& a_;
  bool outer_;
  Mode mode_ = Mode::Cg;
  Mat k_;
  Eigen::LLT<Mat> llt_;
  double c_ = 1.0;
  double s_ = 1.0;
};

// Stopping test and bookkeeping shared by the baselines.
class Monitor {
 public:
  Monitor(const ProblemData& data, const FirstOrderConfig& cfg) : data_(data), cfg_(cfg), t0_(Clock::now()) {}

  // True when x meets the configured stopping rule.
  bool converged(const Vec& x) const {
    if (cfg_.pobj_ref) return eta_rel(primal_objective(x, data_), *cfg_.pobj_ref) <= cfg_.tol;
    return eta_kkt(x, data_) <= cfg_.tol;
  }
  bool should_check(int k) const { return k % cfg_.check_every == 0; }
  bool out_of_time() const { return seconds_since(t0_) > cfg_.max_time; }

  // Fills objectives and accuracy measures; xi/u must already be set.
  Solution finish(Solution sol, Status st) const {
    const DualityMetrics d = duality_metrics(sol.x, sol.xi, sol.u, data_);
    sol.pobj = d.pobj;
    sol.dobj = d.dobj;
    sol.eta_gap = d.eta_gap;
    sol.eta_D = d.eta_D;
    sol.eta_kkt = eta_kkt(sol.x, data_);
    if (cfg_.pobj_ref) sol.eta_rel = eta_rel(sol.pobj, *cfg_.pobj_ref);
    sol.status = st;
    sol.wall_time = seconds_since(t0_);
    return sol;
  }

 private:
  const ProblemData& data_;
  const FirstOrderConfig& cfg_;
  Clock::time_point t0_;
};

// Dual variables for a primal iterate: xi = Ax - b, u the projection of -A^T xi onto dom p*.
void fill_dual(Solution& sol, const ProblemData& data) {
  sol.xi = data.A.matvec(sol.x) - data.b;
  sol.u = prox_conjugate(-data.A.tmatvec(sol.xi), 1.0, data.pen);
}

}  // namespace

void FirstOrderConfig::validate() const {
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  if (!(kappa > 0.0 && kappa < golden)) throw std::invalid_argument("FirstOrderConfig: kappa must lie in (0, 1.618...)");
  if (!(sigma > 0.0)) throw std::invalid_argument("FirstOrderConfig: sigma must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("FirstOrderConfig: tol must be > 0");
  if (max_iters < 1 || check_every < 1) throw std::invalid_argument("FirstOrderConfig: iteration counts must be >= 1");
  if (!(max_time > 0.0)) throw std::invalid_argument("FirstOrderConfig: max_time must be > 0");
}

double estimate_lipschitz(const DesignMatrix& a, int iters) {
  if (iters < 1) throw std::invalid_argument("estimate_lipschitz: iters must be >= 1");
  Vec v = Vec::Constant(a.cols(), 1.0 / std::sqrt(double(std::max<Index>(a.cols(), 1))));
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    const Vec w = a.tmatvec(a.matvec(v));
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return 1.01 * lambda;
}

Solution d_admm_solve(const ProblemData& data, const FirstOrderConfig& cfg) {
  data.validate();
  cfg.validate();
  const Monitor mon(data, cfg);
  const DesignMatrix& a = data.A;
  const Index m = data.m();
  const Index n = data.n();
  double sigma = cfg.sigma;

  std::optional<ShiftedGramSolver> solver;
  double lin_tau = cfg.lin_tau;
  if (cfg.variant == AdmmVariant::Linearized) {
    if (lin_tau <= 0.0) lin_tau = estimate_lipschitz(a);  // already 1.01 x the power-iteration estimate
  } else {
    solver.emplace(a, true, cfg.variant == AdmmVariant::Exact ? cfg.dense_limit : 0);
    solver->set_shift(1.0, sigma);
  }

  Solution sol;
  sol.x = Vec::Zero(n);
  sol.u = Vec::Zero(n);
  sol.xi = Vec::Zero(m);
  Vec atxi = Vec::Zero(n);
  Status st = Status::MaxIters;
  if (mon.converged(sol.x)) st = Status::Converged;

  for (int k = 0; k < cfg.max_iters && st != Status::Converged; ++k) {
    if (cfg.variant == AdmmVariant::Linearized) {
      // Quadratic majorized by (sigma tau / 2)||xi - xi_k||^2.
      const Vec rhs = -data.b + a.matvec(sol.x - sigma * (atxi + sol.u)) + sigma * lin_tau * sol.xi;
      sol.xi = rhs / (1.0 + sigma * lin_tau);
    } else {
      const Vec rhs = -data.b + a.matvec(sol.x - sigma * sol.u);
      const double tol =
          cfg.variant == AdmmVariant::Inexact ? std::min(std::pow(0.9, k), 0.1 * rhs.norm()) : 1e-12 * rhs.norm();
      sol.xi = solver->solve(rhs, &sol.xi, tol, &sol.total_cg_iters);
    }
    a.tmatvec(sol.xi, atxi);
    const Vec u_prev = sol.u;
    sol.u = prox_conjugate(sol.x / sigma - atxi, 1.0, data.pen);
    const Vec resid = atxi + sol.u;
    sol.x -= cfg.kappa * sigma * resid;
    sol.outer_iters = k + 1;
    if (cfg.record_pobj) sol.pobj_history.push_back(primal_objective(sol.x, data));

    if (mon.should_check(k + 1) && mon.converged(sol.x)) {
      st = Status::Converged;
      break;
    }
    if (mon.out_of_time()) {
      st = Status::MaxTime;
      break;
    }
    if (cfg.adaptive_sigma && (k + 1) % 10 == 0 && k < cfg.max_iters / 2) {
      const double rp = resid.norm();
      const double rd = sigma * a.matvec(sol.u - u_prev).norm();
      double next = sigma;
      if (rp > 10.0 * rd) next = 2.0 * sigma;
      if (rd > 10.0 * rp) next = 0.5 * sigma;
      if (next != sigma) {
        sigma = next;
        if (solver) solver->set_shift(1.0, sigma);
      }
    }
  }
  sol.final_sigma = sigma;
  return mon.finish(std::move(sol), st);
}

Solution p_admm_solve(const ProblemData& data, const FirstOrderConfig& cfg) {
  data.validate();
  cfg.validate();
  const Monitor mon(data, cfg);
  const DesignMatrix& a = data.A;
  const Index n = data.n();
  const double sigma = cfg.sigma;
  ShiftedGramSolver solver(a, false, cfg.dense_limit);
  solver.set_shift(sigma, 1.0);
  const Vec atb = a.tmatvec(data.b);

  Solution sol;
  sol.x = Vec::Zero(n);
  sol.z = Vec::Zero(n);
  sol.y = Vec::Zero(n);
  Status st = Status::MaxIters;
  if (mon.converged(sol.x)) st = Status::Converged;

  for (int k = 0; k < cfg.max_iters && st != Status::Converged; ++k) {
    const Vec rhs = atb + sigma * sol.z + sol.y;
    sol.x = solver.solve(rhs, &sol.x, 1e-12 * rhs.norm(), &sol.total_cg_iters);
    sol.z = prox_scaled(sol.x - sol.y / sigma, 1.0 / sigma, data.pen);
    sol.y -= cfg.kappa * sigma * (sol.x - sol.z);
    sol.outer_iters = k + 1;
    if (cfg.record_pobj) sol.pobj_history.push_back(primal_objective(sol.x, data));
    if (mon.should_check(k + 1) && mon.converged(sol.x)) {
      st = Status::Converged;
      break;
    }
    if (mon.out_of_time()) {
      st = Status::MaxTime;
      break;
    }
  }
  sol.final_sigma = sigma;
  fill_dual(sol, data);
  return mon.finish(std::move(sol), st);
}

Solution apg_solve(const ProblemData& data, const FirstOrderConfig& cfg, double lipschitz) {
  data.validate();
  cfg.validate();
  const Monitor mon(data, cfg);
  const DesignMatrix& a = data.A;
  const double l = lipschitz > 0.0 ? lipschitz : estimate_lipschitz(a, 100);
  if (!(l > 0.0)) throw std::invalid_argument("apg_solve: Lipschitz constant must be > 0 (A is zero?)");

  Solution sol;
  sol.x = Vec::Zero(data.n());
  Vec w = sol.x;
  double t = 1.0;
  Status st = Status::MaxIters;
  if (cfg.record_pobj) sol.pobj_history.push_back(primal_objective(sol.x, data));
  if (mon.converged(sol.x)) st = Status::Converged;

  for (int k = 0; k < cfg.max_iters && st != Status::Converged; ++k) {
    const Vec grad = a.tmatvec(a.matvec(w) - data.b);
    Vec x_next = prox_scaled(w - grad / l, 1.0 / l, data.pen);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    w = x_next + ((t - 1.0) / t_next) * (x_next - sol.x);
    sol.x = std::move(x_next);
    t = t_next;
    sol.outer_iters = k + 1;
    if (cfg.record_pobj) sol.pobj_history.push_back(primal_objective(sol.x, data));
    if (mon.should_check(k + 1) && mon.converged(sol.x)) {
      st = Status::Converged;
      break;
    }
    if (mon.out_of_time()) {
      st = Status::MaxTime;
      break;
    }
  }
  fill_dual(sol, data);
  return mon.finish(std::move(sol), st);
}

}  // namespace cluslasso
