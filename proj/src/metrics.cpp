#include "cluslasso/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cluslasso/prox.hpp"

namespace cluslasso {

double eta_kkt(const Vec& x, const ProblemData& data) {
  const Vec grad = data.A.tmatvec(data.A.matvec(x) - data.b);
  const Vec p = prox_clustered(x - grad, data.pen).prox;
  return (x - p).norm() / (1.0 + x.norm() + grad.norm());
}

double primal_objective(const Vec& x, const ProblemData& data) {
  return 0.5 * (data.A.matvec(x) - data.b).squaredNorm() + regularizer_value(x, data.pen);
}

DualityMetrics duality_metrics(const Vec& x, const Vec& xi, const Vec& u, const ProblemData& data) {
  require_dim(x.size(), data.n(), "duality_metrics x");
  require_dim(xi.size(), data.m(), "duality_metrics xi");
  require_dim(u.size(), data.n(), "duality_metrics u");
  DualityMetrics d;
  d.pobj = primal_objective(x, data);
  d.dobj = -0.5 * xi.squaredNorm() - data.b.dot(xi);
  d.eta_gap = std::abs(d.pobj - d.dobj) / (1.0 + std::abs(d.pobj) + std::abs(d.dobj));
  d.eta_D = (data.A.tmatvec(xi) + u).norm() / (1.0 + u.norm());
  return d;
}

double eta_rel(double pobj, double pobj_ref) { return (pobj - pobj_ref) / (1.0 + std::abs(pobj_ref)); }

std::size_t nnz(const Vec& x) {
  std::vector<double> mags(x.data(), x.data() + x.size());
  for (double& v : mags) v = std::abs(v);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double total = 0.0;
  for (double v : mags) total += v;
  if (total == 0.0) return 0;
  const double target = 0.99999 * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    acc += mags[k];
    if (acc >= target) return k + 1;
  }
  return mags.size();
}

std::size_t gnnz(const Vec& x, const GroupingRule& rule) {
  if (!(rule.ratio_lo > 0.0 && rule.ratio_lo <= 1.0 && 1.0 <= rule.ratio_hi)) {
    throw std::invalid_argument("gnnz: need 0 < ratio_lo <= 1 <= ratio_hi");
  }
  if (!(rule.zero_tol >= 0.0)) throw std::invalid_argument("gnnz: zero_tol must be >= 0");
  std::vector<double> vals;
  bool has_zero = false;
  for (Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) < rule.zero_tol) {
      has_zero = true;
    } else {
      vals.push_back(x[i]);
    }
  }
  std::sort(vals.begin(), vals.end(), std::greater<>());
  std::size_t groups = 0;
  bool open = false;
  bool positive = true;
  double lo = 0.0;
  double hi = 0.0;
  for (double v : vals) {
    const double a = std::abs(v);
    if (open && (v > 0.0) == positive) {
      const double new_lo = std::min(lo, a);
      const double new_hi = std::max(hi, a);
      if (new_lo / new_hi >= rule.ratio_lo && new_hi / new_lo <= rule.ratio_hi) {
        lo = new_lo;
        hi = new_hi;
        continue;
      }
    }
    ++groups;
    open = true;
    positive = v > 0.0;
    lo = hi = a;
  }
  if (rule.count_zero_group && has_zero) ++groups;
  return groups;
}

std::size_t gnnz(const Vec& x, double zero_tol, double ratio_lo, double ratio_hi) {
  return gnnz(x, GroupingRule{zero_tol, ratio_lo, ratio_hi, false});
}

MetricsReport full_report(const Vec& x, const Vec& xi, const Vec& u, const ProblemData& data,
                          std::optional<double> pobj_ref) {
  MetricsReport r;
  const DualityMetrics d = duality_metrics(x, xi, u, data);
  r.pobj = d.pobj;
  r.dobj = d.dobj;
  r.eta_gap = d.eta_gap;
  r.eta_D = d.eta_D;
  r.eta_kkt = eta_kkt(x, data);
  if (pobj_ref) r.eta_rel = eta_rel(r.pobj, *pobj_ref);
  r.nnz = nnz(x);
  r.gnnz = gnnz(x);
  return r;
}

}  // namespace cluslasso
