#pragma once

#include <cstddef>
#include <optional>

#include "cluslasso/problem.hpp"

namespace cluslasso {

struct MetricsReport {
  double pobj = 0.0;
  double dobj = 0.0;
  double eta_gap = 0.0;
  double eta_D = 0.0;
  double eta_kkt = 0.0;
  std::optional<double> eta_rel;
  std::size_t nnz = 0;
  std::size_t gnnz = 0;
};

struct DualityMetrics {
  double pobj = 0.0;
  double dobj = 0.0;
  double eta_gap = 0.0;
  double eta_D = 0.0;
};

// ||x - Prox_p(x - A^T(Ax - b))|| / (1 + ||x|| + ||A^T(Ax - b)||)
double eta_kkt(const Vec& x, const ProblemData& data);

// pobj = 0.5||Ax - b||^2 + p(x), dobj = -0.5||xi||^2 - <b, xi>,
// eta_gap = |pobj - dobj| / (1 + |pobj| + |dobj|), eta_D = ||A^T xi + u|| / (1 + ||u||).
DualityMetrics duality_metrics(const Vec& x, const Vec& xi, const Vec& u, const ProblemData& data);

double primal_objective(const Vec& x, const ProblemData& data);

// (pobj - pobj_ref) / (1 + |pobj_ref|); signed, as a one-sided stopping test.
double eta_rel(double pobj, double pobj_ref);

// Smallest k whose k largest magnitudes hold 99.999% of ||x||_1; 0 for x = 0.
std::size_t nnz(const Vec& x);

struct GroupingRule {
  double zero_tol = 1e-4;
  double ratio_lo = 5.0 / 6.0;
  double ratio_hi = 6.0 / 5.0;
  bool count_zero_group = false;
};

// Number of value clusters: within a group all pairwise ratios lie in
// [ratio_lo, ratio_hi] and signs agree; |x_i| < zero_tol forms the zero group.
std::size_t gnnz(const Vec& x, const GroupingRule& rule = {});
std::size_t gnnz(const Vec& x, double zero_tol, double ratio_lo, double ratio_hi);

MetricsReport full_report(const Vec& x, const Vec& xi, const Vec& u, const ProblemData& data,
                          std::optional<double> pobj_ref = std::nullopt);

}  // namespace cluslasso
