#pragma once

// Slow, independent reference computations used only by the tests. None of
// these call into the library's prox, PAV or Jacobian code.

#include <cstdint>
#include <vector>

#include "cluslasso/types.hpp"

namespace oracle {

using cluslasso::Index;
using cluslasso::Mat;
using cluslasso::Penalties;
using cluslasso::Vec;

// beta * ||x||_1 + rho * sum_{i<j} |x_i - x_j|, by the O(n^2) double loop.
double pairwise_penalty(const Vec& x, const Penalties& pen);

struct ProxCertificate {
  Vec x;
  double objective = 0.0;  // 0.5||x - y||^2 + p(x)
  double gap = 0.0;        // primal minus dual; ||x - x*|| <= sqrt(2 gap)
  int iters = 0;
};

// argmin 0.5||x - y||^2 + p(x) by restarted FISTA on the box-constrained dual
// of the stacked l1 form ||K x||_1, K = [beta I; rho (e_i - e_j)_{i<j}].
ProxCertificate prox_fista(const Vec& y, const Penalties& pen, double gap_tol = 1e-12, int max_iters = 2000000);

// Projection onto {x_1 >= ... >= x_n} by enumerating active sets of the
// constraint matrix B (rows e_i - e_{i+1}) and testing the KKT conditions.
// Exponential; n <= 12 or so.
Vec isotone_active_set(const Vec& v);

// Same projection from the min-max formula
//   x_i = min_{k <= i} max_{j >= i} mean(v_k..v_j).   O(n^3).
Vec isotone_minimax(const Vec& v);

// Dense generalized-Jacobian element Theta P^T (I - B^T (S B B^T S)^+ B) P at y,
// built from the sort of y, the min-max projection and a pseudo-inverse.
// Equal consecutive projected values (within tie_tol * (1 + max|s|)) mark active
// constraints; |s_i| <= beta gives theta_i = 0.
Mat jacobian_dense(const Vec& y, const Penalties& pen, double tie_tol = 1e-9);

// Largest eigenvalue of A^T A from a symmetric eigensolver.
double lambda_max_gram(const Mat& a);

// ||x - Prox_p(x - A^T(Ax - b))|| with the FISTA prox; zero exactly at the
// minimizer of 0.5||Ax - b||^2 + p(x).
double kkt_residual(const Mat& a, const Vec& b, const Vec& x, const Penalties& pen);

}  // namespace oracle
