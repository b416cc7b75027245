#pragma once

// Clustered lasso regularizer
//
//   p(x) = beta * ||x||_1 + rho * sum_{i<j} |x_i - x_j|
//
// and its proximal mapping. The pairwise sum equals <w, sort_desc(x)> with
// w_k = n - 2k + 1 (k = 1..n), so p costs O(n log n). The prox of the pairwise
// term alone (S_rho) is an isotone projection of the sorted input shifted by
// rho * w, computed by pool-adjacent-violators; Prox_p then soft-thresholds
// S_rho at beta.

#include <cstdint>
#include <vector>

#include "cluslasso/types.hpp"

namespace cluslasso {

// Maximal run [start, start + len) of sorted coordinates sharing one projected value.
struct Block {
  Index start = 0;
  Index len = 0;
  double value = 0.0;
};

// Contiguous, disjoint, covering; values strictly decreasing across blocks.
struct BlockPartition {
  std::vector<Block> blocks;
};

struct IsotoneProjection {
  Vec x;
  BlockPartition partition;
};

struct SortedProjection {
  Vec s;                    // S_rho(y), original coordinates
  std::vector<Index> perm;  // perm[k] = original index at sorted position k
  BlockPartition partition;  // over sorted positions
  bool sorted = true;       // false for the rho == 0 shortcut (perm is identity)
};

struct ProxResult {
  Vec s_rho;
  Vec prox;
  std::vector<Index> perm;
  BlockPartition partition;
  std::vector<std::uint8_t> theta;  // |s_rho_i| > beta
  bool sorted = true;
  double input_scale = 0.0;  // ||y||_inf of the input
};

// w_k = n - 2k + 1 for k = 1..n.
Vec weight_vector(Index n);

// beta*||x||_1 + rho*<w, x sorted non-increasing>.
double regularizer_value(const Vec& x, const Penalties& pen);

// Euclidean projection onto {x : x_1 >= x_2 >= ... >= x_n}, via PAV.
IsotoneProjection project_isotone(const Vec& v);

// Multipliers lambda (size n-1) of the projection KKT system
// x - v + B^T lambda = 0, i.e. lambda_k = sum_{i<=k} (v_i - x_i).
// Feasible projections have lambda <= 0.
Vec isotone_multipliers(const Vec& v, const Vec& x);

// Stable descending sort permutation; ties broken by original index.
std::vector<Index> sort_descending(const Vec& y);

SortedProjection s_rho(const Vec& y, double rho);

ProxResult prox_clustered(const Vec& y, const Penalties& pen);

// Prox_{t p}(y), computed with penalties scaled by t.
Vec prox_scaled(const Vec& y, double t, const Penalties& pen);

// Prox_{p*/t}(y). p is positively homogeneous, so p* is the indicator of a
// closed convex set and the result is the projection y - Prox_p(y) for every t.
Vec prox_conjugate(const Vec& y, double t, const Penalties& pen);

// Elementwise sign(v) * max(|v| - beta, 0).
Vec soft_threshold(const Vec& v, double beta);

}  // namespace cluslasso
