#include "cluslasso/jacobian.hpp"

#include <cmath>

namespace cluslasso {

namespace {

void validate(const ProxResult& pr, const Penalties& pen) {
  const Index n = pr.s_rho.size();
  if (pr.prox.size() != n || static_cast<Index>(pr.perm.size()) != n ||
      static_cast<Index>(pr.theta.size()) != n) {
    throw InconsistentProxResult("build_jacobian: ProxResult fields have mismatched sizes");
  }
  std::vector<std::uint8_t> seen(static_cast<size_t>(n), 0);
  for (Index k = 0; k < n; ++k) {
    const Index i = pr.perm[k];
    if (i < 0 || i >= n || seen[i]) throw InconsistentProxResult("build_jacobian: perm is not a permutation");
    seen[i] = 1;
  }
  Index next = 0;
  for (const Block& b : pr.partition.blocks) {
    if (b.start != next || b.len < 1) throw InconsistentProxResult("build_jacobian: partition does not cover [0, n)");
    for (Index k = b.start; k < b.start + b.len; ++k) {
      if (pr.s_rho[pr.perm[k]] != b.value) {
        throw InconsistentProxResult("build_jacobian: partition values disagree with s_rho");
      }
    }
    next += b.len;
  }
  if (next != n) throw InconsistentProxResult("build_jacobian: partition does not cover [0, n)");
  for (Index i = 0; i < n; ++i) {
    const bool expect = std::abs(pr.s_rho[i]) > pen.beta;
    if (static_cast<bool>(pr.theta[i]) != expect) {
      throw InconsistentProxResult("build_jacobian: theta does not match s_rho and beta");
    }
  }
}

}  // namespace

Index JacobianM::rank() const {
  Index t = 0;
  for (const auto& g : groups) t += g.active ? 1 : 0;
  return t;
}

JacobianM build_jacobian(const ProxResult& pr, const Penalties& pen, double ties_tol) {
  validate(pr, pen);
  const Index n = pr.s_rho.size();
  const double tol = ties_tol * pr.input_scale;

  JacobianM jac;
  jac.n = n;
  jac.perm = pr.perm;
  jac.theta.resize(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) jac.theta[i] = std::abs(pr.s_rho[i]) > pen.beta + tol ? 1 : 0;

  // Sigma over the n-1 constraints x_k >= x_{k+1} in sorted coordinates.
  std::vector<std::uint8_t> sigma(static_cast<size_t>(std::max<Index>(n - 1, 0)), 0);
  if (pr.sorted) {
    for (Index e = 0; e + 1 < n; ++e) {
      sigma[e] = std::abs(pr.s_rho[pr.perm[e]] - pr.s_rho[pr.perm[e + 1]]) <= tol ? 1 : 0;
    }
  }
  for (Index e = 0; e + 1 < n;) {
    Index end = e;
    while (end + 1 < n && sigma[end] == sigma[e]) ++end;
    jac.sigma_blocks.push_back({e, end - e, sigma[e] == 1});
    e = end;
  }

  jac.h_tilde.assign(static_cast<size_t>(n), 0);
  if (jac.sigma_blocks.empty()) {
    for (Index i = 0; i < n; ++i) jac.h_tilde[i] = 1;
  }
  const Index nblocks = static_cast<Index>(jac.sigma_blocks.size());
  for (Index b = 0; b < nblocks; ++b) {
    const SigmaBlock& sb = jac.sigma_blocks[b];
    if (sb.in_j) {
      AveragingGroup g{sb.start, sb.len + 1, false};
      // Theta must be constant on an averaging block; decide it from the
      // block's common magnitude so rounding inside ties_tol cannot split it.
      double mag = 0.0;
      for (Index k = g.start; k < g.start + g.len; ++k) mag += std::abs(pr.s_rho[pr.perm[k]]);
      mag /= static_cast<double>(g.len);
      g.active = mag > pen.beta + tol;
      for (Index k = g.start; k < g.start + g.len; ++k) jac.theta[pr.perm[k]] = g.active ? 1 : 0;
      jac.groups.push_back(g);
    } else {
      // Identity part: I_{n_i} at either end of the chain, I_{n_i - 1} inside.
      const Index lo = sb.start + (b > 0 ? 1 : 0);
      const Index hi = sb.start + sb.len + (b == nblocks - 1 ? 1 : 0);
      for (Index k = lo; k < hi; ++k) jac.h_tilde[pr.perm[k]] = 1;
    }
  }
  return jac;
}

Vec apply_M(const JacobianM& jac, const Vec& v) {
  require_dim(v.size(), jac.n, "apply_M");
  Vec out = Vec::Zero(jac.n);
  for (Index i = 0; i < jac.n; ++i) {
    if (jac.h_tilde[i] && jac.theta[i]) out[i] = v[i];
  }
  for (const AveragingGroup& g : jac.groups) {
    if (!g.active) continue;
    double mean = 0.0;
    for (Index k = g.start; k < g.start + g.len; ++k) mean += v[jac.perm[k]];
    mean /= static_cast<double>(g.len);
    for (Index k = g.start; k < g.start + g.len; ++k) out[jac.perm[k]] = mean;
  }
  return out;
}

Vec apply_I_minus_M(const JacobianM& jac, const Vec& v) { return v - apply_M(jac, v); }

AmaFactors ama_factors(const JacobianM& jac, const DesignMatrix& a) {
  require_dim(a.cols(), jac.n, "ama_factors");
  AmaFactors f;
  for (Index i = 0; i < jac.n; ++i) {
    if (jac.h_tilde[i] && jac.theta[i]) f.gamma.push_back(i);
  }
  f.a_gamma = a.column_submatrix(f.gamma);
  f.au.resize(a.rows(), jac.rank());
  Index c = 0;
  std::vector<Index> cols;
  for (const AveragingGroup& g : jac.groups) {
    if (!g.active) continue;
    cols.assign(jac.perm.begin() + g.start, jac.perm.begin() + g.start + g.len);
    f.au.col(c++) = a.column_sum(cols, 1.0 / std::sqrt(static_cast<double>(g.len)));
  }
  return f;
}

void add_scaled_M(const JacobianM& jac, double alpha, Mat& target) {
  require_dim(target.rows(), jac.n, "add_scaled_M");
  require_dim(target.cols(), jac.n, "add_scaled_M");
  for (Index i = 0; i < jac.n; ++i) {
    if (jac.h_tilde[i] && jac.theta[i]) target(i, i) += alpha;
  }
  for (const AveragingGroup& g : jac.groups) {
    if (!g.active) continue;
    const double w = alpha / static_cast<double>(g.len);
    for (Index p = g.start; p < g.start + g.len; ++p) {
      for (Index q = g.start; q < g.start + g.len; ++q) target(jac.perm[p], jac.perm[q]) += w;
    }
  }
}

}  // namespace cluslasso
