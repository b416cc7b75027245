#include "cluslasso/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace cluslasso {

Vec weight_vector(Index n) {
  if (n < 1) throw std::invalid_argument("weight_vector: n must be >= 1");
  Vec w(n);
  for (Index k = 0; k < n; ++k) w[k] = static_cast<double>(n - 2 * k - 1);
  return w;
}

namespace {

// (value, original index) sorted by value descending, ties by index.
std::vector<std::pair<double, Index>> sorted_pairs(const Vec& y) {
  const Index n = y.size();
  std::vector<std::pair<double, Index>> keyed(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) keyed[i] = {y[i], i};
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  return keyed;
}

}  // namespace

std::vector<Index> sort_descending(const Vec& y) {
  const auto keyed = sorted_pairs(y);
  std::vector<Index> perm(keyed.size());
  for (std::size_t k = 0; k < keyed.size(); ++k) perm[k] = keyed[k].second;
  return perm;
}

double regularizer_value(const Vec& x, const Penalties& pen) {
  double value = pen.beta * x.lpNorm<1>();
  const Index n = x.size();
  if (pen.rho != 0.0 && n > 1) {
    std::vector<double> sorted(x.data(), x.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double pairwise = 0.0;
    for (Index k = 0; k < n; ++k) pairwise += static_cast<double>(n - 2 * k - 1) * sorted[k];
    value += pen.rho * pairwise;
  }
  return value;
}

IsotoneProjection project_isotone(const Vec& v) {
  struct Pool {
    Index start;
    Index len;
    double sum;
    double mean() const { return sum / static_cast<double>(len); }
  };
  const Index n = v.size();
  std::vector<Pool> stack;
  stack.reserve(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    stack.push_back({i, 1, v[i]});
    // The cone wants non-increasing values: pool while the earlier block
    // sits strictly below the later one.
    while (stack.size() >= 2 && stack[stack.size() - 2].mean() < stack.back().mean()) {
      Pool top = stack.back();
      stack.pop_back();
      stack.back().len += top.len;
      stack.back().sum += top.sum;
    }
  }

  IsotoneProjection out;
  out.x.resize(n);
  auto& blocks = out.partition.blocks;
  blocks.reserve(stack.size());
  for (const Pool& p : stack) {
    const double value = p.mean();
    if (!blocks.empty() && blocks.back().value == value) {
      blocks.back().len += p.len;
    } else {
      blocks.push_back({p.start, p.len, value});
    }
    out.x.segment(p.start, p.len).setConstant(value);
  }
  return out;
}

Vec isotone_multipliers(const Vec& v, const Vec& x) {
  require_dim(x.size(), v.size(), "isotone_multipliers");
  const Index n = v.size();
  Vec lambda(std::max<Index>(n - 1, 0));
  double acc = 0.0;
  for (Index k = 0; k + 1 < n; ++k) {
    acc += v[k] - x[k];
    lambda[k] = acc;
  }
  return lambda;
}

SortedProjection s_rho(const Vec& y, double rho) {
  if (rho < 0.0) throw std::invalid_argument("s_rho: rho must be >= 0");
  const Index n = y.size();
  SortedProjection out;
  if (rho == 0.0) {
    out.s = y;
    out.perm.resize(static_cast<size_t>(n));
    std::iota(out.perm.begin(), out.perm.end(), Index{0});
    out.partition.blocks.reserve(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) out.partition.blocks.push_back({i, 1, y[i]});
    out.sorted = false;
    return out;
  }
  const auto keyed = sorted_pairs(y);
  out.perm.resize(static_cast<size_t>(n));
  Vec shifted(n);
  for (Index k = 0; k < n; ++k) {
    out.perm[k] = keyed[k].second;
    shifted[k] = keyed[k].first - rho * static_cast<double>(n - 2 * k - 1);
  }
  IsotoneProjection proj = project_isotone(shifted);
  out.s.resize(n);
  for (Index k = 0; k < n; ++k) out.s[out.perm[k]] = proj.x[k];
  out.partition = std::move(proj.partition);
  return out;
}

Vec soft_threshold(const Vec& v, double beta) {
  Vec out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v[i]) - beta;
    out[i] = mag > 0.0 ? std::copysign(mag, v[i]) : 0.0;
  }
  return out;
}

ProxResult prox_clustered(const Vec& y, const Penalties& pen) {
  if (pen.beta < 0.0 || pen.rho < 0.0) throw std::invalid_argument("prox_clustered: negative penalty");
  SortedProjection sp = s_rho(y, pen.rho);
  ProxResult out;
  out.prox = soft_threshold(sp.s, pen.beta);
  out.theta.resize(static_cast<size_t>(y.size()));
  for (Index i = 0; i < y.size(); ++i) out.theta[i] = std::abs(sp.s[i]) > pen.beta ? 1 : 0;
  out.s_rho = std::move(sp.s);
  out.perm = std::move(sp.perm);
  out.partition = std::move(sp.partition);
  out.sorted = sp.sorted;
  out.input_scale = y.size() > 0 ? y.lpNorm<Eigen::Infinity>() : 0.0;
  return out;
}

Vec prox_scaled(const Vec& y, double t, const Penalties& pen) {
  if (!(t > 0.0)) throw std::invalid_argument("prox_scaled: t must be > 0");
  return prox_clustered(y, {t * pen.beta, t * pen.rho}).prox;
}

Vec prox_conjugate(const Vec& y, double t, const Penalties& pen) {
  if (!(t > 0.0)) throw std::invalid_argument("prox_conjugate: t must be > 0");
  return y - prox_clustered(y, pen).prox;
}

}  // namespace cluslasso
