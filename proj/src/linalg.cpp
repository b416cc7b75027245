#include "cluslasso/linalg.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

#include "cluslasso/kernels.hpp"

namespace cluslasso {

namespace {

kernels::DenseView view(const DesignMatrix::Dense& a) { return {a.data(), a.rows(), a.cols()}; }

template <class Sparse>
kernels::CompressedView view(const Sparse& s) {
  return {s.outerIndexPtr(), s.innerIndexPtr(), s.valuePtr(), s.outerSize(), s.innerSize()};
}

template <class Values>
void require_finite(const Values& v) {
  for (Index i = 0; i < static_cast<Index>(v.size()); ++i) {
    if (!std::isfinite(v[i])) throw std::invalid_argument("DesignMatrix: non-finite entry");
  }
}

}  // namespace

DesignMatrix::DesignMatrix(Dense a) : rows_(a.rows()), cols_(a.cols()) {
  if (rows_ < 1) throw std::invalid_argument("DesignMatrix: need at least one row");
  require_finite(a.reshaped());
  store_ = std::move(a);
}

DesignMatrix::DesignMatrix(Csr a) : rows_(a.rows()), cols_(a.cols()) {
  if (rows_ < 1) throw std::invalid_argument("DesignMatrix: need at least one row");
  a.makeCompressed();
  require_finite(Eigen::Map<const Vec>(a.valuePtr(), a.nonZeros()));
  Csc csc(a);
  csc.makeCompressed();
  store_ = SparseStore{std::move(a), std::move(csc)};
}

DesignMatrix DesignMatrix::identity(Index n) { return DesignMatrix(Dense(Dense::Identity(n, n))); }

Index DesignMatrix::nonzeros() const {
  if (const auto* d = dense()) return d->size();
  return std::get<SparseStore>(store_).csr.nonZeros();
}

const DesignMatrix::Csr* DesignMatrix::csr() const {
  const auto* s = std::get_if<SparseStore>(&store_);
  return s ? &s->csr : nullptr;
}

void DesignMatrix::matvec(const Vec& v, Vec& out) const {
  require_dim(v.size(), cols_, "matvec");
  out.resize(rows_);
  if (const auto* d = dense()) {
    kernels::parallel::gemv(view(*d), {v.data(), size_t(v.size())}, {out.data(), size_t(out.size())});
  } else {
    kernels::parallel::spmv(view(std::get<SparseStore>(store_).csr), {v.data(), size_t(v.size())},
                            {out.data(), size_t(out.size())});
  }
}

void DesignMatrix::tmatvec(const Vec& v, Vec& out) const {
  require_dim(v.size(), rows_, "tmatvec");
  out.resize(cols_);
  if (const auto* d = dense()) {
    kernels::parallel::gemv_t(view(*d), {v.data(), size_t(v.size())}, {out.data(), size_t(out.size())});
  } else {
    kernels::parallel::spmv(view(std::get<SparseStore>(store_).csc), {v.data(), size_t(v.size())},
                            {out.data(), size_t(out.size())});
  }
}

Vec DesignMatrix::matvec(const Vec& v) const {
  Vec out;
  matvec(v, out);
  return out;
}

Vec DesignMatrix::tmatvec(const Vec& v) const {
  Vec out;
  tmatvec(v, out);
  return out;
}

void DesignMatrix::check_index(Index j) const {
  if (j < 0 || j >= cols_) {
    throw std::out_of_range("column index " + std::to_string(j) + " out of range [0, " +
                            std::to_string(cols_) + ")");
  }
}

DesignMatrix DesignMatrix::column_submatrix(std::span<const Index> idx) const {
  for (Index j : idx) check_index(j);
  const Index k = static_cast<Index>(idx.size());
  if (const auto* d = dense()) {
    Dense out(rows_, k);
    for (Index c = 0; c < k; ++c) out.col(c) = d->col(idx[c]);
    return DesignMatrix(std::move(out));
  }
  const auto& csc = std::get<SparseStore>(store_).csc;
  std::vector<Eigen::Triplet<double, std::int64_t>> trip;
  for (Index c = 0; c < k; ++c) {
    for (Csc::InnerIterator it(csc, idx[c]); it; ++it) trip.emplace_back(it.row(), c, it.value());
  }
  Csr out(rows_, k);
  out.setFromTriplets(trip.begin(), trip.end());
  return DesignMatrix(std::move(out));
}

Mat DesignMatrix::dense_columns(std::span<const Index> idx) const {
  for (Index j : idx) check_index(j);
  const Index k = static_cast<Index>(idx.size());
  Mat out(rows_, k);
  if (const auto* d = dense()) {
    for (Index c = 0; c < k; ++c) out.col(c) = d->col(idx[c]);
  } else {
    const auto& csc = std::get<SparseStore>(store_).csc;
    out.setZero();
    for (Index c = 0; c < k; ++c) {
      for (Csc::InnerIterator it(csc, idx[c]); it; ++it) out(it.row(), c) = it.value();
    }
  }
  return out;
}

Vec DesignMatrix::column_sum(std::span<const Index> idx, double scale) const {
  for (Index j : idx) check_index(j);
  Vec out(rows_);
  if (const auto* d = dense()) {
    kernels::parallel::column_sum(view(*d), idx, scale, {out.data(), size_t(out.size())});
    return out;
  }
  const auto& csc = std::get<SparseStore>(store_).csc;
  out.setZero();
  for (Index j : idx) {
    for (Csc::InnerIterator it(csc, j); it; ++it) out[it.row()] += it.value();
  }
  out *= scale;
  return out;
}

Mat DesignMatrix::to_dense() const {
  if (const auto* d = dense()) return *d;
  return Mat(std::get<SparseStore>(store_).csc);
}

Mat DesignMatrix::gram() const {
  Mat g(cols_, cols_);
  if (const auto* d = dense()) {
    g.setZero();
    g.selfadjointView<Eigen::Lower>().rankUpdate(d->transpose());
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  } else {
    const auto& csc = std::get<SparseStore>(store_).csc;
    g = Mat(Csc(csc.transpose() * csc));
  }
  return g;
}

Mat DesignMatrix::outer_gram() const {
  Mat g(rows_, rows_);
  if (const auto* d = dense()) {
    g.setZero();
    g.selfadjointView<Eigen::Lower>().rankUpdate(*d);
    g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  } else {
    const auto& csr = std::get<SparseStore>(store_).csr;
    g = Mat(Csr(csr * csr.transpose()));
  }
  return g;
}

double DesignMatrix::coeff(Index i, Index j) const {
  if (const auto* d = dense()) return (*d)(i, j);
  return std::get<SparseStore>(store_).csr.coeff(i, j);
}

const Vec& DesignMatrix::column_norms() const {
  if (!column_norms_) {
    Vec norms(cols_);
    if (const auto* d = dense()) {
      norms = d->colwise().norm().transpose();
    } else {
      const auto& csc = std::get<SparseStore>(store_).csc;
      for (Index j = 0; j < cols_; ++j) norms[j] = csc.col(j).norm();
    }
    column_norms_ = std::move(norms);
  }
  return *column_norms_;
}

DesignMatrix column_submatrix(const DesignMatrix& a, std::span<const Index> idx) {
  return a.column_submatrix(idx);
}

CgMaxItersExceeded::CgMaxItersExceeded(CgResult last)
    : std::runtime_error("conjugate gradient: max iterations exceeded (residual " +
                         std::to_string(last.residual) + ")"),
      last_(std::move(last)) {}

CgResult conjugate_gradient(const LinearOperator& apply, const Vec& rhs, const CgControls& ctrl,
                            const Vec* x0) {
  CgResult res;
  const Index n = rhs.size();
  const double target = std::max(ctrl.abs_tol, ctrl.rel_tol * rhs.norm());
  Vec r = rhs;
  if (x0) {
    require_dim(x0->size(), n, "conjugate_gradient x0");
    res.x = *x0;
    Vec ax(n);
    apply(res.x, ax);
    r -= ax;
  } else {
    res.x = Vec::Zero(n);
  }
  double rr = r.squaredNorm();
  res.residual = std::sqrt(rr);
  if (res.residual <= target) {
    res.converged = true;
    return res;
  }
  Vec p = r;
  Vec ap(n);
  for (int it = 0; it < ctrl.max_iters; ++it) {
    apply(p, ap);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;  // operator not SPD along p (or breakdown)
    const double alpha = rr / pap;
    res.x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    const double rr_new = r.squaredNorm();
    res.iters = it + 1;
    res.residual = std::sqrt(rr_new);
    if (res.residual <= target) {
      res.converged = true;
      return res;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return res;
}

Vec cg_solve(const LinearOperator& apply, const Vec& rhs, const CgControls& ctrl) {
  if (!(ctrl.rel_tol > 0.0) || ctrl.abs_tol < 0.0) {
    throw std::invalid_argument("cg_solve: need rel_tol > 0 and abs_tol >= 0");
  }
  CgResult res = conjugate_gradient(apply, rhs, ctrl);
  if (!res.converged) throw CgMaxItersExceeded(std::move(res));
  return std::move(res.x);
}

Vec smw_solve(const LinearOperator& d_inv_apply, const Mat& uf, const Vec& rhs) {
  require_dim(uf.rows(), rhs.size(), "smw_solve");
  Vec d_inv_rhs(rhs.size());
  d_inv_apply(rhs, d_inv_rhs);
  const Index t = uf.cols();
  if (t == 0) return d_inv_rhs;

  Mat d_inv_u(uf.rows(), t);
  Vec col(uf.rows());
  for (Index c = 0; c < t; ++c) {
    d_inv_apply(uf.col(c), col);
    d_inv_u.col(c) = col;
  }
  Mat inner = Mat::Identity(t, t);
  inner.noalias() += uf.transpose() * d_inv_u;
  Eigen::LDLT<Mat> ldlt(inner);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
    throw SingularSystem("smw_solve: inner system I + U^T D^{-1} U is singular");
  }
  const Vec coef = ldlt.solve(uf.transpose() * d_inv_rhs);
  return d_inv_rhs - d_inv_u * coef;
}

}  // namespace cluslasso
