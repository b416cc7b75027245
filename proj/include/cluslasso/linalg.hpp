#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <functional>
#include <optional>
#include <span>
#include <variant>

#include "cluslasso/types.hpp"

namespace cluslasso {

// Design matrix A (m x n), either dense column-major or sparse CSR with sorted
// column indices per row. Immutable after construction; a CSC copy of sparse
// storage is kept for A^T v and column extraction.
class DesignMatrix {
 public:
  using Dense = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
  using Csr = Eigen::SparseMatrix<double, Eigen::RowMajor, std::int64_t>;
  using Csc = Eigen::SparseMatrix<double, Eigen::ColMajor, std::int64_t>;

  DesignMatrix() = default;
  explicit DesignMatrix(Dense a);
  explicit DesignMatrix(Csr a);

  static DesignMatrix identity(Index n);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  bool is_sparse() const { return std::holds_alternative<SparseStore>(store_); }
  Index nonzeros() const;

  // A v and A^T v. Parallelized over rows / columns; deterministic.
  Vec matvec(const Vec& v) const;
  Vec tmatvec(const Vec& v) const;
  void matvec(const Vec& v, Vec& out) const;
  void tmatvec(const Vec& v, Vec& out) const;

  // Columns idx (in the given order) as a new matrix with the same storage kind.
  DesignMatrix column_submatrix(std::span<const Index> idx) const;
  // Columns idx copied into a dense m x |idx| block.
  Mat dense_columns(std::span<const Index> idx) const;
  // scale * sum_{j in idx} A(:, j)
  Vec column_sum(std::span<const Index> idx, double scale = 1.0) const;

  Mat to_dense() const;
  // A^T A (n x n) and A A^T (m x m), dense.
  Mat gram() const;
  Mat outer_gram() const;

  double coeff(Index i, Index j) const;
  const Vec& column_norms() const;

  const Dense* dense() const { return std::get_if<Dense>(&store_); }
  const Csr* csr() const;

 private:
  struct SparseStore {
    Csr csr;
    Csc csc;
  };

  void check_index(Index j) const;

  Index rows_ = 0;
  Index cols_ = 0;
  std::variant<Dense, SparseStore> store_;
  mutable std::optional<Vec> column_norms_;
};

struct CgControls {
  int max_iters = 500;
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
};

struct CgResult {
  Vec x;
  double residual = 0.0;
  int iters = 0;
  bool converged = false;
};

using LinearOperator = std::function<void(const Vec& in, Vec& out)>;

// Thrown by cg_solve when the iteration budget runs out; carries the last iterate.
class CgMaxItersExceeded : public std::runtime_error {
 public:
  explicit CgMaxItersExceeded(CgResult last);
  const CgResult& last() const { return last_; }

 private:
  CgResult last_;
};

class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Conjugate gradients for SPD `apply`, stopping at
// ||apply(x) - rhs|| <= max(abs_tol, rel_tol * ||rhs||). Never throws.
CgResult conjugate_gradient(const LinearOperator& apply, const Vec& rhs, const CgControls& ctrl,
                            const Vec* x0 = nullptr);

// Same as conjugate_gradient but throws CgMaxItersExceeded when not converged.
Vec cg_solve(const LinearOperator& apply, const Vec& rhs, const CgControls& ctrl);

// Solves (D + Uf Uf^T) x = rhs through Sherman-Morrison-Woodbury, given the
// action of D^{-1}. Throws SingularSystem if I + Uf^T D^{-1} Uf is singular.
Vec smw_solve(const LinearOperator& d_inv_apply, const Mat& uf, const Vec& rhs);

DesignMatrix column_submatrix(const DesignMatrix& a, std::span<const Index> idx);
inline Vec matvec(const DesignMatrix& a, const Vec& v) { return a.matvec(v); }
inline Vec tmatvec(const DesignMatrix& a, const Vec& v) { return a.tmatvec(v); }

}  // namespace cluslasso
