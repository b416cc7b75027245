#include "cluslasso/kernels.hpp"

#include <omp.h>

#include <algorithm>

namespace cluslasso::kernels {

namespace {

constexpr Index kRowChunk = 512;

// Accumulates rows [r0, r1) of A x; shared by both variants so the summation
// order per output entry is identical.
inline void gemv_rows(DenseView a, const double* x, double* y, Index r0, Index r1) {
  for (Index i = r0; i < r1; ++i) y[i] = 0.0;
  for (Index j = 0; j < a.cols; ++j) {
    const double xj = x[j];
    const double* col = a.data + j * a.rows;
    for (Index i = r0; i < r1; ++i) y[i] += col[i] * xj;
  }
}

inline double column_dot(DenseView a, Index j, const double* x) {
  const double* col = a.data + j * a.rows;
  double s = 0.0;
  for (Index i = 0; i < a.rows; ++i) s += col[i] * x[i];
  return s;
}

inline double compressed_row_dot(CompressedView a, Index r, const double* x) {
  double s = 0.0;
  for (std::int64_t p = a.outer[r]; p < a.outer[r + 1]; ++p) s += a.values[p] * x[a.inner[p]];
  return s;
}

inline void column_sum_rows(DenseView a, std::span<const Index> cols, double scale, double* y,
                            Index r0, Index r1) {
  for (Index i = r0; i < r1; ++i) y[i] = 0.0;
  for (Index j : cols) {
    const double* col = a.data + j * a.rows;
    for (Index i = r0; i < r1; ++i) y[i] += col[i];
  }
  for (Index i = r0; i < r1; ++i) y[i] *= scale;
}

}  // namespace

namespace serial {

void gemv(DenseView a, std::span<const double> x, std::span<double> y) {
  gemv_rows(a, x.data(), y.data(), 0, a.rows);
}

void gemv_t(DenseView a, std::span<const double> x, std::span<double> y) {
  for (Index j = 0; j < a.cols; ++j) y[j] = column_dot(a, j, x.data());
}

void spmv(CompressedView a, std::span<const double> x, std::span<double> y) {
  for (Index r = 0; r < a.outer_size; ++r) y[r] = compressed_row_dot(a, r, x.data());
}

void column_sum(DenseView a, std::span<const Index> cols, double scale, std::span<double> y) {
  column_sum_rows(a, cols, scale, y.data(), 0, a.rows);
}

}  // namespace serial

namespace parallel {

void gemv(DenseView a, std::span<const double> x, std::span<double> y) {
  const Index chunks = (a.rows + kRowChunk - 1) / kRowChunk;
  const bool big = a.rows * a.cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (Index c = 0; c < chunks; ++c) {
    const Index r0 = c * kRowChunk;
    gemv_rows(a, x.data(), y.data(), r0, std::min(a.rows, r0 + kRowChunk));
  }
}

void gemv_t(DenseView a, std::span<const double> x, std::span<double> y) {
  const bool big = a.rows * a.cols >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (Index j = 0; j < a.cols; ++j) y[j] = column_dot(a, j, x.data());
}

void spmv(CompressedView a, std::span<const double> x, std::span<double> y) {
  const bool big = a.outer_size > 0 && a.outer[a.outer_size] >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (Index r = 0; r < a.outer_size; ++r) y[r] = compressed_row_dot(a, r, x.data());
}

void column_sum(DenseView a, std::span<const Index> cols, double scale, std::span<double> y) {
  const Index chunks = (a.rows + kRowChunk - 1) / kRowChunk;
  const bool big = a.rows * static_cast<Index>(cols.size()) >= kParallelThreshold;
#pragma omp parallel for schedule(static) if (big)
  for (Index c = 0; c < chunks; ++c) {
    const Index r0 = c * kRowChunk;
    column_sum_rows(a, cols, scale, y.data(), r0, std::min(a.rows, r0 + kRowChunk));
  }
}

}  // namespace parallel

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace cluslasso::kernels
