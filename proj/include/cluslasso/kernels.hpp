#pragma once

// Matrix-vector kernels used by DesignMatrix. Every kernel has a serial
// reference in `serial` and an OpenMP version in `parallel`; for a given input
// both produce bitwise-identical output, since each output entry is
// accumulated in the same order regardless of how rows/columns are split
// between threads.

#include <cstdint>
#include <span>

#include "cluslasso/types.hpp"

namespace cluslasso::kernels {

// Column-major dense block, leading dimension == rows.
struct DenseView {
  const double* data = nullptr;
  Index rows = 0;
  Index cols = 0;
};

// Compressed storage (CSR, or CSC read as the CSR of the transpose).
struct CompressedView {
  const std::int64_t* outer = nullptr;  // size outer_size + 1
  const std::int64_t* inner = nullptr;
  const double* values = nullptr;
  Index outer_size = 0;
  Index inner_size = 0;
};

namespace serial {
// y = A x
void gemv(DenseView a, std::span<const double> x, std::span<double> y);
// y = A^T x
void gemv_t(DenseView a, std::span<const double> x, std::span<double> y);
// y[i] = sum over stored (i, j) of v * x[j]
void spmv(CompressedView a, std::span<const double> x, std::span<double> y);
// y = scale * sum_{j in cols} A(:, j)
void column_sum(DenseView a, std::span<const Index> cols, double scale, std::span<double> y);
}  // namespace serial

namespace parallel {
void gemv(DenseView a, std::span<const double> x, std::span<double> y);
void gemv_t(DenseView a, std::span<const double> x, std::span<double> y);
void spmv(CompressedView a, std::span<const double> x, std::span<double> y);
void column_sum(DenseView a, std::span<const Index> cols, double scale, std::span<double> y);
}  // namespace parallel

// Below this many multiply-adds the parallel kernels stay on one thread.
inline constexpr Index kParallelThreshold = 1 << 15;

int max_threads();
void set_threads(int n);

}  // namespace cluslasso::kernels
