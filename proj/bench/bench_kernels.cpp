// Serial vs OpenMP kernels, plus prox and Jacobian scaling in n.
//   ./cluslasso_bench --benchmark_filter=Gemv
#include <benchmark/benchmark.h>

#include <random>
#include <span>

#include "cluslasso/jacobian.hpp"
#include "cluslasso/kernels.hpp"
#include "cluslasso/prox.hpp"

using namespace cluslasso;
namespace k = cluslasso::kernels;

namespace {

Vec random_vec(Index n, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d;
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = d(g);
  return v;
}

Mat random_mat(Index m, Index n, std::uint64_t seed) {
  Mat a(m, n);
  a.reshaped() = random_vec(m * n, seed);
  return a;
}

std::span<const double> cs(const Vec& v) { return {v.data(), std::size_t(v.size())}; }
std::span<double> ms(Vec& v) { return {v.data(), std::size_t(v.size())}; }

using DenseKernel = void (*)(k::DenseView, std::span<const double>, std::span<double>);

template <DenseKernel F, bool Transposed>
void dense_kernel(benchmark::State& st) {
  const Index m = st.range(0), n = st.range(1);
  const Mat a = random_mat(m, n, 1);
  const Vec x = random_vec(Transposed ? m : n, 2);
  Vec y(Transposed ? n : m);
  const k::DenseView v{a.data(), m, n};
  for (auto _ : st) {
    F(v, cs(x), ms(y));
    benchmark::DoNotOptimize(y.data());
  }
  st.SetBytesProcessed(st.iterations() * m * n * sizeof(double));
}

template <void (*F)(k::CompressedView, std::span<const double>, std::span<double>)>
void sparse_kernel(benchmark::State& st) {
  const Index m = st.range(0), n = st.range(1);
  std::mt19937_64 g(3);
  std::uniform_int_distribution<Index> col(0, n - 1);
  std::vector<Eigen::Triplet<double, std::int64_t>> t;
  for (Index i = 0; i < m; ++i)
    for (int r = 0; r < 20; ++r) t.emplace_back(i, col(g), 1.0 + r);
  DesignMatrix::Csr s(m, n);
  s.setFromTriplets(t.begin(), t.end());
  s.makeCompressed();
  const Vec x = random_vec(n, 4);
  Vec y(m);
  const k::CompressedView v{s.outerIndexPtr(), s.innerIndexPtr(), s.valuePtr(), m, n};
  for (auto _ : st) {
    F(v, cs(x), ms(y));
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * s.nonZeros());
}

template <void (*F)(k::DenseView, std::span<const Index>, double, std::span<double>)>
void column_sum_kernel(benchmark::State& st) {
  const Index m = st.range(0), n = st.range(1);
  const Mat a = random_mat(m, n, 5);
  std::vector<Index> cols;
  for (Index j = 0; j < n; j += 2) cols.push_back(j);
  Vec y(m);
  const k::DenseView v{a.data(), m, n};
  for (auto _ : st) {
    F(v, cols, 0.5, ms(y));
    benchmark::DoNotOptimize(y.data());
  }
}

void dense_shapes(benchmark::internal::Benchmark* b) {
  b->Args({2000, 500})->Args({20000, 200})->Args({500, 20000})->Unit(benchmark::kMicrosecond);
}

void prox(benchmark::State& st) {
  const Vec y = random_vec(st.range(0), 6);
  const Penalties pen{0.5, 1.0 / double(st.range(0))};
  for (auto _ : st) benchmark::DoNotOptimize(prox_clustered(y, pen));
  st.SetComplexityN(st.range(0));
}

void jacobian_apply(benchmark::State& st) {
  const Vec y = random_vec(st.range(0), 7);
  const Penalties pen{0.5, 5.0 / double(st.range(0))};
  const JacobianM jac = build_jacobian(prox_clustered(y, pen), pen);
  const Vec v = random_vec(st.range(0), 8);
  for (auto _ : st) benchmark::DoNotOptimize(apply_M(jac, v));
  st.SetComplexityN(st.range(0));
}

}  // namespace

BENCHMARK(dense_kernel<k::serial::gemv, false>)->Name("Gemv/serial")->Apply(dense_shapes);
BENCHMARK(dense_kernel<k::parallel::gemv, false>)->Name("Gemv/parallel")->Apply(dense_shapes)->UseRealTime();
BENCHMARK(dense_kernel<k::serial::gemv_t, true>)->Name("GemvT/serial")->Apply(dense_shapes);
BENCHMARK(dense_kernel<k::parallel::gemv_t, true>)->Name("GemvT/parallel")->Apply(dense_shapes)->UseRealTime();
BENCHMARK(sparse_kernel<k::serial::spmv>)->Name("Spmv/serial")->Args({200000, 50000})->Unit(benchmark::kMicrosecond);
BENCHMARK(sparse_kernel<k::parallel::spmv>)
    ->Name("Spmv/parallel")
    ->Args({200000, 50000})
    ->Unit(benchmark::kMicrosecond)
    ->UseRealTime();
BENCHMARK(column_sum_kernel<k::serial::column_sum>)->Name("ColumnSum/serial")->Apply(dense_shapes);
BENCHMARK(column_sum_kernel<k::parallel::column_sum>)->Name("ColumnSum/parallel")->Apply(dense_shapes)->UseRealTime();
BENCHMARK(prox)->RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMillisecond)->Complexity(benchmark::oNLogN);
BENCHMARK(jacobian_apply)->RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMicrosecond)->Complexity(benchmark::oN);
BENCHMARK_MAIN();
