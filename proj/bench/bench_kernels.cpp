// OpenMP kernels against their serial references. Run with
// OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "gge/hamiltonians.hpp"
#include "gge/kernels.hpp"

namespace {

using gge::kernels::cplx;

std::vector<cplx> random_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& x : v) x = cplx(g(rng), g(rng));
  return v;
}

template <bool Parallel>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_data(n * n, 1), b = random_data(n * n, 2);
  std::vector<cplx> c(n * n);
  for (auto _ : state) {
    if constexpr (Parallel) {
      gge::kernels::matmul(a, b, c, n, n, n);
    } else {
      gge::kernels::matmul_reference(a, b, c, n, n, n);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <bool Parallel>
void BM_Permute(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const std::vector<std::size_t> dims{d, 3, d, 3}, perm{2, 1, 3, 0};
  const auto in = random_data(d * d * 9, 3);
  std::vector<cplx> out(in.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      gge::kernels::permute(in, out, dims, perm);
    } else {
      gge::kernels::permute_reference(in, out, dims, perm);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(2 * in.size() * sizeof(cplx)));
}

template <bool Parallel>
void BM_CsrMatvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto h = gge::to_sparse(gge::disordered_heisenberg(n, 1.0, 2.0, 1).first);
  std::vector<double> x(h.dim, 1.0 / static_cast<double>(h.dim)), y(h.dim);
  for (auto _ : state) {
    if constexpr (Parallel) {
      gge::kernels::csr_matvec(h.row_ptr, h.cols, h.vals, x, y);
    } else {
      gge::kernels::csr_matvec_reference(h.row_ptr, h.cols, h.vals, x, y);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(h.vals.size()));
}

}  // namespace

BENCHMARK(BM_Matmul<false>)->Name("matmul/reference")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_Matmul<true>)->Name("matmul/openmp")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_Permute<false>)->Name("permute/reference")->Arg(64)->Arg(256);
BENCHMARK(BM_Permute<true>)->Name("permute/openmp")->Arg(64)->Arg(256);
BENCHMARK(BM_CsrMatvec<false>)->Name("csr_matvec/reference")->Arg(14)->Arg(18);
BENCHMARK(BM_CsrMatvec<true>)->Name("csr_matvec/openmp")->Arg(14)->Arg(18);

BENCHMARK_MAIN();
