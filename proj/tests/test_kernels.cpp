#include <gtest/gtest.h>
#include <omp.h>

#include <algorithm>
#include <cstring>
#include <numeric>
#include <random>

#include "gge/kernels.hpp"
#include "testing.hpp"

using gge::cplx;
namespace k = gge::kernels;

TEST(Kernels, MatmulMatchesReference) {
  std::mt19937_64 rng(11);
  for (auto [m, kk, n] : {std::tuple{1, 1, 1}, {3, 5, 7}, {64, 64, 64}, {65, 17, 3}, {150, 40, 90}, {200, 1, 33}}) {
    const auto a = testing_util::random_vector(rng, m * kk);
    const auto b = testing_util::random_vector(rng, kk * n);
    std::vector<cplx> c(m * n), ref(m * n);
    k::matmul(a, b, c, m, kk, n);
    k::matmul_reference(a, b, ref, m, kk, n);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_LT(std::abs(c[i] - ref[i]), 1e-11 * (1.0 + std::abs(ref[i])));
  }
}

TEST(Kernels, MatmulBitwiseIndependentOfThreadCount) {
  std::mt19937_64 rng(12);
  const std::size_t m = 301, kk = 45, n = 77;
  const auto a = testing_util::random_vector(rng, m * kk);
  const auto b = testing_util::random_vector(rng, kk * n);
  std::vector<cplx> c1(m * n), c4(m * n);
  omp_set_num_threads(1);
  k::matmul(a, b, c1, m, kk, n);
  omp_set_num_threads(4);
  k::matmul(a, b, c4, m, kk, n);
  omp_set_num_threads(1);
  EXPECT_EQ(0, std::memcmp(c1.data(), c4.data(), c1.size() * sizeof(cplx)));
}

TEST(Kernels, PermuteMatchesReference) {
  std::mt19937_64 rng(13);
  const std::vector<std::vector<std::size_t>> shapes{{5}, {3, 4}, {2, 3, 4}, {3, 1, 2, 5}, {2, 2, 3, 2, 3}};
  for (const auto& dims : shapes) {
    std::vector<std::size_t> perm(dims.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (int trial = 0; trial < 6; ++trial) {
      std::shuffle(perm.begin(), perm.end(), rng);
      const auto in = testing_util::random_vector(rng, gge::volume(dims));
      std::vector<cplx> out(in.size()), ref(in.size());
      k::permute(in, out, dims, perm);
      k::permute_reference(in, ref, dims, perm);
      EXPECT_EQ(out, ref);
    }
  }
}

TEST(Kernels, CsrMatvecMatchesReference) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 500;
  std::vector<std::size_t> row_ptr{0}, cols;
  std::vector<double> vals;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if ((r * 31 + c * 17) % 23 == 0) {
        cols.push_back(c);
        vals.push_back(u(rng));
      }
    }
    row_ptr.push_back(cols.size());
  }
  std::vector<double> x(n), y(n), ref(n);
  for (auto& v : x) v = u(rng);
  k::csr_matvec(row_ptr, cols, vals, x, y);
  k::csr_matvec_reference(row_ptr, cols, vals, x, ref);
  EXPECT_EQ(y, ref);
}
