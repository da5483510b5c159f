#include "gge/kernels.hpp"

#include <Eigen/Core>
#include <vector>

namespace gge::kernels {

namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Row-major strides for dims.
std::vector<std::size_t> strides_of(std::span<const std::size_t> dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
  return s;
}

}  // namespace

void matmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> c,
            std::size_t m, std::size_t k, std::size_t n) {
  if (m == 0 || n == 0) return;
  if (k == 0) {
    std::fill(c.begin(), c.end(), cplx{0.0, 0.0});
    return;
  }
  Eigen::Map<const RowMat> bm(b.data(), static_cast<Eigen::Index>(k),
                              static_cast<Eigen::Index>(n));
  const auto chunks = static_cast<std::ptrdiff_t>((m + kMatmulRowChunk - 1) / kMatmulRowChunk);
#pragma omp parallel for schedule(static) if (chunks > 1 && m * k * n > (1u << 18))
  for (std::ptrdiff_t chunk = 0; chunk < chunks; ++chunk) {
    const std::size_t r0 = static_cast<std::size_t>(chunk) * kMatmulRowChunk;
    const std::size_t rows = std::min(kMatmulRowChunk, m - r0);
    Eigen::Map<const RowMat> am(a.data() + r0 * k, static_cast<Eigen::Index>(rows),
                                static_cast<Eigen::Index>(k));
    Eigen::Map<RowMat> cm(c.data() + r0 * n, static_cast<Eigen::Index>(rows),
                          static_cast<Eigen::Index>(n));
    cm.noalias() = am * bm;
  }
}

void matmul_reference(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> c,
                      std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cplx acc{0.0, 0.0};
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      c[i * n + j] = acc;
    }
  }
}

void permute(std::span<const cplx> in, std::span<cplx> out, std::span<const std::size_t> dims,
             std::span<const std::size_t> perm) {
  const std::size_t rank = dims.size();
  if (rank == 0) {
    if (!in.empty()) out[0] = in[0];
    return;
  }
  const auto in_strides = strides_of(dims);
  std::vector<std::size_t> out_dims(rank);
  for (std::size_t i = 0; i < rank; ++i) out_dims[i] = dims[perm[i]];
  // stride in the input for each output axis
  std::vector<std::size_t> gather(rank);
  for (std::size_t i = 0; i < rank; ++i) gather[i] = in_strides[perm[i]];

  const std::size_t inner = out_dims[rank - 1];
  const std::size_t inner_stride = gather[rank - 1];
  const std::size_t outer = inner == 0 ? 0 : in.size() / inner;

#pragma omp parallel for schedule(static) if (in.size() > (1u << 16))
  for (std::ptrdiff_t row = 0; row < static_cast<std::ptrdiff_t>(outer); ++row) {
    std::size_t rem = static_cast<std::size_t>(row);
    std::size_t src = 0;
    for (std::size_t ax = rank - 1; ax-- > 0;) {
      src += (rem % out_dims[ax]) * gather[ax];
      rem /= out_dims[ax];
    }
    cplx* dst = out.data() + static_cast<std::size_t>(row) * inner;
    for (std::size_t j = 0; j < inner; ++j) dst[j] = in[src + j * inner_stride];
  }
}

void permute_reference(std::span<const cplx> in, std::span<cplx> out,
                       std::span<const std::size_t> dims, std::span<const std::size_t> perm) {
  const std::size_t rank = dims.size();
  const auto in_strides = strides_of(dims);
  std::vector<std::size_t> out_dims(rank);
  for (std::size_t i = 0; i < rank; ++i) out_dims[i] = dims[perm[i]];
  std::vector<std::size_t> idx(rank, 0);
  for (std::size_t flat = 0; flat < in.size(); ++flat) {
    std::size_t rem = flat;
    for (std::size_t ax = rank; ax-- > 0;) {
      idx[ax] = rem % out_dims[ax];
      rem /= out_dims[ax];
    }
    std::size_t src = 0;
    for (std::size_t ax = 0; ax < rank; ++ax) src += idx[ax] * in_strides[perm[ax]];
    out[flat] = in[src];
  }
}

void csr_matvec(std::span<const std::size_t> row_ptr, std::span<const std::size_t> cols,
                std::span<const double> vals, std::span<const double> x, std::span<double> y) {
  const auto rows = static_cast<std::ptrdiff_t>(row_ptr.size() - 1);
#pragma omp parallel for schedule(static) if (rows > 4096)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) acc += vals[p] * x[cols[p]];
    y[r] = acc;
  }
}

void csr_matvec_reference(std::span<const std::size_t> row_ptr, std::span<const std::size_t> cols,
                          std::span<const double> vals, std::span<const double> x,
                          std::span<double> y) {
  for (std::size_t r = 0; r + 1 < row_ptr.size(); ++r) {
    double acc = 0.0;
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p) acc += vals[p] * x[cols[p]];
    y[r] = acc;
  }
}

}  // namespace gge::kernels
