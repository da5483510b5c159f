#pragma once

// Data-parallel inner loops used by the tensor core. Each kernel has an
// OpenMP implementation and a plain serial reference that the tests and the
// benchmark compare against. Work is split into fixed-size chunks so results
// do not depend on the number of threads.

#include <complex>
#include <cstddef>
#include <span>

namespace gge::kernels {

using cplx = std::complex<double>;

/// Rows per OpenMP work item in matmul. Fixed so that the floating-point
/// accumulation order is independent of the thread count.
inline constexpr std::size_t kMatmulRowChunk = 64;

/// C(m x n) = A(m x k) * B(k x n), all row-major.
void matmul(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> c,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_reference(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> c,
                      std::size_t m, std::size_t k, std::size_t n);

/// out[permuted index] = in[index] for a row-major tensor; out has dims[perm[i]] at axis i.
void permute(std::span<const cplx> in, std::span<cplx> out, std::span<const std::size_t> dims,
             std::span<const std::size_t> perm);
void permute_reference(std::span<const cplx> in, std::span<cplx> out,
                       std::span<const std::size_t> dims, std::span<const std::size_t> perm);

/// y = A x for a real sparse matrix in CSR form.
void csr_matvec(std::span<const std::size_t> row_ptr, std::span<const std::size_t> cols,
                std::span<const double> vals, std::span<const double> x, std::span<double> y);
void csr_matvec_reference(std::span<const std::size_t> row_ptr, std::span<const std::size_t> cols,
                          std::span<const double> vals, std::span<const double> x,
                          std::span<double> y);

}  // namespace gge::kernels
