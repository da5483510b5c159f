#pragma once

// Dense complex tensors in row-major order, with reshape, index permutation,
// pairwise contraction and a deterministic singular value decomposition.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace gge {

using cplx = std::complex<double>;
using Extents = std::vector<std::size_t>;
using RowMatrixXcd = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Product of extents; 1 for an empty list.
std::size_t volume(std::span<const std::size_t> dims);

class DenseTensor {
 public:
  DenseTensor() = default;
  /// Zero-initialized tensor of the given extents.
  explicit DenseTensor(Extents dims);
  /// Throws InvalidShape unless data.size() == volume(dims).
  DenseTensor(Extents dims, std::vector<cplx> data);

  static DenseTensor identity(std::size_t n);
  static DenseTensor from_matrix(const RowMatrixXcd& m);

  const Extents& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> data() noexcept { return data_; }
  std::vector<cplx>&& take_data() && noexcept { return std::move(data_); }

  cplx& operator()(std::initializer_list<std::size_t> index);
  const cplx& operator()(std::initializer_list<std::size_t> index) const;

  /// Rank-2 view as an Eigen row-major matrix. Throws InvalidShape otherwise.
  Eigen::Map<const RowMatrixXcd> matrix() const;
  Eigen::Map<RowMatrixXcd> matrix();

  DenseTensor& operator*=(cplx alpha);

 private:
  std::size_t flat_index(std::initializer_list<std::size_t> index) const;

  Extents dims_;
  std::vector<cplx> data_;
};

DenseTensor operator*(cplx alpha, DenseTensor t);
DenseTensor conj(DenseTensor t);
double frobenius_norm(const DenseTensor& t);

/// Same linear data, new extents. Throws InvalidShape on a volume mismatch.
DenseTensor reshape(DenseTensor t, Extents new_dims);

/// Axis i of the result is axis perm[i] of t.
DenseTensor permute(const DenseTensor& t, std::span<const std::size_t> perm);
DenseTensor permute(const DenseTensor& t, std::initializer_list<std::size_t> perm);

using IndexPairs = std::vector<std::pair<std::size_t, std::size_t>>;

/// Sums over each (axis of a, axis of b) pair. Result axes are the unpaired
/// axes of a followed by the unpaired axes of b, each in original order.
DenseTensor contract(const DenseTensor& a, const DenseTensor& b, const IndexPairs& pairs);

/// Matrix product of two rank-2 tensors.
DenseTensor matmul(const DenseTensor& a, const DenseTensor& b);

struct SvdResult {
  DenseTensor u;             ///< rows x k, orthonormal columns
  std::vector<double> s;     ///< k values, non-increasing, non-negative
  DenseTensor vdag;          ///< k x cols, orthonormal rows
  double discarded_weight = 0.0;  ///< sum of squared singular values that were cut

  /// Number of singular values above rel_tol * s_max.
  std::size_t rank(double rel_tol = kZeroTolerance) const;

  static constexpr double kZeroTolerance = 1e-14;
};

/// Thin SVD of a rank-2 tensor. Degenerate singular values come back in the
/// backend's deterministic order; only singular values enter truncation
/// weights, so no further tie-breaking is applied.
SvdResult svd(const DenseTensor& m);

/// Thin SVD keeping at most max_rank values and dropping values at or below
/// SvdResult::kZeroTolerance * s_max. At least one value is always kept.
SvdResult truncated_svd(const DenseTensor& m, std::size_t max_rank);

}  // namespace gge
