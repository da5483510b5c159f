#pragma once

// Matrix product states with open boundaries and mixed local dimensions.
//
// Site tensors are stored as rank-3 DenseTensors with axes (left, phys, right).
// Operator sites are rank-4 with axes (left, phys_out, phys_in, right).
// Dense amplitudes use row-major order with site 0 as the most significant index.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gge/tensor.hpp"

namespace gge {

/// Default cap on amplitudes produced by to_dense (2^26 complex values, 1 GiB).
inline constexpr std::size_t kDefaultDenseCap = std::size_t{1} << 26;

class DenseState {
 public:
  DenseState() = default;
  DenseState(Extents site_dims, std::vector<cplx> amplitudes);

  /// Computational basis state |config_0 config_1 ...>.
  static DenseState basis(Extents site_dims, std::span<const std::size_t> config);
  /// Normalized tensor product of the given single-site vectors.
  static DenseState product(const std::vector<std::vector<cplx>>& local);

  const Extents& site_dims() const noexcept { return site_dims_; }
  std::size_t num_sites() const noexcept { return site_dims_.size(); }
  std::span<const cplx> amplitudes() const noexcept { return amplitudes_; }
  std::span<cplx> amplitudes() noexcept { return amplitudes_; }

  double norm() const;
  /// Scales to unit norm. Throws InvalidInput for the zero vector.
  DenseState& normalize();

 private:
  Extents site_dims_;
  std::vector<cplx> amplitudes_;
};

class SiteTensor {
 public:
  SiteTensor() = default;
  /// Throws InvalidShape unless t is rank 3.
  explicit SiteTensor(DenseTensor t);

  std::size_t left_dim() const { return tensor_.dim(0); }
  std::size_t phys_dim() const { return tensor_.dim(1); }
  std::size_t right_dim() const { return tensor_.dim(2); }
  const DenseTensor& tensor() const noexcept { return tensor_; }

 private:
  DenseTensor tensor_;
};

class MatrixProductState {
 public:
  MatrixProductState() = default;
  /// Validates bond chaining, unit outer bonds and bonds <= max_bond.
  MatrixProductState(std::vector<SiteTensor> sites, std::size_t max_bond,
                     std::optional<std::size_t> canonical_center = std::nullopt);

  std::size_t num_sites() const noexcept { return sites_.size(); }
  const std::vector<SiteTensor>& sites() const noexcept { return sites_; }
  const SiteTensor& site(std::size_t k) const { return sites_.at(k); }
  std::size_t max_bond() const noexcept { return max_bond_; }
  std::optional<std::size_t> canonical_center() const noexcept { return center_; }

  Extents site_dims() const;
  /// Extents of the n-1 internal bonds.
  Extents bond_dims() const;
  std::size_t largest_bond() const;

 private:
  std::vector<SiteTensor> sites_;
  std::size_t max_bond_ = 1;
  std::optional<std::size_t> center_;
};

class MatrixProductOperator {
 public:
  MatrixProductOperator() = default;
  /// Each site must be rank 4 (left, out, in, right) with square physical legs.
  explicit MatrixProductOperator(std::vector<DenseTensor> sites);

  std::size_t num_sites() const noexcept { return sites_.size(); }
  const std::vector<DenseTensor>& sites() const noexcept { return sites_; }
  const DenseTensor& site(std::size_t k) const { return sites_.at(k); }
  Extents site_dims() const;
  Extents bond_dims() const;

 private:
  std::vector<DenseTensor> sites_;
};

struct CompressOptions {
  /// Alternating one-site overlap-maximization sweeps run after the SVD pass.
  std::size_t refine_sweeps = 0;
};

/// Left-to-right chain of truncated SVDs keeping at most chi singular values
/// per cut, with the singular values absorbed into the remainder. The result
/// is normalized. Throws InvalidParameter for chi < 1.
MatrixProductState compress(const DenseState& state, std::size_t chi,
                            const CompressOptions& options = {});

/// Lossless MPS of a dense state (compress with unbounded chi).
MatrixProductState exact_mps(const DenseState& state);

/// Contracts the chain. Throws ResourceError above max_amplitudes.
DenseState to_dense(const MatrixProductState& m, std::size_t max_amplitudes = kDefaultDenseCap);

/// <a|b> with a conjugated. Throws InvalidShape if site dims differ.
cplx overlap(const DenseState& a, const DenseState& b);
cplx overlap(const MatrixProductState& a, const MatrixProductState& b);
cplx overlap(const MatrixProductState& a, const DenseState& b);
cplx overlap(const DenseState& a, const MatrixProductState& b);

double norm(const MatrixProductState& m);
MatrixProductState normalize(const MatrixProductState& m);

/// Sites left of center become left-orthogonal, sites right of it
/// right-orthogonal. QR factors are phase-fixed so a second call is a no-op.
MatrixProductState canonicalize(const MatrixProductState& m, std::size_t center);

/// Right-canonicalizes, then runs the same truncating SVD sweep as compress.
MatrixProductState truncate(const MatrixProductState& m, std::size_t chi);

/// One-site variational fitting of approx to target: each local update
/// maximizes |<approx|target>| with all other tensors fixed. Bond extents of
/// approx are kept; the result is normalized.
MatrixProductState refine(const MatrixProductState& target, const MatrixProductState& approx,
                          std::size_t sweeps);

/// Exact product of MPO and MPS; bond extents multiply, nothing is truncated.
MatrixProductState apply_mpo(const MatrixProductOperator& op, const MatrixProductState& m);

/// <m|op|m> / <m|m>, contracted site by site.
cplx expectation(const MatrixProductState& m, const MatrixProductOperator& op);

/// <m| A_i B_j |m> / <m|m> for single-site operators (i != j).
cplx correlation(const MatrixProductState& m, const DenseTensor& op_i, std::size_t i,
                 const DenseTensor& op_j, std::size_t j);

/// Bond-1 MPS of a product state.
MatrixProductState product_mps(const std::vector<std::vector<cplx>>& local);

}  // namespace gge
