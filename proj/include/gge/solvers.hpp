#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gge/hamiltonians.hpp"
#include "gge/mps.hpp"
#include "gge/tensor.hpp"

namespace gge {

// ------------------------------------------------------------------- DMRG

struct DmrgConfig {
  std::size_t max_bond = 64;       ///< solver bond dimension, independent of the measured chi
  std::size_t sweeps = 30;         ///< maximum number of full (right + left) sweeps
  std::size_t min_sweeps = 2;
  double energy_tol = 1e-9;        ///< stop when |E_sweep - E_previous| falls below this
  double truncation_tol = 1e-12;   ///< discarded weight allowed per two-site update
  std::size_t initial_bond = 8;
  std::size_t lanczos_krylov = 20;
  std::size_t lanczos_restarts = 0;
  double lanczos_tol = 1e-6;       ///< residual norm for the local eigenproblem
  std::uint64_t seed = 1;          ///< seeds the random initial state

  /// Throws InvalidParameter when a field is out of range.
  void validate() const;
};

struct DmrgReport {
  std::vector<double> sweep_energies;
  std::vector<double> sweep_max_discarded;
  std::size_t sweeps_run = 0;
  bool converged = false;
};

struct DmrgResult {
  double energy = 0.0;  ///< <psi|H|psi> of the returned state
  MatrixProductState state;
  DmrgReport report;
};

/// Two-site DMRG. The MPO must be Hermitian; purely real MPOs use a real
/// arithmetic path. The returned state is normalized with canonical center 0.
/// A run that exhausts cfg.sweeps returns its best estimate with converged = false.
DmrgResult dmrg_ground_state(const MatrixProductOperator& op, const DmrgConfig& cfg = {});

// ------------------------------------------------------ exact diagonalization

struct EigenSolution {
  /// Eigenvectors of one invariant block, expressed on a subset of the basis.
  struct Block {
    std::vector<std::size_t> basis;  ///< ascending basis indices spanned by the block
    Eigen::MatrixXcd vectors;        ///< basis.size() x basis.size(), columns are eigenvectors
  };

  Extents site_dims;
  std::vector<double> energies;  ///< ascending
  std::vector<double> mu;        ///< (E - E_min) / (E_max - E_min)
  std::vector<Block> blocks;
  std::vector<std::pair<std::size_t, std::size_t>> location;  ///< (block, column) per eigenpair

  std::size_t size() const noexcept { return energies.size(); }
  DenseState state(std::size_t i) const;
};

/// Full eigendecomposition of a dense Hermitian matrix. `site_dims` labels the
/// basis for state(); when empty the basis is treated as one site.
/// Throws InvalidInput if h deviates from Hermitian by more than 1e-10.
EigenSolution exact_spectrum(const DenseTensor& h, Extents site_dims = {});

/// Largest invariant block the sparse path diagonalizes densely (2 GiB of doubles).
inline constexpr std::size_t kMaxDenseBlock = std::size_t{1} << 14;

/// Same for a real symmetric sparse matrix. The matrix is split into the
/// connected components of its sparsity graph (e.g. total-S^z sectors) and each
/// block is diagonalized densely, so results equal the dense path. Throws
/// ResourceError when a block exceeds kMaxDenseBlock.
EigenSolution exact_spectrum(const SparseOperator& h, Extents site_dims);

/// Indices of the k eigenpairs with mu closest to 1/2, ties toward lower
/// energy, returned in ascending mu. Throws InvalidParameter if k > size().
std::vector<std::size_t> mid_spectrum_indices(const EigenSolution& sol, std::size_t k);
std::vector<DenseState> mid_spectrum(const EigenSolution& sol, std::size_t k);

// -------------------------------------------------------------------- AKLT

/// Bond-2 AKLT state on n sites: spin-1/2 first and last sites, spin-1 bulk.
/// Bulk tensors A[+1] = sqrt(2/3) sigma+, A[0] = sigma^z / sqrt(3),
/// A[-1] = -sqrt(2/3) sigma- (the minus sign matches the |-1> phase of the
/// standard spin basis used by the Hamiltonians). The edge tensors bind each
/// edge spin into a doublet with the dangling virtual spin, which makes this
/// the unique ground state of extended_haldane(n, 1). Requires n >= 2.
MatrixProductState aklt_exact_mps(std::size_t n);

}  // namespace gge
