#pragma once

// Spin-chain Hamiltonians with open boundaries, available as dense matrices,
// real sparse (CSR) matrices and matrix product operators.
//
// Conventions: hbar = 1, spin operators have eigenvalues -s..s (S^z = +-1/2 for
// spin-1/2), and S_i . S_j = sum_a S_i^a S_j^a. The local basis is ordered by
// descending S^z, i.e. |+s>, |s-1>, ..., |-s>.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gge/mps.hpp"
#include "gge/tensor.hpp"

namespace gge {

enum class Model { extended_haldane, anisotropic_haldane, disordered_heisenberg, j1j2 };

std::string_view model_name(Model m);
std::optional<Model> model_from_name(std::string_view name);
/// Parameter names accepted by each model, e.g. {"j", "d", "e"}.
std::vector<std::string> model_parameters(Model m);

struct SpinSite {
  double spin = 0.5;
  std::size_t dim = 2;
};

/// Box-distributed fields h_j in [-h, h).
///
/// Field j is generated from its own stream: std::mt19937_64 seeded with
/// splitmix64(seed + j), first output x, u = (x >> 11) * 2^-53,
/// h_j = h * (2u - 1). Every step is integer arithmetic or exact scaling, so
/// a seed reproduces the same fields on every platform.
struct DisorderRealization {
  std::uint64_t seed = 0;
  double h = 0.0;
  std::vector<double> fields;

  static DisorderRealization generate(std::uint64_t seed, std::size_t n, double h);
};

std::uint64_t splitmix64(std::uint64_t x);

struct ModelSpec {
  Model model = Model::disordered_heisenberg;
  std::size_t n = 2;
  std::map<std::string, double> params;
  std::optional<DisorderRealization> disorder;

  /// Throws InvalidParameter for an unknown name.
  double param(const std::string& name) const;
};

/// Checks n and parameter names for the model. Throws InvalidParameter.
void validate(const ModelSpec& spec);

/// S_j.S_{j+1} + (j_aklt/3)(S_j.S_{j+1})^2 on spin-1 sites with spin-1/2 first
/// and last sites. Edge bonds couple through S(1/2).S(1) only; the biquadratic
/// term acts on spin-1 pairs. Requires n >= 3.
ModelSpec extended_haldane(std::size_t n, double j_aklt);

/// J S_j.S_{j+1} + D (S^z_j)^2 + E ((S^x_j)^2 - (S^y_j)^2), all spin-1. n >= 2.
ModelSpec anisotropic_haldane(std::size_t n, double j, double d, double e);

/// J S_j.S_{j+1} + h_j S^z_j on spin-1/2 sites with seeded box disorder. n >= 2, h >= 0.
std::pair<ModelSpec, DisorderRealization> disordered_heisenberg(std::size_t n, double j,
                                                                double h, std::uint64_t seed);

/// J1 S_j.S_{j+1} + J2 S_j.S_{j+2} on spin-1/2 sites. n >= 3.
ModelSpec j1j2(std::size_t n, double j1, double j2);

std::vector<SpinSite> site_spins(const ModelSpec& spec);
Extents site_dims(const ModelSpec& spec);

struct SpinOperators {
  DenseTensor sx, sy, sz, sp, sm, id;
};
SpinOperators spin_operators(std::size_t dim);

/// A Hamiltonian as a sum of one-site and two-site operators.
struct LocalTerms {
  struct Coupling {
    std::size_t first = 0;
    std::size_t second = 1;  ///< first < second
    DenseTensor op;          ///< (d_first*d_second) x (d_first*d_second)
  };
  Extents dims;
  std::vector<DenseTensor> onsite;  ///< one d x d operator per site
  std::vector<Coupling> couplings;
};
LocalTerms local_terms(const ModelSpec& spec);

/// Default cap on basis states for dense and sparse matrices.
inline constexpr std::size_t kDefaultBasisCap = std::size_t{1} << 20;

/// Hermitian matrix in the DenseState basis ordering. Throws ResourceError above the cap.
DenseTensor to_dense_matrix(const ModelSpec& spec, std::size_t max_basis = kDefaultBasisCap);

/// Real symmetric CSR matrix. Throws InvalidInput if the Hamiltonian has imaginary entries.
struct SparseOperator {
  std::size_t dim = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> cols;
  std::vector<double> vals;

  void apply(std::span<const double> x, std::span<double> y) const;
  double element(std::size_t row, std::size_t col) const;
};
SparseOperator to_sparse(const ModelSpec& spec, std::size_t max_basis = kDefaultBasisCap);

/// Finite-state-machine MPO. Each two-site coupling has its one-site parts
/// moved on-site and its connected part split by an operator SVD, so every
/// retained singular component occupies one channel on the bonds it crosses.
MatrixProductOperator to_mpo(const ModelSpec& spec);
MatrixProductOperator to_mpo(const LocalTerms& terms);

/// Sum over sites of a single-site operator (e.g. total S^z).
MatrixProductOperator sum_of_onsite_mpo(const Extents& dims,
                                        const std::vector<DenseTensor>& ops);

}  // namespace gge
