#pragma once

// Generalized geometric entanglement E_chi = 1 - |<psi|MPS[psi, chi]>|^2 and
// the relative measure Delta E_{chi_lo, chi_hi} = E_{chi_lo} - E_{chi_hi}.

#include <cstddef>
#include <span>
#include <vector>

#include "gge/mps.hpp"

namespace gge {

struct GEResult {
  std::size_t chi = 1;
  double value = 0.0;     ///< 1 - fidelity
  double fidelity = 1.0;  ///< |<psi|MPS[psi, chi]>|^2 with both sides normalized
  std::size_t refinement_sweeps = 0;
};

struct RelativeGEResult {
  std::size_t chi_lo = 1;
  std::size_t chi_hi = 2;
  double value = 0.0;  ///< clamped to 0 when raw is a roundoff-sized negative
  double raw = 0.0;    ///< E_lo - E_hi exactly as computed
};

/// States whose norm deviates from 1 by more than this are rejected.
inline constexpr double kNormTolerance = 1e-8;
/// Negative Delta E above -kClampTolerance are reported as 0.
inline constexpr double kClampTolerance = 1e-12;

GEResult geometric_entanglement(const DenseState& state, std::size_t chi,
                                std::size_t refinement_sweeps = 0);
GEResult geometric_entanglement(const MatrixProductState& state, std::size_t chi,
                                std::size_t refinement_sweeps = 0);

/// Throws InvalidParameter unless chi_lo < chi_hi.
RelativeGEResult relative_ge(const DenseState& state, std::size_t chi_lo, std::size_t chi_hi,
                             std::size_t refinement_sweeps = 0);
RelativeGEResult relative_ge(const MatrixProductState& state, std::size_t chi_lo,
                             std::size_t chi_hi, std::size_t refinement_sweeps = 0);
RelativeGEResult relative_ge(const GEResult& lo, const GEResult& hi);

/// E_chi for each chi, canonicalizing the state once and truncating per chi.
std::vector<GEResult> ge_profile(const DenseState& state, std::span<const std::size_t> chis,
                                 std::size_t refinement_sweeps = 0);
std::vector<GEResult> ge_profile(const MatrixProductState& state,
                                 std::span<const std::size_t> chis,
                                 std::size_t refinement_sweeps = 0);

}  // namespace gge
