#include "gge/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gge/errors.hpp"

namespace gge {

namespace {

void require_normalized(double nrm) {
  if (!(std::abs(nrm - 1.0) <= kNormTolerance)) {
    throw InvalidInput("state norm " + std::to_string(nrm) + " deviates from 1 by more than " +
                       std::to_string(kNormTolerance));
  }
}

void require_chi(std::size_t chi) {
  if (chi < 1) throw InvalidParameter("chi must be at least 1");
}

GEResult make_result(std::size_t chi, cplx ov, std::size_t sweeps) {
  const double fid = std::clamp(std::norm(ov), 0.0, 1.0);
  return GEResult{chi, 1.0 - fid, fid, sweeps};
}

// `canonical` is the target brought to right-canonical form once.
GEResult measure_canonical(const MatrixProductState& target, const MatrixProductState& canonical,
                           std::size_t chi, std::size_t sweeps) {
  MatrixProductState approx = truncate(canonical, chi);
  if (sweeps > 0) approx = refine(target, approx, sweeps);
  return make_result(chi, overlap(target, approx), sweeps);
}

}  // namespace

GEResult geometric_entanglement(const DenseState& state, std::size_t chi,
                                std::size_t refinement_sweeps) {
  require_chi(chi);
  require_normalized(state.norm());
  const MatrixProductState approx = compress(state, chi, {refinement_sweeps});
  return make_result(chi, overlap(state, approx), refinement_sweeps);
}

GEResult geometric_entanglement(const MatrixProductState& state, std::size_t chi,
                                std::size_t refinement_sweeps) {
  require_chi(chi);
  require_normalized(norm(state));
  return measure_canonical(state, canonicalize(state, 0), chi, refinement_sweeps);
}

RelativeGEResult relative_ge(const GEResult& lo, const GEResult& hi) {
  if (lo.chi >= hi.chi) throw InvalidParameter("relative_ge needs chi_lo < chi_hi");
  const double raw = lo.value - hi.value;
  const double value = (raw < 0.0 && raw > -kClampTolerance) ? 0.0 : raw;
  return RelativeGEResult{lo.chi, hi.chi, value, raw};
}

RelativeGEResult relative_ge(const DenseState& state, std::size_t chi_lo, std::size_t chi_hi,
                             std::size_t refinement_sweeps) {
  if (chi_lo >= chi_hi) throw InvalidParameter("relative_ge needs chi_lo < chi_hi");
  return relative_ge(geometric_entanglement(state, chi_lo, refinement_sweeps),
                     geometric_entanglement(state, chi_hi, refinement_sweeps));
}

RelativeGEResult relative_ge(const MatrixProductState& state, std::size_t chi_lo,
                             std::size_t chi_hi, std::size_t refinement_sweeps) {
  if (chi_lo >= chi_hi) throw InvalidParameter("relative_ge needs chi_lo < chi_hi");
  const std::size_t chis[] = {chi_lo, chi_hi};
  const auto profile = ge_profile(state, chis, refinement_sweeps);
  return relative_ge(profile[0], profile[1]);
}

std::vector<GEResult> ge_profile(const DenseState& state, std::span<const std::size_t> chis,
                                 std::size_t refinement_sweeps) {
  if (chis.empty()) throw InvalidParameter("ge_profile needs at least one chi");
  for (auto c : chis) require_chi(c);
  require_normalized(state.norm());
  return ge_profile(exact_mps(state), chis, refinement_sweeps);
}

std::vector<GEResult> ge_profile(const MatrixProductState& state,
                                 std::span<const std::size_t> chis,
                                 std::size_t refinement_sweeps) {
  if (chis.empty()) throw InvalidParameter("ge_profile needs at least one chi");
  for (auto c : chis) require_chi(c);
  require_normalized(norm(state));
  const MatrixProductState canonical = canonicalize(state, 0);
  std::vector<GEResult> out;
  out.reserve(chis.size());
  for (auto c : chis) out.push_back(measure_canonical(state, canonical, c, refinement_sweeps));
  return out;
}

}  // namespace gge
