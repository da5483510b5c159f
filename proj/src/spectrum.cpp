#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "gge/errors.hpp"
#include "gge/solvers.hpp"

namespace gge {

namespace {

constexpr double kHermitianTolerance = 1e-10;

struct Eigenpair {
  double energy;
  std::size_t block;
  std::size_t column;
};

void finish(EigenSolution& sol, std::vector<Eigenpair> pairs) {
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Eigenpair& a, const Eigenpair& b) { return a.energy < b.energy; });
  sol.energies.clear();
  sol.location.clear();
  for (const auto& p : pairs) {
    sol.energies.push_back(p.energy);
    sol.location.emplace_back(p.block, p.column);
  }
  sol.mu.assign(sol.energies.size(), 0.0);
  if (sol.energies.empty()) return;
  const double lo = sol.energies.front();
  const double hi = sol.energies.back();
  const double span = hi - lo;
  if (span <= 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)})) return;
  for (std::size_t i = 0; i < sol.energies.size(); ++i) {
    sol.mu[i] = std::clamp((sol.energies[i] - lo) / span, 0.0, 1.0);
  }
}

Extents resolve_dims(Extents dims, std::size_t n) {
  if (dims.empty()) return {n};
  if (volume(dims) != n) throw InvalidShape("exact_spectrum: site_dims do not match the matrix size");
  return dims;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

DenseState EigenSolution::state(std::size_t i) const {
  if (i >= size()) throw InvalidParameter("EigenSolution::state: index out of range");
  const auto [b, c] = location[i];
  const Block& blk = blocks[b];
  std::vector<cplx> amps(volume(site_dims), cplx(0.0));
  for (std::size_t r = 0; r < blk.basis.size(); ++r) {
    amps[blk.basis[r]] = blk.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  DenseState out(site_dims, std::move(amps));
  out.normalize();
  return out;
}

EigenSolution exact_spectrum(const DenseTensor& h, Extents site_dims) {
  if (h.rank() != 2 || h.dim(0) != h.dim(1)) {
    throw InvalidShape("exact_spectrum: expected a square matrix");
  }
  const std::size_t n = h.dim(0);
  if (n == 0) throw InvalidShape("exact_spectrum: empty matrix");
  const auto m = h.matrix();
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= kHermitianTolerance)) {
    throw InvalidInput("exact_spectrum: matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
  }
  EigenSolution sol;
  sol.site_dims = resolve_dims(std::move(site_dims), n);
  const Eigen::MatrixXcd dense = m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
  if (es.info() != Eigen::Success) throw NumericalError("exact_spectrum: eigensolver failed");
  EigenSolution::Block blk;
  blk.basis.resize(n);
  std::iota(blk.basis.begin(), blk.basis.end(), std::size_t{0});
  blk.vectors = es.eigenvectors();
  sol.blocks.push_back(std::move(blk));
  std::vector<Eigenpair> pairs;
  for (std::size_t i = 0; i < n; ++i) pairs.push_back({es.eigenvalues()(static_cast<Eigen::Index>(i)), 0, i});
  finish(sol, std::move(pairs));
  return sol;
}

EigenSolution exact_spectrum(const SparseOperator& h, Extents site_dims) {
  const std::size_t n = h.dim;
  if (n == 0) throw InvalidShape("exact_spectrum: empty matrix");
  if (h.row_ptr.size() != n + 1) throw InvalidShape("exact_spectrum: malformed CSR matrix");
  EigenSolution sol;
  sol.site_dims = resolve_dims(std::move(site_dims), n);

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t p = h.row_ptr[r]; p < h.row_ptr[r + 1]; ++p) {
      const std::size_t c = h.cols[p];
      const double v = h.vals[p];
      if (std::abs(v - h.element(c, r)) > kHermitianTolerance) {
        throw InvalidInput("exact_spectrum: sparse matrix is not symmetric");
      }
      if (v == 0.0) continue;
      const std::size_t a = find_root(parent, r), b = find_root(parent, c);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  // Blocks ordered by their smallest basis index.
  std::vector<std::size_t> block_of(n);
  std::vector<std::size_t> root_block(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = find_root(parent, i);
    if (root_block[root] == n) {
      root_block[root] = sol.blocks.size();
      sol.blocks.emplace_back();
    }
    block_of[i] = root_block[root];
    sol.blocks[block_of[i]].basis.push_back(i);
  }
  for (const auto& blk : sol.blocks) {
    if (blk.basis.size() > kMaxDenseBlock) {
      throw ResourceError("exact_spectrum: invariant block of dimension " + std::to_string(blk.basis.size()) +
                          " exceeds the dense cap of " + std::to_string(kMaxDenseBlock));
    }
  }
  std::vector<std::size_t> local(n);
  for (const auto& blk : sol.blocks) {
    for (std::size_t j = 0; j < blk.basis.size(); ++j) local[blk.basis[j]] = j;
  }

  std::vector<Eigen::VectorXd> values(sol.blocks.size());
  const auto nblocks = static_cast<std::ptrdiff_t>(sol.blocks.size());
  bool failed = false;
#pragma omp parallel for schedule(dynamic, 1) reduction(|| : failed)
  for (std::ptrdiff_t b = 0; b < nblocks; ++b) {
    auto& blk = sol.blocks[static_cast<std::size_t>(b)];
    const auto m = static_cast<Eigen::Index>(blk.basis.size());
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const std::size_t r = blk.basis[static_cast<std::size_t>(j)];
      for (std::size_t p = h.row_ptr[r]; p < h.row_ptr[r + 1]; ++p) {
        dense(j, static_cast<Eigen::Index>(local[h.cols[p]])) += h.vals[p];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    if (es.info() != Eigen::Success) {
      failed = true;
      continue;
    }
    values[static_cast<std::size_t>(b)] = es.eigenvalues();
    blk.vectors = es.eigenvectors().cast<cplx>();
  }
  if (failed) throw NumericalError("exact_spectrum: eigensolver failed");

  std::vector<Eigenpair> pairs;
  pairs.reserve(n);
  for (std::size_t b = 0; b < sol.blocks.size(); ++b) {
    for (Eigen::Index i = 0; i < values[b].size(); ++i) {
      pairs.push_back({values[b](i), b, static_cast<std::size_t>(i)});
    }
  }
  finish(sol, std::move(pairs));
  return sol;
}

std::vector<std::size_t> mid_spectrum_indices(const EigenSolution& sol, std::size_t k) {
  if (k == 0) throw InvalidParameter("mid_spectrum: k must be positive");
  if (k > sol.size()) throw InvalidParameter("mid_spectrum: k exceeds the number of eigenstates");
  std::vector<std::size_t> idx(sol.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto key = [&sol](std::size_t i) { return std::make_tuple(std::abs(sol.mu[i] - 0.5), sol.energies[i], i); };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&key](std::size_t a, std::size_t b) { return key(a) < key(b); });
  idx.resize(k);
  std::sort(idx.begin(), idx.end(), [&sol](std::size_t a, std::size_t b) {
    return std::tie(sol.mu[a], sol.energies[a], a) < std::tie(sol.mu[b], sol.energies[b], b);
  });
  return idx;
}

std::vector<DenseState> mid_spectrum(const EigenSolution& sol, std::size_t k) {
  std::vector<DenseState> out;
  for (auto i : mid_spectrum_indices(sol, k)) out.push_back(sol.state(i));
  return out;
}

}  // namespace gge
