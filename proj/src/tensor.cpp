#include "gge/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include <Eigen/SVD>

#include "gge/errors.hpp"
#include "gge/kernels.hpp"

namespace gge {

namespace {

std::string dims_str(std::span<const std::size_t> dims) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ']';
  return os.str();
}

}  // namespace

std::size_t volume(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(Extents dims) : dims_(std::move(dims)), data_(volume(dims_)) {}

DenseTensor::DenseTensor(Extents dims, std::vector<cplx> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (volume(dims_) != data_.size()) {
    throw InvalidShape("tensor data length " + std::to_string(data_.size()) +
                       " does not match dims " + dims_str(dims_));
  }
}

DenseTensor DenseTensor::identity(std::size_t n) {
  DenseTensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

DenseTensor DenseTensor::from_matrix(const RowMatrixXcd& m) {
  DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<RowMatrixXcd>(t.data_.data(), m.rows(), m.cols()) = m;
  return t;
}

std::size_t DenseTensor::flat_index(std::initializer_list<std::size_t> index) const {
  if (index.size() != dims_.size()) throw InvalidShape("index rank does not match tensor rank");
  std::size_t flat = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= dims_[axis]) throw InvalidShape("index out of range on axis " + std::to_string(axis));
    flat = flat * dims_[axis] + i;
    ++axis;
  }
  return flat;
}

cplx& DenseTensor::operator()(std::initializer_list<std::size_t> index) {
  return data_[flat_index(index)];
}

const cplx& DenseTensor::operator()(std::initializer_list<std::size_t> index) const {
  return data_[flat_index(index)];
}

Eigen::Map<const RowMatrixXcd> DenseTensor::matrix() const {
  if (rank() != 2) throw InvalidShape("matrix view needs a rank-2 tensor, got " + dims_str(dims_));
  return {data_.data(), static_cast<Eigen::Index>(dims_[0]), static_cast<Eigen::Index>(dims_[1])};
}

Eigen::Map<RowMatrixXcd> DenseTensor::matrix() {
  if (rank() != 2) throw InvalidShape("matrix view needs a rank-2 tensor, got " + dims_str(dims_));
  return {data_.data(), static_cast<Eigen::Index>(dims_[0]), static_cast<Eigen::Index>(dims_[1])};
}

DenseTensor& DenseTensor::operator*=(cplx alpha) {
  for (auto& x : data_) x *= alpha;
  return *this;
}

DenseTensor operator*(cplx alpha, DenseTensor t) {
  t *= alpha;
  return t;
}

DenseTensor conj(DenseTensor t) {
  for (auto& x : t.data()) x = std::conj(x);
  return t;
}

double frobenius_norm(const DenseTensor& t) {
  double acc = 0.0;
  for (const auto& x : t.data()) acc += std::norm(x);
  return std::sqrt(acc);
}

DenseTensor reshape(DenseTensor t, Extents new_dims) {
  if (volume(new_dims) != t.size()) {
    throw InvalidShape("cannot reshape " + dims_str(t.dims()) + " into " + dims_str(new_dims));
  }
  return DenseTensor(std::move(new_dims), std::move(t).take_data());
}

DenseTensor permute(const DenseTensor& t, std::span<const std::size_t> perm) {
  const std::size_t r = t.rank();
  if (perm.size() != r) throw InvalidShape("permutation length does not match tensor rank");
  std::vector<bool> seen(r, false);
  for (std::size_t p : perm) {
    if (p >= r || seen[p]) throw InvalidShape("invalid axis permutation");
    seen[p] = true;
  }
  Extents out_dims(r);
  for (std::size_t i = 0; i < r; ++i) out_dims[i] = t.dims()[perm[i]];
  DenseTensor out(out_dims);
  if (std::is_sorted(perm.begin(), perm.end())) {
    std::copy(t.data().begin(), t.data().end(), out.data().begin());
  } else {
    kernels::permute(t.data(), out.data(), t.dims(), perm);
  }
  return out;
}

DenseTensor permute(const DenseTensor& t, std::initializer_list<std::size_t> perm) {
  return permute(t, std::span<const std::size_t>(perm.begin(), perm.size()));
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b, const IndexPairs& pairs) {
  std::vector<bool> a_paired(a.rank(), false), b_paired(b.rank(), false);
  for (auto [ia, ib] : pairs) {
    if (ia >= a.rank() || ib >= b.rank()) throw InvalidShape("contraction axis out of range");
    if (a_paired[ia] || b_paired[ib]) throw InvalidShape("contraction axis paired twice");
    if (a.dims()[ia] != b.dims()[ib]) {
      throw InvalidShape("contracted extents differ: " + std::to_string(a.dims()[ia]) + " vs " +
                         std::to_string(b.dims()[ib]));
    }
    a_paired[ia] = b_paired[ib] = true;
  }
  std::vector<std::size_t> a_perm, b_perm;
  Extents out_dims;
  std::size_t m = 1, k = 1, n = 1;
  for (std::size_t i = 0; i < a.rank(); ++i) {
    if (!a_paired[i]) {
      a_perm.push_back(i);
      out_dims.push_back(a.dims()[i]);
      m *= a.dims()[i];
    }
  }
  for (auto [ia, ib] : pairs) {
    a_perm.push_back(ia);
    b_perm.push_back(ib);
    k *= a.dims()[ia];
  }
  for (std::size_t i = 0; i < b.rank(); ++i) {
    if (!b_paired[i]) {
      b_perm.push_back(i);
      out_dims.push_back(b.dims()[i]);
      n *= b.dims()[i];
    }
  }
  const DenseTensor ap = permute(a, a_perm);
  const DenseTensor bp = permute(b, b_perm);
  DenseTensor out(out_dims);
  kernels::matmul(ap.data(), bp.data(), out.data(), m, k, n);
  return out;
}

DenseTensor matmul(const DenseTensor& a, const DenseTensor& b) {
  if (a.rank() != 2 || b.rank() != 2) throw InvalidShape("matmul needs rank-2 operands");
  if (a.dim(1) != b.dim(0)) throw InvalidShape("matmul inner extents differ");
  DenseTensor out({a.dim(0), b.dim(1)});
  kernels::matmul(a.data(), b.data(), out.data(), a.dim(0), a.dim(1), b.dim(1));
  return out;
}

std::size_t SvdResult::rank(double rel_tol) const {
  if (s.empty() || s.front() <= 0.0) return 0;
  const double cut = rel_tol * s.front();
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [cut](double v) { return v > cut; }));
}

SvdResult svd(const DenseTensor& m) {
  if (m.rank() != 2) throw InvalidShape("svd needs a rank-2 tensor");
  const auto mat = m.matrix();
  const auto rows = mat.rows(), cols = mat.cols();
  const auto k = std::min(rows, cols);
  SvdResult out;
  if (k == 0) {
    out.u = DenseTensor({static_cast<std::size_t>(rows), 0});
    out.vdag = DenseTensor({0, static_cast<std::size_t>(cols)});
    return out;
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> solver(Eigen::MatrixXcd(mat),
                                         Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("svd did not converge for a " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " matrix (norm " +
                         std::to_string(mat.norm()) + ")");
  }
  const auto& sv = solver.singularValues();
  if (!sv.allFinite()) throw NumericalError("svd produced non-finite singular values");
  out.s.assign(sv.data(), sv.data() + k);
  out.u = DenseTensor::from_matrix(solver.matrixU());
  out.vdag = DenseTensor::from_matrix(solver.matrixV().adjoint());
  return out;
}

SvdResult truncated_svd(const DenseTensor& m, std::size_t max_rank) {
  SvdResult full = svd(m);
  const std::size_t total = full.s.size();
  std::size_t keep = std::min<std::size_t>(max_rank, std::max<std::size_t>(full.rank(), 1));
  keep = std::min(keep, total);
  if (keep == total) return full;

  SvdResult out;
  for (std::size_t i = keep; i < total; ++i) out.discarded_weight += full.s[i] * full.s[i];
  out.s.assign(full.s.begin(), full.s.begin() + static_cast<std::ptrdiff_t>(keep));
  const auto u = full.u.matrix();
  const auto v = full.vdag.matrix();
  out.u = DenseTensor::from_matrix(u.leftCols(static_cast<Eigen::Index>(keep)));
  out.vdag = DenseTensor::from_matrix(v.topRows(static_cast<Eigen::Index>(keep)));
  return out;
}

}  // namespace gge
