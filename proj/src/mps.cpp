#include "gge/mps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/QR>

#include "gge/errors.hpp"

namespace gge {

namespace {

// Thin QR with diag(R) real and non-negative, so Q is unique for full column rank.
std::pair<DenseTensor, DenseTensor> qr_positive(const DenseTensor& m) {
  const auto mat = m.matrix();
  const Eigen::Index rows = mat.rows(), cols = mat.cols();
  const Eigen::Index k = std::min(rows, cols);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr{Eigen::MatrixXcd(mat)};
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, k);
  Eigen::MatrixXcd r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i) {
    const cplx d = r(i, i);
    const double mag = std::abs(d);
    if (mag > 0.0) {
      const cplx phase = d / mag;
      q.col(i) *= phase;
      r.row(i) *= std::conj(phase);
    }
  }
  return {DenseTensor::from_matrix(q), DenseTensor::from_matrix(r)};
}

// m = L Q with Q having orthonormal rows; returns (L, Q).
std::pair<DenseTensor, DenseTensor> lq_positive(const DenseTensor& m) {
  auto [q, r] = qr_positive(DenseTensor::from_matrix(m.matrix().adjoint()));
  return {DenseTensor::from_matrix(r.matrix().adjoint()),
          DenseTensor::from_matrix(q.matrix().adjoint())};
}

DenseTensor diag_times(const std::vector<double>& s, const DenseTensor& vdag) {
  DenseTensor out = vdag;
  const std::size_t cols = vdag.dim(1);
  auto data = out.data();
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) data[i * cols + j] *= s[i];
  }
  return out;
}

std::vector<DenseTensor> raw_sites(const MatrixProductState& m) {
  std::vector<DenseTensor> out;
  out.reserve(m.num_sites());
  for (const auto& s : m.sites()) out.push_back(s.tensor());
  return out;
}

std::vector<SiteTensor> wrap_sites(std::vector<DenseTensor> raw) {
  std::vector<SiteTensor> out;
  out.reserve(raw.size());
  for (auto& t : raw) out.emplace_back(std::move(t));
  return out;
}

std::size_t largest_of(const std::vector<DenseTensor>& sites) {
  std::size_t b = 1;
  for (const auto& s : sites) b = std::max({b, s.dim(0), s.dim(2)});
  return b;
}

void check_same_dims(const Extents& a, const Extents& b) {
  if (a != b) throw InvalidShape("site dimensions of the two operands differ");
}

// Transfer step of <a|b>: env (xa, xb) -> (xa', xb').
DenseTensor overlap_step(const DenseTensor& env, const DenseTensor& a_site,
                         const DenseTensor& b_site) {
  const DenseTensor tmp = contract(env, b_site, {{1, 0}});            // (xa, s, xb')
  return contract(conj(a_site), tmp, {{0, 0}, {1, 1}});               // (xa', xb')
}

// Right transfer step: env (xa', xb') of sites > k -> env of sites >= k.
DenseTensor overlap_step_right(const DenseTensor& env, const DenseTensor& a_site,
                               const DenseTensor& b_site) {
  const DenseTensor tmp = contract(b_site, env, {{2, 1}});            // (xb, s, xa')
  return contract(conj(a_site), tmp, {{1, 1}, {2, 2}});               // (xa, xb)
}

// Largest min(D_left, D_right) over all cuts.
std::size_t max_cut_dim(const Extents& dims) {
  std::size_t best = 1;
  double left = 1.0, total = 1.0;
  for (auto d : dims) total *= static_cast<double>(d);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    left *= static_cast<double>(dims[k]);
    const double cut = std::min(left, total / left);
    best = std::max(best, static_cast<std::size_t>(std::min(cut, 1e18)));
  }
  return best;
}

DenseTensor unit_env() { return DenseTensor({1, 1}, {cplx{1.0, 0.0}}); }

void normalize_site(DenseTensor& t) {
  const double nrm = frobenius_norm(t);
  if (nrm == 0.0 || !std::isfinite(nrm)) throw NumericalError("cannot normalize a zero state");
  t *= 1.0 / nrm;
}

}  // namespace

// ---------------------------------------------------------------- DenseState

DenseState::DenseState(Extents site_dims, std::vector<cplx> amplitudes)
    : site_dims_(std::move(site_dims)), amplitudes_(std::move(amplitudes)) {
  if (site_dims_.empty()) throw InvalidShape("a state needs at least one site");
  for (auto d : site_dims_) {
    if (d == 0) throw InvalidShape("site dimension must be positive");
  }
  if (volume(site_dims_) != amplitudes_.size()) {
    throw InvalidShape("amplitude count " + std::to_string(amplitudes_.size()) +
                       " does not match the product of site dimensions");
  }
}

DenseState DenseState::basis(Extents site_dims, std::span<const std::size_t> config) {
  if (config.size() != site_dims.size()) throw InvalidShape("basis config has wrong length");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < config.size(); ++k) {
    if (config[k] >= site_dims[k]) throw InvalidShape("basis config entry out of range");
    flat = flat * site_dims[k] + config[k];
  }
  std::vector<cplx> amps(volume(site_dims));
  amps[flat] = 1.0;
  return DenseState(std::move(site_dims), std::move(amps));
}

DenseState DenseState::product(const std::vector<std::vector<cplx>>& local) {
  Extents dims;
  std::vector<cplx> amps{1.0};
  for (const auto& v : local) {
    dims.push_back(v.size());
    std::vector<cplx> next(amps.size() * v.size());
    for (std::size_t i = 0; i < amps.size(); ++i) {
      for (std::size_t j = 0; j < v.size(); ++j) next[i * v.size() + j] = amps[i] * v[j];
    }
    amps = std::move(next);
  }
  DenseState out(std::move(dims), std::move(amps));
  out.normalize();
  return out;
}

double DenseState::norm() const {
  double acc = 0.0;
  for (const auto& a : amplitudes_) acc += std::norm(a);
  return std::sqrt(acc);
}

DenseState& DenseState::normalize() {
  const double n = norm();
  if (n == 0.0) throw InvalidInput("cannot normalize the zero vector");
  for (auto& a : amplitudes_) a /= n;
  return *this;
}

// ------------------------------------------------------------ SiteTensor/MPS

SiteTensor::SiteTensor(DenseTensor t) : tensor_(std::move(t)) {
  if (tensor_.rank() != 3) throw InvalidShape("site tensor must be rank 3 (left, phys, right)");
}

MatrixProductState::MatrixProductState(std::vector<SiteTensor> sites, std::size_t max_bond,
                                       std::optional<std::size_t> canonical_center)
    : sites_(std::move(sites)), max_bond_(max_bond), center_(canonical_center) {
  if (sites_.empty()) throw InvalidShape("an MPS needs at least one site");
  if (max_bond_ < 1) throw InvalidParameter("max_bond must be at least 1");
  if (sites_.front().left_dim() != 1 || sites_.back().right_dim() != 1) {
    throw InvalidShape("open-boundary MPS must have unit outer bonds");
  }
  for (std::size_t k = 0; k + 1 < sites_.size(); ++k) {
    if (sites_[k].right_dim() != sites_[k + 1].left_dim()) {
      throw InvalidShape("bond " + std::to_string(k) + " extents do not chain");
    }
    if (sites_[k].right_dim() > max_bond_) {
      throw InvalidShape("bond " + std::to_string(k) + " exceeds max_bond");
    }
  }
  if (center_ && *center_ >= sites_.size()) throw InvalidParameter("canonical center out of range");
}

Extents MatrixProductState::site_dims() const {
  Extents d;
  d.reserve(sites_.size());
  for (const auto& s : sites_) d.push_back(s.phys_dim());
  return d;
}

Extents MatrixProductState::bond_dims() const {
  Extents b;
  for (std::size_t k = 0; k + 1 < sites_.size(); ++k) b.push_back(sites_[k].right_dim());
  return b;
}

std::size_t MatrixProductState::largest_bond() const {
  const auto b = bond_dims();
  return b.empty() ? 1 : *std::max_element(b.begin(), b.end());
}

MatrixProductOperator::MatrixProductOperator(std::vector<DenseTensor> sites)
    : sites_(std::move(sites)) {
  if (sites_.empty()) throw InvalidShape("an MPO needs at least one site");
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    const auto& w = sites_[k];
    if (w.rank() != 4) throw InvalidShape("MPO site must be rank 4 (left, out, in, right)");
    if (w.dim(1) != w.dim(2)) throw InvalidShape("MPO physical legs must match");
    if (k + 1 < sites_.size() && w.dim(3) != sites_[k + 1].dim(0)) {
      throw InvalidShape("MPO bond " + std::to_string(k) + " extents do not chain");
    }
  }
  if (sites_.front().dim(0) != 1 || sites_.back().dim(3) != 1) {
    throw InvalidShape("MPO must have unit outer bonds");
  }
}

Extents MatrixProductOperator::site_dims() const {
  Extents d;
  for (const auto& w : sites_) d.push_back(w.dim(1));
  return d;
}

Extents MatrixProductOperator::bond_dims() const {
  Extents b;
  for (std::size_t k = 0; k + 1 < sites_.size(); ++k) b.push_back(sites_[k].dim(3));
  return b;
}

// ---------------------------------------------------------------- operations

MatrixProductState compress(const DenseState& state, std::size_t chi,
                            const CompressOptions& options) {
  if (chi < 1) throw InvalidParameter("chi must be at least 1");
  const Extents& dims = state.site_dims();
  const std::size_t n = dims.size();
  std::vector<DenseTensor> sites;
  sites.reserve(n);

  std::vector<cplx> amps(state.amplitudes().begin(), state.amplitudes().end());
  const std::size_t total = amps.size();
  DenseTensor rem({1, total}, std::move(amps));
  std::size_t left = 1;
  std::size_t rest = state.amplitudes().size();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    rest /= dims[k];
    DenseTensor m = reshape(std::move(rem), {left * dims[k], rest});
    SvdResult f = truncated_svd(m, chi);
    const std::size_t keep = f.s.size();
    sites.push_back(reshape(std::move(f.u), {left, dims[k], keep}));
    rem = diag_times(f.s, f.vdag);
    left = keep;
  }
  DenseTensor last = reshape(std::move(rem), {left, dims[n - 1], 1});
  normalize_site(last);
  sites.push_back(std::move(last));

  const std::size_t bound = std::max(largest_of(sites), std::min(chi, max_cut_dim(dims)));
  MatrixProductState out(wrap_sites(std::move(sites)), bound, n - 1);
  if (options.refine_sweeps > 0) {
    out = refine(exact_mps(state), out, options.refine_sweeps);
  }
  return out;
}

MatrixProductState exact_mps(const DenseState& state) {
  auto m = compress(state, std::numeric_limits<std::size_t>::max());
  return MatrixProductState(m.sites(), m.largest_bond(), m.canonical_center());
}

DenseState to_dense(const MatrixProductState& m, std::size_t max_amplitudes) {
  const Extents dims = m.site_dims();
  double total = 1.0;
  for (auto d : dims) total *= static_cast<double>(d);
  if (total > static_cast<double>(max_amplitudes)) {
    throw ResourceError("dense state with " + std::to_string(total) +
                        " amplitudes exceeds the cap of " + std::to_string(max_amplitudes));
  }
  const auto& s0 = m.site(0).tensor();
  DenseTensor acc = reshape(s0, {s0.dim(1), s0.dim(2)});
  for (std::size_t k = 1; k < m.num_sites(); ++k) {
    const auto& t = m.site(k).tensor();
    DenseTensor next = matmul(acc, reshape(t, {t.dim(0), t.dim(1) * t.dim(2)}));
    acc = reshape(std::move(next), {acc.dim(0) * t.dim(1), t.dim(2)});
  }
  return DenseState(dims, std::move(acc).take_data());
}

cplx overlap(const DenseState& a, const DenseState& b) {
  check_same_dims(a.site_dims(), b.site_dims());
  cplx acc{0.0, 0.0};
  const auto x = a.amplitudes();
  const auto y = b.amplitudes();
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

cplx overlap(const MatrixProductState& a, const MatrixProductState& b) {
  check_same_dims(a.site_dims(), b.site_dims());
  DenseTensor env = unit_env();
  for (std::size_t k = 0; k < a.num_sites(); ++k) {
    env = overlap_step(env, a.site(k).tensor(), b.site(k).tensor());
  }
  return env.data()[0];
}

cplx overlap(const MatrixProductState& a, const DenseState& b) {
  check_same_dims(a.site_dims(), b.site_dims());
  return overlap(to_dense(a), b);
}

cplx overlap(const DenseState& a, const MatrixProductState& b) {
  check_same_dims(a.site_dims(), b.site_dims());
  return overlap(a, to_dense(b));
}

double norm(const MatrixProductState& m) { return std::sqrt(std::abs(overlap(m, m).real())); }

MatrixProductState normalize(const MatrixProductState& m) {
  const double nrm = norm(m);
  if (nrm == 0.0 || !std::isfinite(nrm)) throw NumericalError("cannot normalize a zero MPS");
  auto sites = raw_sites(m);
  const std::size_t at = m.canonical_center().value_or(0);
  sites[at] *= 1.0 / nrm;
  return MatrixProductState(wrap_sites(std::move(sites)), m.max_bond(), m.canonical_center());
}

MatrixProductState canonicalize(const MatrixProductState& m, std::size_t center) {
  const std::size_t n = m.num_sites();
  if (center >= n) throw InvalidParameter("canonical center out of range");
  auto sites = raw_sites(m);
  for (std::size_t k = 0; k < center; ++k) {
    const auto l = sites[k].dim(0), d = sites[k].dim(1), r = sites[k].dim(2);
    auto [q, rr] = qr_positive(reshape(sites[k], {l * d, r}));
    const std::size_t kq = q.dim(1);
    sites[k] = reshape(std::move(q), {l, d, kq});
    sites[k + 1] = contract(rr, sites[k + 1], {{1, 0}});
  }
  for (std::size_t k = n - 1; k > center; --k) {
    const auto l = sites[k].dim(0), d = sites[k].dim(1), r = sites[k].dim(2);
    auto [lf, q] = lq_positive(reshape(sites[k], {l, d * r}));
    const std::size_t kq = q.dim(0);
    sites[k] = reshape(std::move(q), {kq, d, r});
    sites[k - 1] = contract(sites[k - 1], lf, {{2, 0}});
  }
  const std::size_t bound = std::max(m.max_bond(), largest_of(sites));
  return MatrixProductState(wrap_sites(std::move(sites)), bound, center);
}

MatrixProductState truncate(const MatrixProductState& m, std::size_t chi) {
  if (chi < 1) throw InvalidParameter("chi must be at least 1");
  const std::size_t n = m.num_sites();
  auto sites = raw_sites(canonicalize(m, 0));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const auto l = sites[k].dim(0), d = sites[k].dim(1), r = sites[k].dim(2);
    SvdResult f = truncated_svd(reshape(sites[k], {l * d, r}), chi);
    const std::size_t keep = f.s.size();
    sites[k] = reshape(std::move(f.u), {l, d, keep});
    sites[k + 1] = contract(diag_times(f.s, f.vdag), sites[k + 1], {{1, 0}});
  }
  normalize_site(sites[n - 1]);
  return MatrixProductState(wrap_sites(std::move(sites)), chi, n - 1);
}

MatrixProductState refine(const MatrixProductState& target, const MatrixProductState& approx,
                          std::size_t sweeps) {
  check_same_dims(target.site_dims(), approx.site_dims());
  if (sweeps == 0) return normalize(approx);
  const std::size_t n = approx.num_sites();
  auto a = raw_sites(canonicalize(approx, 0));
  const auto t = raw_sites(target);

  auto local = [&](const DenseTensor& l, std::size_t k, const DenseTensor& r) {
    const DenseTensor lt = contract(l, t[k], {{1, 0}});  // (xa, s, xt')
    return contract(lt, r, {{2, 1}});                   // (xa, s, xa')
  };

  std::vector<DenseTensor> left_env(n + 1), right_env(n + 1);
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    right_env[n] = unit_env();
    for (std::size_t k = n - 1; k >= 1; --k) right_env[k] = overlap_step_right(right_env[k + 1], a[k], t[k]);

    left_env[0] = unit_env();
    for (std::size_t k = 0; k + 1 < n; ++k) {
      DenseTensor opt = local(left_env[k], k, right_env[k + 1]);
      const auto l = opt.dim(0), d = opt.dim(1), r = opt.dim(2);
      auto [q, rr] = qr_positive(reshape(std::move(opt), {l * d, r}));
      const std::size_t kq = q.dim(1);
      a[k] = reshape(std::move(q), {l, d, kq});
      a[k + 1] = contract(rr, a[k + 1], {{1, 0}});
      left_env[k + 1] = overlap_step(left_env[k], a[k], t[k]);
    }
    right_env[n] = unit_env();
    for (std::size_t k = n - 1; k >= 1; --k) {
      DenseTensor opt = local(left_env[k], k, right_env[k + 1]);
      const auto l = opt.dim(0), d = opt.dim(1), r = opt.dim(2);
      auto [lf, q] = lq_positive(reshape(std::move(opt), {l, d * r}));
      const std::size_t kq = q.dim(0);
      a[k] = reshape(std::move(q), {kq, d, r});
      a[k - 1] = contract(a[k - 1], lf, {{2, 0}});
      right_env[k] = overlap_step_right(right_env[k + 1], a[k], t[k]);
    }
    a[0] = local(left_env[0], 0, right_env[1]);
  }
  normalize_site(a[0]);
  const std::size_t bound = std::max(approx.max_bond(), largest_of(a));
  return MatrixProductState(wrap_sites(std::move(a)), bound, 0);
}

MatrixProductState apply_mpo(const MatrixProductOperator& op, const MatrixProductState& m) {
  check_same_dims(op.site_dims(), m.site_dims());
  std::vector<DenseTensor> sites;
  sites.reserve(m.num_sites());
  for (std::size_t k = 0; k < m.num_sites(); ++k) {
    const DenseTensor& w = op.site(k);
    const DenseTensor& a = m.site(k).tensor();
    // (wl, o, wr, l, r) -> (wl, l, o, wr, r)
    DenseTensor t = permute(contract(w, a, {{2, 1}}), {0, 3, 1, 2, 4});
    const auto wl = w.dim(0), wr = w.dim(3), l = a.dim(0), r = a.dim(2), d = w.dim(1);
    sites.push_back(reshape(std::move(t), {wl * l, d, wr * r}));
  }
  const std::size_t bound = largest_of(sites);
  return MatrixProductState(wrap_sites(std::move(sites)), bound);
}

cplx expectation(const MatrixProductState& m, const MatrixProductOperator& op) {
  check_same_dims(op.site_dims(), m.site_dims());
  DenseTensor env({1, 1, 1}, {cplx{1.0, 0.0}});  // (x_bra, w, y_ket)
  for (std::size_t k = 0; k < m.num_sites(); ++k) {
    const DenseTensor& a = m.site(k).tensor();
    const DenseTensor& w = op.site(k);
    const DenseTensor t1 = contract(env, a, {{2, 0}});              // (x, w, s, y')
    const DenseTensor t2 = contract(t1, w, {{1, 0}, {2, 2}});       // (x, y', o, w')
    const DenseTensor t3 = contract(conj(a), t2, {{0, 0}, {1, 2}}); // (x', y', w')
    env = permute(t3, {0, 2, 1});
  }
  const cplx nrm = overlap(m, m);
  return env.data()[0] / nrm;
}

cplx correlation(const MatrixProductState& m, const DenseTensor& op_i, std::size_t i,
                 const DenseTensor& op_j, std::size_t j) {
  if (i >= m.num_sites() || j >= m.num_sites() || i == j) {
    throw InvalidParameter("correlation needs two distinct sites in range");
  }
  std::vector<DenseTensor> sites;
  for (std::size_t k = 0; k < m.num_sites(); ++k) {
    const std::size_t d = m.site(k).phys_dim();
    const DenseTensor& o = k == i ? op_i : (k == j ? op_j : DenseTensor::identity(d));
    if (o.rank() != 2 || o.dim(0) != d || o.dim(1) != d) {
      throw InvalidShape("single-site operator does not match site " + std::to_string(k));
    }
    sites.push_back(reshape(o, {1, d, d, 1}));
  }
  return expectation(m, MatrixProductOperator(std::move(sites)));
}

MatrixProductState product_mps(const std::vector<std::vector<cplx>>& local) {
  std::vector<DenseTensor> sites;
  for (const auto& v : local) {
    DenseTensor t({1, v.size(), 1}, v);
    normalize_site(t);
    sites.push_back(std::move(t));
  }
  return MatrixProductState(wrap_sites(std::move(sites)), 1, 0);
}

}  // namespace gge
