#include "gge/hamiltonians.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <new>
#include <random>
#include <tuple>

#include <Eigen/SVD>

#include "gge/errors.hpp"
#include "gge/kernels.hpp"

namespace gge {

namespace {

using Eigen::MatrixXcd;

constexpr double kDropTolerance = 1e-14;

MatrixXcd as_eigen(const DenseTensor& t) { return MatrixXcd(t.matrix()); }

DenseTensor from_eigen(const MatrixXcd& m) { return DenseTensor::from_matrix(m); }

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

MatrixXcd dot_product(std::size_t d1, std::size_t d2) {
  const auto a = spin_operators(d1);
  const auto b = spin_operators(d2);
  return kron(as_eigen(a.sx), as_eigen(b.sx)) + kron(as_eigen(a.sy), as_eigen(b.sy)) +
         kron(as_eigen(a.sz), as_eigen(b.sz));
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidParameter(msg);
}

// Column-wise nonzeros of a local operator: for input index `in`, the list of (out, value).
using SparseColumns = std::vector<std::vector<std::pair<std::size_t, cplx>>>;

SparseColumns columns_of(const DenseTensor& op) {
  const auto m = op.matrix();
  SparseColumns cols(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (std::abs(m(r, c)) > kDropTolerance) cols[c].emplace_back(r, m(r, c));
    }
  }
  return cols;
}

std::size_t checked_basis(const Extents& dims, std::size_t max_basis) {
  double total = 1.0;
  for (auto d : dims) total *= static_cast<double>(d);
  if (total > static_cast<double>(max_basis)) {
    throw ResourceError("Hilbert space of " + std::to_string(total) +
                        " states exceeds the basis cap of " + std::to_string(max_basis));
  }
  return volume(dims);
}

// Calls emit(row, col, value) for each nonzero contribution of every local term.
template <typename Emit>
void for_each_element(const LocalTerms& terms, Emit&& emit) {
  const auto& dims = terms.dims;
  const std::size_t n = dims.size();
  const std::size_t dim = volume(dims);
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t k = n - 1; k-- > 0;) stride[k] = stride[k + 1] * dims[k + 1];

  for (std::size_t k = 0; k < n; ++k) {
    const auto cols = columns_of(terms.onsite[k]);
    for (std::size_t c = 0; c < dim; ++c) {
      const std::size_t a = (c / stride[k]) % dims[k];
      for (auto [b, v] : cols[a]) emit(c + b * stride[k] - a * stride[k], c, v);
    }
  }
  for (const auto& cp : terms.couplings) {
    const std::size_t i = cp.first, j = cp.second, dj = dims[j];
    const auto cols = columns_of(cp.op);
    for (std::size_t c = 0; c < dim; ++c) {
      const std::size_t ai = (c / stride[i]) % dims[i];
      const std::size_t aj = (c / stride[j]) % dj;
      const std::size_t base = c - ai * stride[i] - aj * stride[j];
      for (auto [b, v] : cols[ai * dj + aj]) {
        emit(base + (b / dj) * stride[i] + (b % dj) * stride[j], c, v);
      }
    }
  }
}

struct SplitCoupling {
  MatrixXcd left_local, right_local;  // one-site parts
  std::vector<MatrixXcd> left, right;  // connected part = sum_m left[m] (x) right[m]
};

// h = A (x) I + I (x) B + sum_m L_m (x) R_m with the connected part traceless on both sides.
SplitCoupling split_coupling(const MatrixXcd& h, std::size_t d1, std::size_t d2) {
  const auto i1 = static_cast<Eigen::Index>(d1), i2 = static_cast<Eigen::Index>(d2);
  // reshuffle h[(a1 a2),(b1 b2)] -> r[(a1 b1),(a2 b2)]
  MatrixXcd r(i1 * i1, i2 * i2);
  for (Eigen::Index a1 = 0; a1 < i1; ++a1)
    for (Eigen::Index a2 = 0; a2 < i2; ++a2)
      for (Eigen::Index b1 = 0; b1 < i1; ++b1)
        for (Eigen::Index b2 = 0; b2 < i2; ++b2)
          r(a1 * i1 + b1, a2 * i2 + b2) = h(a1 * i2 + a2, b1 * i2 + b2);

  // Component along identity on each side (identity reshuffles to a vector of ones on the diagonal).
  Eigen::VectorXcd id1 = Eigen::VectorXcd::Zero(i1 * i1), id2 = Eigen::VectorXcd::Zero(i2 * i2);
  for (Eigen::Index a = 0; a < i1; ++a) id1(a * i1 + a) = 1.0;
  for (Eigen::Index a = 0; a < i2; ++a) id2(a * i2 + a) = 1.0;
  const Eigen::VectorXcd left_vec = r * id2 / static_cast<double>(d2);            // A + c I
  const Eigen::VectorXcd right_vec = r.transpose() * id1 / static_cast<double>(d1);  // B + c I
  const cplx c = id1.dot(left_vec) / static_cast<double>(d1);
  MatrixXcd conn = r - left_vec * id2.transpose() - id1 * right_vec.transpose() +
                   c * id1 * id2.transpose();

  SplitCoupling out;
  out.left_local = MatrixXcd::Zero(i1, i1);
  out.right_local = MatrixXcd::Zero(i2, i2);
  for (Eigen::Index a = 0; a < i1; ++a)
    for (Eigen::Index b = 0; b < i1; ++b) out.left_local(a, b) = left_vec(a * i1 + b);
  for (Eigen::Index a = 0; a < i2; ++a)
    for (Eigen::Index b = 0; b < i2; ++b) out.right_local(a, b) = right_vec(a * i2 + b);
  out.left_local -= c * MatrixXcd::Identity(i1, i1);

  const bool real = conn.imag().cwiseAbs().maxCoeff() <= kDropTolerance;
  MatrixXcd u, v;
  Eigen::VectorXd s;
  if (real) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(conn.real(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU().cast<cplx>();
    v = svd.matrixV().cast<cplx>();
    s = svd.singularValues();
  } else {
    Eigen::BDCSVD<MatrixXcd> svd(conn, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u = svd.matrixU();
    v = svd.matrixV();
    s = svd.singularValues();
  }
  const double smax = s.size() ? s(0) : 0.0;
  for (Eigen::Index m = 0; m < s.size(); ++m) {
    if (s(m) <= 1e-13 * std::max(smax, 1.0)) break;
    MatrixXcd lm(i1, i1), rm(i2, i2);
    for (Eigen::Index a = 0; a < i1; ++a)
      for (Eigen::Index b = 0; b < i1; ++b) lm(a, b) = s(m) * u(a * i1 + b, m);
    for (Eigen::Index a = 0; a < i2; ++a)
      for (Eigen::Index b = 0; b < i2; ++b) rm(a, b) = std::conj(v(a * i2 + b, m));
    out.left.push_back(std::move(lm));
    out.right.push_back(std::move(rm));
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------------ models

std::string_view model_name(Model m) {
  switch (m) {
    case Model::extended_haldane: return "extended_haldane";
    case Model::anisotropic_haldane: return "anisotropic_haldane";
    case Model::disordered_heisenberg: return "disordered_heisenberg";
    case Model::j1j2: return "j1j2";
  }
  return "unknown";
}

std::optional<Model> model_from_name(std::string_view name) {
  for (Model m : {Model::extended_haldane, Model::anisotropic_haldane,
                  Model::disordered_heisenberg, Model::j1j2}) {
    if (model_name(m) == name) return m;
  }
  return std::nullopt;
}

std::vector<std::string> model_parameters(Model m) {
  switch (m) {
    case Model::extended_haldane: return {"j_aklt"};
    case Model::anisotropic_haldane: return {"j", "d", "e"};
    case Model::disordered_heisenberg: return {"j", "h"};
    case Model::j1j2: return {"j1", "j2"};
  }
  return {};
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

DisorderRealization DisorderRealization::generate(std::uint64_t seed, std::size_t n, double h) {
  if (!(h >= 0.0)) throw InvalidParameter("disorder strength h must be non-negative");
  DisorderRealization out{seed, h, {}};
  out.fields.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::mt19937_64 stream(splitmix64(seed + j));
    const double u = static_cast<double>(stream() >> 11) * 0x1.0p-53;
    out.fields.push_back(h * (2.0 * u - 1.0));
  }
  return out;
}

double ModelSpec::param(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) {
    throw InvalidParameter("model " + std::string(model_name(model)) + " has no parameter '" +
                           name + "'");
  }
  return it->second;
}

void validate(const ModelSpec& spec) {
  const auto allowed = model_parameters(spec.model);
  for (const auto& [name, value] : spec.params) {
    require(std::find(allowed.begin(), allowed.end(), name) != allowed.end(),
            "unknown parameter '" + name + "' for model " + std::string(model_name(spec.model)));
    require(std::isfinite(value), "parameter '" + name + "' is not finite");
  }
  for (const auto& name : allowed) {
    require(spec.params.count(name) == 1, "missing parameter '" + name + "' for model " +
                                              std::string(model_name(spec.model)));
  }
  switch (spec.model) {
    case Model::extended_haldane:
    case Model::j1j2:
      require(spec.n >= 3, "model needs n >= 3");
      break;
    case Model::anisotropic_haldane:
      require(spec.n >= 2, "model needs n >= 2");
      break;
    case Model::disordered_heisenberg:
      require(spec.n >= 2, "model needs n >= 2");
      require(spec.param("h") >= 0.0, "disorder strength h must be non-negative");
      require(spec.disorder.has_value() && spec.disorder->fields.size() == spec.n,
              "disordered_heisenberg needs one field per site");
      break;
  }
}

ModelSpec extended_haldane(std::size_t n, double j_aklt) {
  ModelSpec s{Model::extended_haldane, n, {{"j_aklt", j_aklt}}, std::nullopt};
  validate(s);
  return s;
}

ModelSpec anisotropic_haldane(std::size_t n, double j, double d, double e) {
  ModelSpec s{Model::anisotropic_haldane, n, {{"j", j}, {"d", d}, {"e", e}}, std::nullopt};
  validate(s);
  return s;
}

std::pair<ModelSpec, DisorderRealization> disordered_heisenberg(std::size_t n, double j,
                                                                double h, std::uint64_t seed) {
  require(h >= 0.0, "disorder strength h must be non-negative");
  auto real = DisorderRealization::generate(seed, n, h);
  ModelSpec s{Model::disordered_heisenberg, n, {{"j", j}, {"h", h}}, real};
  validate(s);
  return {s, real};
}

ModelSpec j1j2(std::size_t n, double j1, double j2) {
  ModelSpec s{Model::j1j2, n, {{"j1", j1}, {"j2", j2}}, std::nullopt};
  validate(s);
  return s;
}

std::vector<SpinSite> site_spins(const ModelSpec& spec) {
  std::vector<SpinSite> out(spec.n);
  const bool spin_one = spec.model == Model::extended_haldane ||
                        spec.model == Model::anisotropic_haldane;
  for (auto& s : out) s = spin_one ? SpinSite{1.0, 3} : SpinSite{0.5, 2};
  if (spec.model == Model::extended_haldane) {
    out.front() = SpinSite{0.5, 2};
    out.back() = SpinSite{0.5, 2};
  }
  return out;
}

Extents site_dims(const ModelSpec& spec) {
  Extents d;
  for (const auto& s : site_spins(spec)) d.push_back(s.dim);
  return d;
}

SpinOperators spin_operators(std::size_t dim) {
  if (dim < 2) throw InvalidParameter("spin operators need dimension >= 2");
  const double s = (static_cast<double>(dim) - 1.0) / 2.0;
  MatrixXcd sz = MatrixXcd::Zero(dim, dim), sp = MatrixXcd::Zero(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double m = s - static_cast<double>(i);
    sz(i, i) = m;
    if (i > 0) {
      // <m+1| S+ |m>
      sp(i - 1, i) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
    }
  }
  const MatrixXcd sm = sp.adjoint();
  const MatrixXcd sx = (sp + sm) / 2.0;
  const MatrixXcd sy = (sp - sm) / cplx(0.0, 2.0);
  return {from_eigen(sx), from_eigen(sy), from_eigen(sz), from_eigen(sp), from_eigen(sm),
          DenseTensor::identity(dim)};
}

LocalTerms local_terms(const ModelSpec& spec) {
  validate(spec);
  LocalTerms t;
  t.dims = site_dims(spec);
  const std::size_t n = spec.n;
  for (auto d : t.dims) t.onsite.push_back(DenseTensor({d, d}));

  auto add_bond = [&](std::size_t i, std::size_t j, const MatrixXcd& op) {
    t.couplings.push_back({i, j, from_eigen(op)});
  };

  switch (spec.model) {
    case Model::extended_haldane: {
      const double beta = spec.param("j_aklt") / 3.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto d1 = t.dims[k], d2 = t.dims[k + 1];
        const MatrixXcd ss = dot_product(d1, d2);
        add_bond(k, k + 1, (d1 == 3 && d2 == 3) ? MatrixXcd(ss + beta * ss * ss) : ss);
      }
      break;
    }
    case Model::anisotropic_haldane: {
      const double j = spec.param("j"), d = spec.param("d"), e = spec.param("e");
      const auto ops = spin_operators(3);
      const MatrixXcd sx = as_eigen(ops.sx), sy = as_eigen(ops.sy), sz = as_eigen(ops.sz);
      const MatrixXcd local = d * sz * sz + e * (sx * sx - sy * sy);
      for (std::size_t k = 0; k < n; ++k) t.onsite[k] = from_eigen(local);
      const MatrixXcd ss = dot_product(3, 3);
      for (std::size_t k = 0; k + 1 < n; ++k) add_bond(k, k + 1, j * ss);
      break;
    }
    case Model::disordered_heisenberg: {
      const double j = spec.param("j");
      const auto ops = spin_operators(2);
      for (std::size_t k = 0; k < n; ++k) {
        t.onsite[k] = spec.disorder->fields[k] * ops.sz;
      }
      const MatrixXcd ss = dot_product(2, 2);
      for (std::size_t k = 0; k + 1 < n; ++k) add_bond(k, k + 1, j * ss);
      break;
    }
    case Model::j1j2: {
      const double j1 = spec.param("j1"), j2 = spec.param("j2");
      const MatrixXcd ss = dot_product(2, 2);
      for (std::size_t k = 0; k + 1 < n; ++k) add_bond(k, k + 1, j1 * ss);
      if (j2 != 0.0) {
        for (std::size_t k = 0; k + 2 < n; ++k) add_bond(k, k + 2, j2 * ss);
      }
      break;
    }
  }
  return t;
}

DenseTensor to_dense_matrix(const ModelSpec& spec, std::size_t max_basis) {
  const LocalTerms terms = local_terms(spec);
  const std::size_t dim = checked_basis(terms.dims, max_basis);
  try {
    DenseTensor h({dim, dim});
    auto data = h.data();
    for_each_element(terms, [&](std::size_t r, std::size_t c, cplx v) { data[r * dim + c] += v; });
    return h;
  } catch (const std::bad_alloc&) {
    throw ResourceError("not enough memory for a dense " + std::to_string(dim) + "^2 matrix");
  }
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != dim || y.size() != dim) throw InvalidShape("sparse apply: vector length");
  kernels::csr_matvec(row_ptr, cols, vals, x, y);
}

double SparseOperator::element(std::size_t row, std::size_t col) const {
  const auto first = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr.at(row));
  const auto last = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr.at(row + 1));
  const auto it = std::lower_bound(first, last, col);
  return (it != last && *it == col) ? vals[static_cast<std::size_t>(it - cols.begin())] : 0.0;
}

SparseOperator to_sparse(const ModelSpec& spec, std::size_t max_basis) {
  const LocalTerms terms = local_terms(spec);
  const std::size_t dim = checked_basis(terms.dims, max_basis);
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;
  for_each_element(terms, [&](std::size_t r, std::size_t c, cplx v) {
    if (std::abs(v.imag()) > kDropTolerance) {
      throw InvalidInput("Hamiltonian has imaginary matrix elements; use the dense path");
    }
    triplets.emplace_back(r, c, v.real());
  });
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  SparseOperator op;
  op.dim = dim;
  op.row_ptr.assign(dim + 1, 0);
  for (std::size_t p = 0; p < triplets.size();) {
    auto [r, c, v] = triplets[p];
    double acc = 0.0;
    while (p < triplets.size() && std::get<0>(triplets[p]) == r && std::get<1>(triplets[p]) == c) {
      acc += std::get<2>(triplets[p]);
      ++p;
    }
    if (std::abs(acc) > kDropTolerance) {
      op.cols.push_back(c);
      op.vals.push_back(acc);
      ++op.row_ptr[r + 1];
    }
  }
  for (std::size_t r = 0; r < dim; ++r) op.row_ptr[r + 1] += op.row_ptr[r];
  return op;
}

MatrixProductOperator to_mpo(const ModelSpec& spec) { return to_mpo(local_terms(spec)); }

MatrixProductOperator to_mpo(const LocalTerms& terms) {
  const std::size_t n = terms.dims.size();
  std::vector<MatrixXcd> onsite;
  for (const auto& o : terms.onsite) onsite.push_back(as_eigen(o));

  // One open string per retained component of each coupling.
  struct String {
    std::size_t first, second;
    MatrixXcd open, close;
  };
  std::vector<String> strings;
  for (const auto& cp : terms.couplings) {
    if (cp.first >= cp.second || cp.second >= n) throw InvalidShape("coupling sites out of order");
    auto split = split_coupling(as_eigen(cp.op), terms.dims[cp.first], terms.dims[cp.second]);
    onsite[cp.first] += split.left_local;
    onsite[cp.second] += split.right_local;
    for (std::size_t m = 0; m < split.left.size(); ++m) {
      strings.push_back({cp.first, cp.second, split.left[m], split.right[m]});
    }
  }

  // Channels on bond b (between b and b+1): 0 = start, 1..k = strings crossing, k+1 = done.
  std::vector<std::vector<std::size_t>> crossing(n > 0 ? n - 1 : 0);
  for (std::size_t s = 0; s < strings.size(); ++s) {
    for (std::size_t b = strings[s].first; b < strings[s].second; ++b) crossing[b].push_back(s);
  }
  auto channel_of = [&](std::size_t bond, std::size_t s) {
    const auto& c = crossing[bond];
    return 1 + static_cast<std::size_t>(std::find(c.begin(), c.end(), s) - c.begin());
  };

  std::vector<DenseTensor> sites;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t d = terms.dims[k];
    const bool first = k == 0, last = k + 1 == n;
    const std::size_t wl = first ? 1 : crossing[k - 1].size() + 2;
    const std::size_t wr = last ? 1 : crossing[k].size() + 2;
    const std::size_t l_start = 0, l_done = wl - 1;
    const std::size_t r_start = 0, r_done = wr - 1;
    DenseTensor w({wl, d, d, wr});
    auto put = [&](std::size_t a, std::size_t b, const MatrixXcd& op) {
      for (std::size_t o = 0; o < d; ++o)
        for (std::size_t i = 0; i < d; ++i) w({a, o, i, b}) += op(o, i);
    };
    const MatrixXcd id = MatrixXcd::Identity(d, d);
    if (!last) put(l_start, r_start, id);
    if (!first) put(l_done, r_done, id);
    put(l_start, r_done, onsite[k]);
    for (std::size_t s = 0; s < strings.size(); ++s) {
      const auto& st = strings[s];
      if (st.first == k) put(l_start, channel_of(k, s), st.open);
      if (st.first < k && k < st.second) put(channel_of(k - 1, s), channel_of(k, s), id);
      if (st.second == k) put(channel_of(k - 1, s), r_done, st.close);
    }
    sites.push_back(std::move(w));
  }
  return MatrixProductOperator(std::move(sites));
}

MatrixProductOperator sum_of_onsite_mpo(const Extents& dims, const std::vector<DenseTensor>& ops) {
  if (dims.size() != ops.size()) throw InvalidShape("one operator per site expected");
  LocalTerms t;
  t.dims = dims;
  t.onsite = ops;
  return to_mpo(t);
}

}  // namespace gge
