#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <type_traits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "gge/errors.hpp"
#include "gge/solvers.hpp"

namespace gge {

void DmrgConfig::validate() const {
  if (max_bond < 1) throw InvalidParameter("dmrg: max_bond must be at least 1");
  if (sweeps < 1) throw InvalidParameter("dmrg: sweeps must be at least 1");
  if (!(energy_tol > 0.0)) throw InvalidParameter("dmrg: energy_tol must be positive");
  if (!(truncation_tol > 0.0)) throw InvalidParameter("dmrg: truncation_tol must be positive");
  if (!(lanczos_tol > 0.0)) throw InvalidParameter("dmrg: lanczos_tol must be positive");
  if (initial_bond < 1) throw InvalidParameter("dmrg: initial_bond must be at least 1");
  if (lanczos_krylov < 2) throw InvalidParameter("dmrg: lanczos_krylov must be at least 2");
}

namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
T narrow(cplx v) {
  if constexpr (std::is_same_v<T, double>) {
    return v.real();
  } else {
    return v;
  }
}

template <typename T>
T random_scalar(std::mt19937_64& g) {
  auto u = [&g] { return static_cast<double>(g() >> 11) * 0x1.0p-53 - 0.5; };
  if constexpr (std::is_same_v<T, double>) {
    return u();
  } else {
    const double re = u();
    return cplx(re, u());
  }
}

template <typename T>
struct MpoEntry {
  std::size_t a, b;
  Mat<T> op;  // (out, in)
};

template <typename T>
struct MpoSite {
  std::size_t wl = 1, wr = 1, d = 1;
  std::vector<MpoEntry<T>> entries;
};

template <typename T>
std::vector<MpoSite<T>> convert_mpo(const MatrixProductOperator& op) {
  std::vector<MpoSite<T>> out;
  for (const auto& w : op.sites()) {
    MpoSite<T> site{w.dim(0), w.dim(3), w.dim(1), {}};
    for (std::size_t a = 0; a < site.wl; ++a) {
      for (std::size_t b = 0; b < site.wr; ++b) {
        Mat<T> m(site.d, site.d);
        bool nonzero = false;
        for (std::size_t o = 0; o < site.d; ++o) {
          for (std::size_t i = 0; i < site.d; ++i) {
            const cplx v = w({a, o, i, b});
            m(o, i) = narrow<T>(v);
            nonzero = nonzero || std::abs(v) > 0.0;
          }
        }
        if (nonzero) site.entries.push_back({a, b, std::move(m)});
      }
    }
    out.push_back(std::move(site));
  }
  return out;
}

bool mpo_is_real(const MatrixProductOperator& op) {
  for (const auto& w : op.sites()) {
    for (const auto& v : w.data()) {
      if (v.imag() != 0.0) return false;
    }
  }
  return true;
}

// Lowest eigenpair of a Hermitian operator by Lanczos with full reorthogonalization.
template <typename T, typename Apply>
std::pair<double, Vec<T>> lowest_eigenpair(Apply&& apply, Vec<T> x, const DmrgConfig& cfg) {
  const auto dim = static_cast<std::size_t>(x.size());
  double theta = 0.0;
  for (std::size_t restart = 0; restart <= cfg.lanczos_restarts; ++restart) {
    const double nx = x.norm();
    if (!(nx > 0.0)) throw NumericalError("dmrg: zero Lanczos start vector");
    std::vector<Vec<T>> basis{x / nx};
    std::vector<double> alpha, beta;
    const std::size_t kmax = std::min(cfg.lanczos_krylov, dim);
    bool done = false;
    Eigen::VectorXd y;
    for (std::size_t j = 0; j < kmax; ++j) {
      Vec<T> w = apply(basis[j]);
      const double a = std::real(basis[j].dot(w));
      w -= a * basis[j];
      if (j > 0) w -= beta[j - 1] * basis[j - 1];
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& v : basis) w -= v.dot(w) * v;
      }
      const double b = w.norm();
      alpha.push_back(a);

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      const Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), alpha.size());
      const Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      theta = tri.eigenvalues()(0);
      y = tri.eigenvectors().col(0);
      const double resid = b * std::abs(y(static_cast<Eigen::Index>(j)));
      const bool converged = resid < cfg.lanczos_tol || b < 1e-13;
      if (converged || j + 1 == kmax) {
        done = converged;
        break;
      }
      beta.push_back(b);
      basis.push_back(w / b);
    }
    Vec<T> ritz = Vec<T>::Zero(x.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) ritz += y(i) * basis[static_cast<std::size_t>(i)];
    x = ritz / ritz.norm();
    if (done) break;
  }
  return {theta, x};
}

template <typename T>
class Engine {
 public:
  using M = Mat<T>;
  using V = Vec<T>;

  Engine(std::vector<MpoSite<T>> mpo, const DmrgConfig& cfg)
      : w_(std::move(mpo)), cfg_(cfg), n_(w_.size()) {
    for (const auto& s : w_) d_.push_back(s.d);
  }

  DmrgResult run() {
    initialize();
    DmrgReport report;
    double previous = std::numeric_limits<double>::infinity();
    double energy = previous;
    for (std::size_t sweep = 1; sweep <= cfg_.sweeps; ++sweep) {
      max_discarded_ = 0.0;
      for (std::size_t k = 0; k + 1 < n_; ++k) energy = optimize(k, k + 2 < n_);
      for (std::size_t k = n_ >= 3 ? n_ - 3 : 0; n_ >= 3; --k) {
        energy = optimize(k, false);
        if (k == 0) break;
      }
      report.sweep_energies.push_back(energy);
      report.sweep_max_discarded.push_back(max_discarded_);
      report.sweeps_run = sweep;
      if (sweep >= cfg_.min_sweeps && std::abs(energy - previous) < cfg_.energy_tol) {
        report.converged = true;
        break;
      }
      previous = energy;
    }
    DmrgResult result;
    result.state = to_mps();
    result.report = std::move(report);
    return result;
  }

 private:
  static double cut_limit(double v) { return std::min(v, 1e9); }

  void initialize() {
    std::mt19937_64 gen(cfg_.seed);
    std::vector<std::size_t> bond(n_ + 1, 1);
    double total = 1.0;
    for (auto d : d_) total *= static_cast<double>(d);
    double left = 1.0;
    for (std::size_t k = 1; k < n_; ++k) {
      left *= static_cast<double>(d_[k - 1]);
      const double cap = cut_limit(std::min(left, total / left));
      bond[k] = std::min({cfg_.initial_bond, cfg_.max_bond, static_cast<std::size_t>(cap)});
    }
    a_.assign(n_, {});
    for (std::size_t k = 0; k < n_; ++k) {
      for (std::size_t s = 0; s < d_[k]; ++s) {
        M m(bond[k], bond[k + 1]);
        for (Eigen::Index j = 0; j < m.cols(); ++j)
          for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = random_scalar<T>(gen);
        a_[k].push_back(std::move(m));
      }
    }
    // right-canonicalize
    for (std::size_t k = n_ - 1; k >= 1; --k) {
      const auto l = a_[k][0].rows(), r = a_[k][0].cols();
      const auto d = static_cast<Eigen::Index>(d_[k]);
      M stacked(l, d * r);
      for (Eigen::Index s = 0; s < d; ++s) stacked.middleCols(s * r, r) = a_[k][s];
      Eigen::HouseholderQR<M> qr(stacked.adjoint());
      const auto kq = std::min(l, d * r);
      const M q = qr.householderQ() * M::Identity(d * r, kq);
      const M rr = qr.matrixQR().topRows(kq).template triangularView<Eigen::Upper>();
      const M qa = q.adjoint();  // kq x d*r
      for (Eigen::Index s = 0; s < d; ++s) a_[k][s] = qa.middleCols(s * r, r);
      const M lf = rr.adjoint();  // l x kq
      for (auto& m : a_[k - 1]) m = m * lf;
    }
    double nrm = 0.0;
    for (const auto& m : a_[0]) nrm += m.squaredNorm();
    for (auto& m : a_[0]) m /= std::sqrt(nrm);

    left_.assign(n_, {});
    right_.assign(n_, {});
    left_[0] = {M::Identity(1, 1)};
    right_[n_ - 1] = {M::Identity(1, 1)};
    for (std::size_t k = n_ - 1; k >= 1; --k) update_right(k);
  }

  // left_[k+1] from left_[k] and site k.
  void update_left(std::size_t k) {
    const auto& site = w_[k];
    const auto& a = a_[k];
    const auto& env = left_[k];
    const std::size_t d = d_[k];
    std::vector<std::vector<M>> t(site.wl);
    for (const auto& e : site.entries) {
      if (!t[e.a].empty()) continue;
      for (std::size_t s = 0; s < d; ++s) t[e.a].push_back(env[e.a] * a[s]);
    }
    const auto chir = a[0].cols();
    std::vector<M> out(site.wr, M::Zero(chir, chir));
    for (std::size_t b = 0; b < site.wr; ++b) {
      for (std::size_t s = 0; s < d; ++s) {
        M z;
        bool any = false;
        for (const auto& e : site.entries) {
          if (e.b != b) continue;
          for (std::size_t sp = 0; sp < d; ++sp) {
            const T c = e.op(s, sp);
            if (c == T(0)) continue;
            if (!any) {
              z = c * t[e.a][sp];
              any = true;
            } else {
              z += c * t[e.a][sp];
            }
          }
        }
        if (any) out[b].noalias() += a[s].adjoint() * z;
      }
    }
    left_[k + 1] = std::move(out);
  }

  // right_[k-1] from right_[k] and site k.
  void update_right(std::size_t k) {
    const auto& site = w_[k];
    const auto& a = a_[k];
    const auto& env = right_[k];
    const std::size_t d = d_[k];
    std::vector<std::vector<M>> t(site.wr);
    for (const auto& e : site.entries) {
      if (!t[e.b].empty()) continue;
      for (std::size_t s = 0; s < d; ++s) t[e.b].push_back(env[e.b] * a[s].transpose());
    }
    const auto chil = a[0].rows();
    std::vector<M> out(site.wl, M::Zero(chil, chil));
    for (std::size_t aa = 0; aa < site.wl; ++aa) {
      for (std::size_t s = 0; s < d; ++s) {
        M z;
        bool any = false;
        for (const auto& e : site.entries) {
          if (e.a != aa) continue;
          for (std::size_t sp = 0; sp < d; ++sp) {
            const T c = e.op(s, sp);
            if (c == T(0)) continue;
            if (!any) {
              z = c * t[e.b][sp];
              any = true;
            } else {
              z += c * t[e.b][sp];
            }
          }
        }
        if (any) out[aa].noalias() += a[s].conjugate() * z;
      }
    }
    right_[k - 1] = std::move(out);
  }

  // Effective two-site Hamiltonian on bond (k, k+1) applied to x.
  V apply_two_site(std::size_t k, const M& lstack, const M& rstack, Eigen::Index chil,
                   Eigen::Index chir, const V& x) const {
    const auto& w1 = w_[k];
    const auto& w2 = w_[k + 1];
    const auto d1 = static_cast<Eigen::Index>(d_[k]);
    const auto d2 = static_cast<Eigen::Index>(d_[k + 1]);
    const auto wm = static_cast<Eigen::Index>(w1.wr);
    const auto wr = static_cast<Eigen::Index>(w2.wr);
    const Eigen::Index d12 = d1 * d2;

    Eigen::Map<const M> theta(x.data(), chil, d12 * chir);
    const M p = lstack * theta;  // (wl*chil) x (d12*chir)

    M q = M::Zero(wm * chil, d12 * chir);
    for (const auto& e : w1.entries) {
      const auto a = static_cast<Eigen::Index>(e.a), b = static_cast<Eigen::Index>(e.b);
      for (Eigen::Index t1 = 0; t1 < d1; ++t1) {
        for (Eigen::Index s1 = 0; s1 < d1; ++s1) {
          const T c = e.op(t1, s1);
          if (c == T(0)) continue;
          q.block(b * chil, t1 * d2 * chir, chil, d2 * chir) +=
              c * p.block(a * chil, s1 * d2 * chir, chil, d2 * chir);
        }
      }
    }

    M u = M::Zero(chil, d12 * wr * chir);
    for (const auto& e : w2.entries) {
      const auto b = static_cast<Eigen::Index>(e.a), c = static_cast<Eigen::Index>(e.b);
      for (Eigen::Index t2 = 0; t2 < d2; ++t2) {
        for (Eigen::Index s2 = 0; s2 < d2; ++s2) {
          const T coef = e.op(t2, s2);
          if (coef == T(0)) continue;
          for (Eigen::Index t1 = 0; t1 < d1; ++t1) {
            u.middleCols(((t1 * d2 + t2) * wr + c) * chir, chir) +=
                coef * q.block(b * chil, (t1 * d2 + s2) * chir, chil, chir);
          }
        }
      }
    }

    V y(x.size());
    Eigen::Map<M> out(y.data(), chil, d12 * chir);
    for (Eigen::Index t = 0; t < d12; ++t) {
      out.middleCols(t * chir, chir).noalias() = u.middleCols(t * wr * chir, wr * chir) * rstack;
    }
    return y;
  }

  double optimize(std::size_t k, bool move_right) {
    const auto d1 = static_cast<Eigen::Index>(d_[k]);
    const auto d2 = static_cast<Eigen::Index>(d_[k + 1]);
    const Eigen::Index chil = a_[k][0].rows();
    const Eigen::Index chir = a_[k + 1][0].cols();
    const auto wl = static_cast<Eigen::Index>(w_[k].wl);
    const auto wr = static_cast<Eigen::Index>(w_[k + 1].wr);

    M lstack(wl * chil, chil);
    for (Eigen::Index a = 0; a < wl; ++a) lstack.middleRows(a * chil, chil) = left_[k][a];
    M rstack(wr * chir, chir);
    for (Eigen::Index c = 0; c < wr; ++c) {
      rstack.middleRows(c * chir, chir) = right_[k + 1][c].transpose();
    }

    V x(d1 * d2 * chil * chir);
    {
      Eigen::Map<M> theta(x.data(), chil, d1 * d2 * chir);
      for (Eigen::Index s1 = 0; s1 < d1; ++s1)
        for (Eigen::Index s2 = 0; s2 < d2; ++s2)
          theta.middleCols((s1 * d2 + s2) * chir, chir) = a_[k][s1] * a_[k + 1][s2];
    }
    if (!(x.norm() > 1e-300)) x.setOnes();

    auto apply = [&](const V& v) { return apply_two_site(k, lstack, rstack, chil, chir, v); };
    auto [energy, vec] = lowest_eigenpair<T>(apply, std::move(x), cfg_);

    // (s1, x) x (s2, y) matrix for the split
    M theta2(d1 * chil, d2 * chir);
    {
      Eigen::Map<const M> theta(vec.data(), chil, d1 * d2 * chir);
      for (Eigen::Index s1 = 0; s1 < d1; ++s1)
        for (Eigen::Index s2 = 0; s2 < d2; ++s2)
          theta2.block(s1 * chil, s2 * chir, chil, chir) =
              theta.middleCols((s1 * d2 + s2) * chir, chir);
    }
    Eigen::BDCSVD<M> svd(theta2, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("dmrg: two-site SVD failed");
    const Eigen::VectorXd& s = svd.singularValues();
    const double total = s.squaredNorm();
    Eigen::Index keep = std::min<Eigen::Index>(s.size(), static_cast<Eigen::Index>(cfg_.max_bond));
    while (keep > 1 && s(keep - 1) <= 1e-14 * s(0)) --keep;
    double discarded = s.tail(s.size() - keep).squaredNorm();
    while (keep > 1) {
      const double next = discarded + s(keep - 1) * s(keep - 1);
      if (next > cfg_.truncation_tol * total) break;
      discarded = next;
      --keep;
    }
    max_discarded_ = std::max(max_discarded_, discarded / total);
    Eigen::VectorXd kept = s.head(keep);
    kept /= kept.norm();

    const M u = svd.matrixU().leftCols(keep);
    const M vh = svd.matrixV().leftCols(keep).adjoint();
    for (Eigen::Index s1 = 0; s1 < d1; ++s1) {
      M blk = u.middleRows(s1 * chil, chil);
      if (!move_right) blk = blk * kept.asDiagonal();
      a_[k][s1] = std::move(blk);
    }
    for (Eigen::Index s2 = 0; s2 < d2; ++s2) {
      M blk = vh.middleCols(s2 * chir, chir);
      if (move_right) blk = kept.asDiagonal() * blk;
      a_[k + 1][s2] = std::move(blk);
    }
    if (move_right) {
      update_left(k);
    } else {
      update_right(k + 1);
    }
    return energy;
  }

  MatrixProductState to_mps() const {
    std::vector<SiteTensor> sites;
    std::size_t largest = 1;
    for (std::size_t k = 0; k < n_; ++k) {
      const auto l = static_cast<std::size_t>(a_[k][0].rows());
      const auto r = static_cast<std::size_t>(a_[k][0].cols());
      DenseTensor t({l, d_[k], r});
      for (std::size_t s = 0; s < d_[k]; ++s)
        for (std::size_t x = 0; x < l; ++x)
          for (std::size_t y = 0; y < r; ++y)
            t({x, s, y}) = cplx(a_[k][s](static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)));
      largest = std::max(largest, r);
      sites.emplace_back(std::move(t));
    }
    return normalize(MatrixProductState(std::move(sites), std::max(largest, cfg_.max_bond), 0));
  }

  std::vector<MpoSite<T>> w_;
  DmrgConfig cfg_;
  std::size_t n_;
  std::vector<std::size_t> d_;
  std::vector<std::vector<M>> a_;
  std::vector<std::vector<M>> left_, right_;
  double max_discarded_ = 0.0;
};

}  // namespace

DmrgResult dmrg_ground_state(const MatrixProductOperator& op, const DmrgConfig& cfg) {
  cfg.validate();
  if (op.num_sites() < 2) throw InvalidParameter("dmrg needs at least two sites");
  DmrgResult result = mpo_is_real(op) ? Engine<double>(convert_mpo<double>(op), cfg).run()
                                      : Engine<cplx>(convert_mpo<cplx>(op), cfg).run();
  result.energy = expectation(result.state, op).real();
  return result;
}

}  // namespace gge
