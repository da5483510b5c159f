#include <gtest/gtest.h>

#include <random>

#include "gge/errors.hpp"
#include "gge/hamiltonians.hpp"
#include "gge/mps.hpp"
#include "gge/solvers.hpp"
#include "testing.hpp"

using gge::cplx;
using gge::DenseState;
using gge::Extents;
using testing_util::fidelity;

namespace {

DenseState ghz(std::size_t n) {
  std::vector<cplx> a(std::size_t{1} << n, 0.0);
  a.front() = a.back() = 1.0 / std::sqrt(2.0);
  return DenseState(Extents(n, 2), a);
}

double mps_fidelity(const DenseState& psi, const gge::MatrixProductState& m) {
  return std::norm(gge::overlap(psi, m)) / gge::norm(m) / gge::norm(m);
}

// Bond extent never exceeds min(chi, D_left, D_right).
void expect_bond_bounds(const gge::MatrixProductState& m, std::size_t chi) {
  const auto dims = m.site_dims();
  const auto bonds = m.bond_dims();
  double left = 1.0, total = 1.0;
  for (auto d : dims) total *= static_cast<double>(d);
  for (std::size_t k = 0; k < bonds.size(); ++k) {
    left *= static_cast<double>(dims[k]);
    EXPECT_LE(bonds[k], chi);
    EXPECT_LE(static_cast<double>(bonds[k]), std::min(left, total / left));
  }
}

}  // namespace

TEST(Compress, ProductStateAtChiOne) {
  const auto psi = DenseState::product({{1.0, 2.0}, {0.5, cplx(0, 1)}, {1.0, 0.0, 1.0}});
  const auto m = gge::compress(psi, 1);
  for (auto b : m.bond_dims()) EXPECT_EQ(b, 1u);
  EXPECT_NEAR(mps_fidelity(psi, m), 1.0, 1e-12);
}

TEST(Compress, GhzExactAtChiTwo) {
  const auto psi = ghz(4);
  const auto m = gge::compress(psi, 2);
  EXPECT_NEAR(mps_fidelity(psi, m), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(psi, gge::to_dense(m)), 1.0, 1e-12);
}

TEST(Compress, SingleCutSchmidtOracle) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> dim(2, 6);
  for (int trial = 0; trial < 30; ++trial) {
    const Extents dims{dim(rng), dim(rng)};
    const auto psi = testing_util::random_state(rng, dims);
    const auto w = testing_util::schmidt_weights(psi, 1);
    double kept = 0.0;
    for (std::size_t chi = 1; chi <= std::min(dims[0], dims[1]); ++chi) {
      kept += w(static_cast<Eigen::Index>(chi - 1));
      EXPECT_NEAR(mps_fidelity(psi, gge::compress(psi, chi)), kept, 1e-12);
    }
  }
}

TEST(Compress, RejectsChiZero) {
  EXPECT_THROW(gge::compress(ghz(3), 0), gge::InvalidParameter);
  const auto m = gge::exact_mps(ghz(3));
  EXPECT_THROW(gge::truncate(m, 0), gge::InvalidParameter);
}

TEST(Compress, BondBoundsOnMixedDims) {
  std::mt19937_64 rng(22);
  const Extents dims{2, 3, 3, 2, 3, 2};
  const auto psi = testing_util::random_state(rng, dims);
  for (std::size_t chi = 1; chi <= 10; ++chi) expect_bond_bounds(gge::compress(psi, chi), chi);
}

TEST(Compress, MonotoneFidelityHierarchyMixedDims) {
  std::mt19937_64 rng(23);
  const Extents dims{2, 3, 2, 3, 2, 2, 3, 2};
  std::size_t max_cut = 1;
  {
    double left = 1.0, total = 1.0;
    for (auto d : dims) total *= static_cast<double>(d);
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
      left *= static_cast<double>(dims[k]);
      max_cut = std::max(max_cut, static_cast<std::size_t>(std::min(left, total / left)));
    }
  }
  for (int trial = 0; trial < 5; ++trial) {
    const auto psi = testing_util::random_state(rng, dims);
    double prev = 0.0;
    for (std::size_t chi = 1; chi <= max_cut; ++chi) {
      const double f = mps_fidelity(psi, gge::compress(psi, chi));
      EXPECT_GE(f, prev - 1e-12);
      prev = f;
    }
    EXPECT_NEAR(prev, 1.0, 1e-12);
  }
}

TEST(ToDense, RoundTripUntruncated) {
  std::mt19937_64 rng(24);
  const auto psi = testing_util::random_state(rng, {3, 2, 2, 3});
  EXPECT_NEAR(fidelity(psi, gge::to_dense(gge::exact_mps(psi))), 1.0, 1e-12);
}

TEST(ToDense, SingleSite) {
  gge::DenseTensor t({1, 3, 1}, {1.0, cplx(0, 2), 3.0});
  const gge::MatrixProductState m({gge::SiteTensor(t)}, 1);
  const auto d = gge::to_dense(m);
  EXPECT_EQ(std::vector<cplx>(d.amplitudes().begin(), d.amplitudes().end()),
            (std::vector<cplx>{1.0, cplx(0, 2), 3.0}));
}

TEST(ToDense, AkltIsNormalized) {
  EXPECT_NEAR(gge::to_dense(gge::aklt_exact_mps(4)).norm(), 1.0, 1e-12);
}

TEST(ToDense, CapThrowsResourceError) {
  const auto m = gge::product_mps(std::vector<std::vector<cplx>>(12, {1.0, 0.0}));
  EXPECT_THROW(gge::to_dense(m, 1000), gge::ResourceError);
}

TEST(Overlap, SelfAndOrthogonal) {
  std::mt19937_64 rng(25);
  const auto psi = testing_util::random_state(rng, {2, 2, 2});
  EXPECT_NEAR(std::abs(gge::overlap(psi, psi)), 1.0, 1e-14);
  const std::size_t c0[] = {0, 1, 0}, c1[] = {1, 1, 0};
  EXPECT_EQ(gge::overlap(DenseState::basis({2, 2, 2}, c0), DenseState::basis({2, 2, 2}, c1)), cplx(0.0));
  EXPECT_THROW(gge::overlap(psi, testing_util::random_state(rng, {2, 4})), gge::InvalidShape);
}

TEST(Overlap, MpsMpsMatchesDense) {
  std::mt19937_64 rng(26);
  const Extents dims{2, 3, 2, 2, 3};
  const auto a = testing_util::random_state(rng, dims), b = testing_util::random_state(rng, dims);
  const auto ma = gge::compress(a, 3), mb = gge::compress(b, 2);
  const cplx dense = gge::overlap(gge::to_dense(ma), gge::to_dense(mb));
  EXPECT_LT(std::abs(gge::overlap(ma, mb) - dense), 1e-12);
  EXPECT_LT(std::abs(gge::overlap(ma, gge::to_dense(mb)) - dense), 1e-12);
  EXPECT_LT(std::abs(gge::overlap(gge::to_dense(ma), mb) - dense), 1e-12);
}

TEST(Overlap, NonDecreasingInChi) {
  std::mt19937_64 rng(27);
  const auto psi = testing_util::random_state(rng, Extents(8, 2));
  double prev = 0.0;
  for (std::size_t chi = 1; chi <= 16; ++chi) {
    const double a = std::abs(gge::overlap(psi, gge::compress(psi, chi)));
    EXPECT_GE(a, prev - 1e-12);
    prev = a;
  }
}

TEST(Canonicalize, PreservesStateAndOrthogonality) {
  std::mt19937_64 rng(28);
  const Extents dims{2, 3, 2, 3, 2};
  const auto psi = testing_util::random_state(rng, dims);
  const auto m = gge::compress(psi, 4);
  const auto before = gge::to_dense(m);
  for (std::size_t center = 0; center < dims.size(); ++center) {
    const auto c = gge::canonicalize(m, center);
    EXPECT_EQ(c.canonical_center(), center);
    EXPECT_GE(fidelity(before, gge::to_dense(c)), 1.0 - 1e-10);
    for (std::size_t k = 0; k < dims.size(); ++k) {
      const auto& t = c.site(k).tensor();
      const std::size_t l = t.dim(0), d = t.dim(1), r = t.dim(2);
      if (k < center) {
        // sum over (left, phys) of conj(A) A = identity on the right bond
        const auto g = gge::contract(gge::conj(t), t, {{0, 0}, {1, 1}});
        EXPECT_LE((testing_util::to_eigen(g) - Eigen::MatrixXcd::Identity(r, r)).norm(), 1e-10);
      } else if (k > center) {
        const auto g = gge::contract(gge::conj(t), t, {{1, 1}, {2, 2}});
        EXPECT_LE((testing_util::to_eigen(g) - Eigen::MatrixXcd::Identity(l, l)).norm(), 1e-10);
      }
      (void)d;
    }
  }
}

TEST(Canonicalize, Idempotent) {
  std::mt19937_64 rng(29);
  const auto m = gge::compress(testing_util::random_state(rng, {2, 2, 3, 2, 2}), 3);
  const auto once = gge::canonicalize(m, 2);
  const auto twice = gge::canonicalize(once, 2);
  for (std::size_t k = 0; k < once.num_sites(); ++k) {
    const auto& a = once.site(k).tensor();
    const auto& b = twice.site(k).tensor();
    ASSERT_EQ(a.dims(), b.dims());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LT(std::abs(a.data()[i] - b.data()[i]), 1e-12);
  }
}

TEST(Canonicalize, GaugeInvariance) {
  std::mt19937_64 rng(30);
  const auto psi = testing_util::random_state(rng, {2, 3, 2, 2});
  const auto m = gge::exact_mps(psi);
  // Insert X X^-1 on bond 1.
  auto sites = m.sites();
  const std::size_t b = sites[1].right_dim();
  Eigen::MatrixXcd x = testing_util::to_eigen(testing_util::random_matrix(rng, b, b));
  x += 3.0 * Eigen::MatrixXcd::Identity(b, b);
  const Eigen::MatrixXcd xi = x.inverse();
  auto left = gge::contract(sites[1].tensor(), gge::DenseTensor::from_matrix(x), {{2, 0}});
  auto right = gge::contract(gge::DenseTensor::from_matrix(xi), sites[2].tensor(), {{1, 0}});
  sites[1] = gge::SiteTensor(left);
  sites[2] = gge::SiteTensor(right);
  const gge::MatrixProductState gauged(sites, m.max_bond());
  const auto c = gge::canonicalize(gauged, 0);
  const auto d = gge::to_dense(c);
  const auto e = testing_util::to_eigen(d) - testing_util::to_eigen(psi);
  EXPECT_LE(e.norm(), 1e-10);
}

TEST(Truncate, NoOpAtCurrentBond) {
  std::mt19937_64 rng(31);
  const auto psi = testing_util::random_state(rng, Extents(6, 2));
  const auto m = gge::compress(psi, 3);
  const auto t = gge::truncate(m, m.largest_bond());
  EXPECT_NEAR(fidelity(gge::to_dense(m), gge::to_dense(t)), 1.0, 1e-12);
}

TEST(Truncate, AgreesWithCompressAtChiOne) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const auto psi = testing_util::random_state(rng, Extents(6, 2));
    const double a = mps_fidelity(psi, gge::truncate(gge::exact_mps(psi), 1));
    const double b = mps_fidelity(psi, gge::compress(psi, 1));
    EXPECT_NEAR(a, b, 1e-8);
  }
}

TEST(Truncate, GhzToProduct) {
  const auto psi = ghz(5);
  EXPECT_NEAR(mps_fidelity(psi, gge::truncate(gge::exact_mps(psi), 1)), 0.5, 1e-12);
}

TEST(Refine, NeverLowersFidelity) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 5; ++trial) {
    const auto psi = testing_util::random_state(rng, Extents(7, 2));
    const auto target = gge::exact_mps(psi);
    for (std::size_t chi : {1, 2, 3}) {
      const auto base = gge::compress(psi, chi);
      const auto better = gge::refine(target, base, 4);
      EXPECT_GE(mps_fidelity(psi, better), mps_fidelity(psi, base) - 1e-12);
      EXPECT_NEAR(gge::norm(better), 1.0, 1e-10);
      EXPECT_EQ(better.bond_dims(), base.bond_dims());
    }
  }
}

TEST(ApplyMpo, IdentityMpo) {
  std::mt19937_64 rng(34);
  const auto psi = testing_util::random_state(rng, {2, 3, 2});
  const auto m = gge::exact_mps(psi);
  const Extents dims{2, 3, 2};
  std::vector<gge::DenseTensor> ops;
  for (auto d : dims) ops.push_back(gge::DenseTensor::identity(d));
  // sum of identities = 3 * identity
  const auto r = gge::apply_mpo(gge::sum_of_onsite_mpo(dims, ops), m);
  const Eigen::VectorXcd v = testing_util::to_eigen(gge::to_dense(r));
  EXPECT_LE((v - 3.0 * testing_util::to_eigen(psi)).norm(), 1e-12);
}

TEST(ApplyMpo, MatchesDenseExpectation) {
  std::mt19937_64 rng(35);
  const auto spec = gge::j1j2(6, 1.0, 0.3);
  const auto h = testing_util::to_eigen(gge::to_dense_matrix(spec));
  const auto mpo = gge::to_mpo(spec);
  for (int trial = 0; trial < 5; ++trial) {
    const auto psi = testing_util::random_state(rng, Extents(6, 2));
    const auto m = gge::exact_mps(psi);
    const Eigen::VectorXcd v = testing_util::to_eigen(psi);
    const cplx dense = v.dot(h * v);
    EXPECT_LT(std::abs(gge::overlap(m, gge::apply_mpo(mpo, m)) - dense), 1e-8);
    EXPECT_LT(std::abs(gge::expectation(m, mpo) - dense), 1e-10);
  }
}

TEST(ApplyMpo, TotalSzOnAllUp) {
  const std::size_t n = 5;
  const Extents dims(n, 3);
  const auto ops = std::vector<gge::DenseTensor>(n, gge::spin_operators(3).sz);
  const auto up = gge::product_mps(std::vector<std::vector<cplx>>(n, {1.0, 0.0, 0.0}));
  const auto r = gge::apply_mpo(gge::sum_of_onsite_mpo(dims, ops), up);
  const Eigen::VectorXcd v = testing_util::to_eigen(gge::to_dense(r));
  const Eigen::VectorXcd u = testing_util::to_eigen(gge::to_dense(up));
  EXPECT_LE((v - 5.0 * u).norm(), 1e-12);
}

TEST(Correlation, MatchesDense) {
  std::mt19937_64 rng(36);
  const auto psi = testing_util::random_state(rng, {2, 3, 3, 2});
  const auto m = gge::exact_mps(psi);
  const auto s3 = gge::spin_operators(3);
  const auto s2 = gge::spin_operators(2);
  // <Sz_1 Sx_3>
  Eigen::MatrixXcd op = testing_util::kron(
      testing_util::kron(testing_util::kron(Eigen::MatrixXcd::Identity(2, 2), testing_util::to_eigen(s3.sz)),
                         Eigen::MatrixXcd::Identity(3, 3)),
      testing_util::to_eigen(s2.sx));
  const Eigen::VectorXcd v = testing_util::to_eigen(psi);
  EXPECT_LT(std::abs(gge::correlation(m, s3.sz, 1, s2.sx, 3) - v.dot(op * v)), 1e-12);
}

TEST(MatrixProductState, RejectsBadChains) {
  gge::DenseTensor a({1, 2, 2}), b({3, 2, 1});
  EXPECT_THROW(gge::MatrixProductState({gge::SiteTensor(a), gge::SiteTensor(b)}, 4), gge::InvalidShape);
  gge::DenseTensor c({2, 2, 1});
  EXPECT_THROW(gge::MatrixProductState({gge::SiteTensor(a), gge::SiteTensor(c)}, 1), gge::InvalidShape);
  EXPECT_THROW(gge::SiteTensor(gge::DenseTensor({2, 2})), gge::InvalidShape);
}
