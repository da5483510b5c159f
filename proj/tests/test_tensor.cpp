#include <gtest/gtest.h>

#include <random>

#include "gge/errors.hpp"
#include "gge/tensor.hpp"
#include "testing.hpp"

using gge::cplx;
using gge::DenseTensor;

TEST(Reshape, FlattenPreservesOrder) {
  DenseTensor t({2, 2}, {1.0, 2.0, 3.0, 4.0});
  const auto f = gge::reshape(t, {4});
  EXPECT_EQ(f.dims(), (gge::Extents{4}));
  EXPECT_EQ(std::vector<cplx>(f.data().begin(), f.data().end()), (std::vector<cplx>{1.0, 2.0, 3.0, 4.0}));
}

TEST(Reshape, RoundTripIsIdentity) {
  std::mt19937_64 rng(1);
  DenseTensor t({4}, testing_util::random_vector(rng, 4));
  const auto back = gge::reshape(gge::reshape(t, {2, 2}), {4});
  EXPECT_EQ(std::vector<cplx>(back.data().begin(), back.data().end()),
            std::vector<cplx>(t.data().begin(), t.data().end()));
}

TEST(Reshape, SizeMismatchThrows) {
  DenseTensor t({2, 3});
  EXPECT_THROW(gge::reshape(t, {5}), gge::InvalidShape);
  EXPECT_THROW(DenseTensor({2, 2}, std::vector<cplx>(3)), gge::InvalidShape);
}

TEST(Svd, Identity) {
  const auto f = gge::svd(DenseTensor::identity(2));
  ASSERT_EQ(f.s.size(), 2u);
  EXPECT_NEAR(f.s[0], 1.0, 1e-14);
  EXPECT_NEAR(f.s[1], 1.0, 1e-14);
}

TEST(Svd, DiagonalIsSortedDescending) {
  DenseTensor m({2, 2});
  m({0, 0}) = 3.0;
  m({1, 1}) = 4.0;
  const auto f = gge::svd(m);
  EXPECT_NEAR(f.s[0], 4.0, 1e-14);
  EXPECT_NEAR(f.s[1], 3.0, 1e-14);
}

TEST(Svd, BellMatrix) {
  const auto f = gge::svd((1.0 / std::sqrt(2.0)) * DenseTensor::identity(2));
  EXPECT_NEAR(f.s[0], 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(f.s[1], 1.0 / std::sqrt(2.0), 1e-14);
}

TEST(Svd, RejectsNonMatrix) {
  EXPECT_THROW(gge::svd(DenseTensor({2, 2, 2})), gge::InvalidShape);
}

TEST(Svd, RandomFactorizationInvariants) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t r = dim(rng), c = dim(rng);
    const auto m = testing_util::random_matrix(rng, r, c);
    const auto f = gge::svd(m);
    const auto u = testing_util::to_eigen(f.u);
    const auto vd = testing_util::to_eigen(f.vdag);
    Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(f.s.data(), f.s.size());
    const Eigen::MatrixXcd rec = u * s.cast<cplx>().asDiagonal() * vd;
    const Eigen::MatrixXcd orig = testing_util::to_eigen(m);
    EXPECT_LE((rec - orig).norm(), 1e-10 * orig.norm());
    const auto k = static_cast<Eigen::Index>(f.s.size());
    EXPECT_LE((u.adjoint() * u - Eigen::MatrixXcd::Identity(k, k)).norm(), 1e-10);
    EXPECT_LE((vd * vd.adjoint() - Eigen::MatrixXcd::Identity(k, k)).norm(), 1e-10);
    for (std::size_t i = 0; i < f.s.size(); ++i) {
      EXPECT_GE(f.s[i], 0.0);
      if (i > 0) EXPECT_LE(f.s[i], f.s[i - 1]);
    }
  }
}

TEST(Svd, Deterministic) {
  std::mt19937_64 rng(3);
  const auto m = testing_util::random_matrix(rng, 20, 13);
  const auto a = gge::svd(m), b = gge::svd(m);
  EXPECT_EQ(a.s, b.s);
  EXPECT_TRUE(std::equal(a.u.data().begin(), a.u.data().end(), b.u.data().begin()));
  EXPECT_TRUE(std::equal(a.vdag.data().begin(), a.vdag.data().end(), b.vdag.data().begin()));
}

TEST(Svd, EckartYoungAgainstRandomSubspaces) {
  std::mt19937_64 rng(4);
  const auto m = testing_util::random_matrix(rng, 16, 16);
  const Eigen::MatrixXcd em = testing_util::to_eigen(m);
  for (std::size_t k = 1; k <= 16; ++k) {
    const auto f = gge::truncated_svd(m, k);
    Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(f.s.data(), f.s.size());
    const Eigen::MatrixXcd rec =
        testing_util::to_eigen(f.u) * s.cast<cplx>().asDiagonal() * testing_util::to_eigen(f.vdag);
    const double best = (em - rec).norm();
    EXPECT_NEAR(best * best, f.discarded_weight, 1e-9);
    for (int trial = 0; trial < 100; ++trial) {
      // Best rank-k approximation within a random column space: projection.
      const Eigen::MatrixXcd a = testing_util::to_eigen(testing_util::random_matrix(rng, 16, k));
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
      const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(16, static_cast<Eigen::Index>(k));
      const double err = (em - q * (q.adjoint() * em)).norm();
      EXPECT_LE(best, err + 1e-12);
    }
  }
}

TEST(Svd, TruncationKeepsAtLeastOneValue) {
  const auto f = gge::truncated_svd(DenseTensor({3, 3}), 2);
  EXPECT_EQ(f.s.size(), 1u);
  std::mt19937_64 rng(5);
  const auto g = gge::truncated_svd(testing_util::random_matrix(rng, 6, 5), 3);
  EXPECT_EQ(g.s.size(), 3u);
  EXPECT_EQ(g.u.dims(), (gge::Extents{6, 3}));
  EXPECT_EQ(g.vdag.dims(), (gge::Extents{3, 5}));
}

TEST(Svd, RankUsesRelativeZeroTolerance) {
  DenseTensor m({3, 3});
  m({0, 0}) = 1.0;
  m({1, 1}) = 1e-15;
  EXPECT_EQ(gge::svd(m).rank(), 1u);
}

TEST(Contract, MatrixVector) {
  std::mt19937_64 rng(6);
  const auto a = testing_util::random_matrix(rng, 4, 3);
  DenseTensor v({3}, testing_util::random_vector(rng, 3));
  const auto r = gge::contract(a, v, {{1, 0}});
  ASSERT_EQ(r.dims(), (gge::Extents{4}));
  const Eigen::VectorXcd ev = Eigen::Map<const Eigen::VectorXcd>(v.data().data(), 3);
  const Eigen::VectorXcd expect = testing_util::to_eigen(a) * ev;
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_LT(std::abs(r.data()[i] - expect(i)), 1e-13);
}

TEST(Contract, IdentityIsIdentityMap) {
  std::mt19937_64 rng(7);
  DenseTensor t({2, 3, 4}, testing_util::random_vector(rng, 24));
  const auto r = gge::contract(t, DenseTensor::identity(3), {{1, 0}});
  // unpaired axes of t (0, 2) then of the identity (1)
  const auto expect = gge::permute(t, {0, 2, 1});
  ASSERT_EQ(r.dims(), expect.dims());
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_LT(std::abs(r.data()[i] - expect.data()[i]), 1e-14);
}

TEST(Contract, NormOfNormalizedVector) {
  std::mt19937_64 rng(8);
  auto data = testing_util::random_vector(rng, 10);
  DenseTensor v({10}, data);
  v *= 1.0 / gge::frobenius_norm(v);
  const auto r = gge::contract(gge::conj(v), v, {{0, 0}});
  EXPECT_TRUE(r.dims().empty());
  EXPECT_NEAR(r.data()[0].real(), 1.0, 1e-14);
  EXPECT_NEAR(r.data()[0].imag(), 0.0, 1e-14);
}

TEST(Contract, Bilinear) {
  std::mt19937_64 rng(9);
  DenseTensor a({3, 4, 2}, testing_util::random_vector(rng, 24));
  DenseTensor b({2, 5, 4}, testing_util::random_vector(rng, 40));
  const cplx alpha(0.3, -1.7);
  const auto lhs = gge::contract(alpha * a, b, {{1, 2}, {2, 0}});
  const auto rhs = alpha * gge::contract(a, b, {{1, 2}, {2, 0}});
  ASSERT_EQ(lhs.dims(), (gge::Extents{3, 5}));
  for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_LT(std::abs(lhs.data()[i] - rhs.data()[i]), 1e-12);
}

TEST(Contract, ExtentMismatchThrows) {
  EXPECT_THROW(gge::contract(DenseTensor({2, 3}), DenseTensor({4, 2}), {{1, 0}}), gge::InvalidShape);
}

TEST(Permute, InverseRoundTrip) {
  std::mt19937_64 rng(10);
  DenseTensor t({2, 3, 4, 5}, testing_util::random_vector(rng, 120));
  const auto p = gge::permute(t, {2, 0, 3, 1});
  EXPECT_EQ(p.dims(), (gge::Extents{4, 2, 5, 3}));
  EXPECT_EQ(p({1, 0, 4, 2}), t({0, 2, 1, 4}));
  const auto back = gge::permute(p, {1, 3, 0, 2});
  EXPECT_TRUE(std::equal(back.data().begin(), back.data().end(), t.data().begin()));
}
