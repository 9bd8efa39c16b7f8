// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include <gtest/gtest.h>

#include "oner/core.hpp"

namespace oner {
namespace {

ComplexMatrix random_hermitian(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  ComplexMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

TEST(HalfInt, RejectsNonHalfInteger) {
  EXPECT_THROW(HalfInt::from_double(0.3), std::invalid_argument);
  EXPECT_EQ(HalfInt::from_double(4.5).twice(), 9);
  EXPECT_EQ(HalfInt::from_double(4.5).dim(), 10);
}

TEST(AngularMomentum, SpinHalfJz) {
  const auto op = angular_momentum_ops(0.5);
  EXPECT_EQ(op.jz(0, 0), Complex(-0.5));
  EXPECT_EQ(op.jz(1, 1), Complex(0.5));
  EXPECT_EQ(op.jz(0, 1), Complex(0.0));
}

TEST(AngularMomentum, SpinOneRaisingEntry) {
  const auto op = angular_momentum_ops(1.0);
  // <0|J+|-1> = sqrt(1*2 - (-1)*0)
  EXPECT_NEAR(op.jplus(1, 0).real(), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(op.jplus(2, 1).real(), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(op.jplus(0, 1), Complex(0.0));
}

TEST(AngularMomentum, NineHalvesDimensionAndSpectrum) {
  const auto op = angular_momentum_ops(4.5);
  ASSERT_EQ(op.jz.rows(), 10);
  for (int k = 0; k < 10; ++k) EXPECT_DOUBLE_EQ(op.jz(k, k).real(), -4.5 + k);
}

class AngularMomentumAlgebra : public ::testing::TestWithParam<int> {};

TEST_P(AngularMomentumAlgebra, CommutatorsAndCasimir) {
  const auto op = angular_momentum_ops(HalfInt::from_twice(GetParam()));
  const double j = op.j.value();
  EXPECT_LE(max_abs(commutator(op.jx, op.jy) - kI * op.jz), 1e-12);
  EXPECT_LE(max_abs(commutator(op.jy, op.jz) - kI * op.jx), 1e-12);
  EXPECT_LE(max_abs(commutator(op.jz, op.jx) - kI * op.jy), 1e-12);
  const ComplexMatrix c = op.jx * op.jx + op.jy * op.jy + op.jz * op.jz;
  EXPECT_LE(max_abs(c - j * (j + 1) * ComplexMatrix::Identity(op.dim(), op.dim())), 1e-12);
  EXPECT_TRUE(is_hermitian(op.jx));
  EXPECT_TRUE(is_hermitian(op.jy));
}

INSTANTIATE_TEST_SUITE_P(TwiceJ, AngularMomentumAlgebra, ::testing::Range(0, 12));

TEST(Kron, IdentityProjectorAndShape) {
  EXPECT_EQ(kron(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(3, 3)), ComplexMatrix::Identity(6, 6));

  ComplexMatrix p = ComplexMatrix::Zero(2, 2);
  p(0, 0) = 1.0;
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = Complex(2.0, 1.0);
  d(1, 1) = -3.0;
  ComplexMatrix expect = ComplexMatrix::Zero(4, 4);
  expect(0, 0) = d(0, 0);
  expect(1, 1) = d(1, 1);
  EXPECT_EQ(kron(p, d), expect);

  const auto k = kron(ComplexMatrix::Ones(2, 2), ComplexMatrix::Ones(10, 10));
  EXPECT_EQ(k.rows(), 20);
  EXPECT_EQ(k.cols(), 20);
}

TEST(Kron, MixedProductProperty) {
  const auto a = random_hermitian(3, 1), b = random_hermitian(4, 2), c = random_hermitian(3, 3), d = random_hermitian(4, 4);
  EXPECT_LE(max_abs(kron(a, b) * kron(c, d) - kron(a * c, b * d)), 1e-12 * max_abs(kron(a * c, b * d)) * 10);
}

TEST(Eigen, DiagonalAndPauliX) {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 0) = 3.0;
  d(1, 1) = 1.0;
  d(2, 2) = 2.0;
  const auto e = hermitian_eigendecompose(d);
  EXPECT_DOUBLE_EQ(e.eigenvalues(0), 1.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues(1), 2.0);
  EXPECT_DOUBLE_EQ(e.eigenvalues(2), 3.0);

  ComplexMatrix sx = ComplexMatrix::Zero(2, 2);
  sx(0, 1) = sx(1, 0) = 1.0;
  const auto s = hermitian_eigendecompose(sx);
  EXPECT_NEAR(s.eigenvalues(0), -1.0, 1e-15);
  EXPECT_NEAR(s.eigenvalues(1), 1.0, 1e-15);
}

TEST(Eigen, RandomReconstruction) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const auto m = random_hermitian(40, seed);
    const auto e = hermitian_eigendecompose(m);
    const ComplexMatrix rec = e.eigenvectors * e.eigenvalues.cast<Complex>().asDiagonal() * e.eigenvectors.adjoint();
    EXPECT_LE(max_abs(rec - m), 1e-10);
    EXPECT_LE(max_abs(e.eigenvectors.adjoint() * e.eigenvectors - ComplexMatrix::Identity(40, 40)), 1e-10);
    for (int k = 1; k < 40; ++k) EXPECT_LE(e.eigenvalues(k - 1), e.eigenvalues(k));
  }
}

TEST(Eigen, PhaseConventionIsDeterministic) {
  const auto m = random_hermitian(12, 7);
  const auto a = hermitian_eigendecompose(m), b = hermitian_eigendecompose(m);
  EXPECT_EQ(a.eigenvectors, b.eigenvectors);
  for (int c = 0; c < 12; ++c) {
    Eigen::Index r;
    a.eigenvectors.col(c).cwiseAbs().maxCoeff(&r);
    EXPECT_NEAR(a.eigenvectors(r, c).imag(), 0.0, 1e-14);
    EXPECT_GT(a.eigenvectors(r, c).real(), 0.0);
  }
}

TEST(Eigen, RejectsBadInput) {
  ComplexMatrix nh = ComplexMatrix::Zero(2, 2);
  nh(0, 1) = 1.0;
  EXPECT_THROW(hermitian_eigendecompose(nh), std::invalid_argument);
  EXPECT_THROW(hermitian_eigendecompose(ComplexMatrix::Zero(2, 3)), std::invalid_argument);
  ComplexMatrix bad = ComplexMatrix::Identity(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(hermitian_eigendecompose(bad), std::invalid_argument);
}

TEST(UnitaryExp, IsUnitaryAndMatchesGroupLaw) {
  const auto h = random_hermitian(8, 11);
  const auto u1 = unitary_exp(h, 0.3), u2 = unitary_exp(h, 0.6);
  EXPECT_LE(max_abs(u1.adjoint() * u1 - ComplexMatrix::Identity(8, 8)), 1e-12);
  EXPECT_LE(max_abs(u1 * u1 - u2), 1e-12);
}

}  // namespace
}  // namespace oner
