// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oner {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

// Shared numerical tolerances. Dimensions never exceed 40, so double precision
// leaves several digits of headroom below these.
namespace tol {
inline constexpr double kAlgebraic = 1e-12;
inline constexpr double kEigenResidual = 1e-10;
}  // namespace tol

// Raised when a numerical procedure cannot meet its contract (step underflow,
// trace drift, lost unitarity). The CLI maps it to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Half-integer quantum number stored as twice its value.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  static HalfInt from_double(double v) {
    const double twice = 2.0 * v;
    const double r = std::round(twice);
    if (std::abs(twice - r) > 1e-12) {
      throw std::invalid_argument("not a half-integer: " + std::to_string(v));
    }
    return HalfInt(static_cast<int>(r));
  }
  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr int dim() const { return twice_ + 1; }
  constexpr bool operator==(const HalfInt&) const = default;

 private:
  constexpr explicit HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

struct AngularMomentumOps {
  HalfInt j;
  ComplexMatrix jx, jy, jz, jplus, jminus;

  int dim() const { return j.dim(); }
  // Magnetic quantum number of basis index k (ascending from -j).
  double m(int k) const { return -j.value() + k; }
};

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const Complex z = m.data()[k];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

inline double hermiticity_residual(const ComplexMatrix& m) {
  return max_abs(m - m.adjoint());
}

inline bool is_hermitian(const ComplexMatrix& m, double rel = tol::kAlgebraic) {
  if (m.rows() != m.cols()) return false;
  return hermiticity_residual(m) <= rel * std::max(max_abs(m), 1e-300);
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

inline AngularMomentumOps angular_momentum_ops(HalfInt j) {
  if (j.twice() < 0) throw std::invalid_argument("angular momentum must be non-negative");
  const int n = j.dim();
  const double jj = j.value();
  AngularMomentumOps ops;
  ops.j = j;
  ops.jz = ComplexMatrix::Zero(n, n);
  ops.jplus = ComplexMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double m = -jj + k;
    ops.jz(k, k) = m;
    if (k + 1 < n) ops.jplus(k + 1, k) = std::sqrt(jj * (jj + 1.0) - m * (m + 1.0));
  }
  ops.jminus = ops.jplus.adjoint();
  ops.jx = 0.5 * (ops.jplus + ops.jminus);
  ops.jy = Complex(0.0, -0.5) * (ops.jplus - ops.jminus);
  return ops;
}

inline AngularMomentumOps angular_momentum_ops(double j) {
  return angular_momentum_ops(HalfInt::from_double(j));
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

struct EigenDecomposition {
  RealVector eigenvalues;       // ascending
  ComplexMatrix eigenvectors;   // columns
};

// Fix the global phase of each column so its largest-magnitude entry is real
// and positive. Ties go to the lowest index.
inline void fix_column_phases(ComplexMatrix& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const double a = std::abs(v(r, c));
      if (a > best_abs * (1.0 + 1e-12)) {
        best_abs = a;
        best = r;
      }
    }
    if (best_abs > 0.0) v.col(c) *= std::conj(v(best, c)) / best_abs;
  }
}

inline EigenDecomposition hermitian_eigendecompose(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigendecompose: matrix not square");
  if (!all_finite(m)) throw std::invalid_argument("eigendecompose: non-finite entries");
  if (!is_hermitian(m)) throw std::invalid_argument("eigendecompose: matrix not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecompose: solver did not converge");
  EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  fix_column_phases(out.eigenvectors);
  return out;
}

// Matrix exponential exp(-i H t) of a Hermitian matrix via its spectrum.
inline ComplexMatrix unitary_exp(const ComplexMatrix& h, double t) {
  const auto ed = hermitian_eigendecompose(h);
  ComplexVector phases(ed.eigenvalues.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases(k) = std::exp(-kI * ed.eigenvalues(k) * t);
  return ed.eigenvectors * phases.asDiagonal() * ed.eigenvectors.adjoint();
}

}  // namespace oner
