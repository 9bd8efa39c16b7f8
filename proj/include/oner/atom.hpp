// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "oner/core.hpp"

namespace oner {

// Unit system: hbar = 1, time in us, angular frequencies in rad/us, B in Gauss.
namespace units {
// CODATA 2018, mu_B/h and mu_N/h in MHz/G.
inline constexpr double kBohrMagnetonMHzPerG = 1.39962449361;
inline constexpr double kNuclearMagnetonMHzPerG = 7.6225932291e-4;

constexpr double mhz(double f) { return kTwoPi * f; }
constexpr double khz(double f) { return kTwoPi * f * 1e-3; }
constexpr double to_mhz(double w) { return w / kTwoPi; }
constexpr double to_khz(double w) { return w / kTwoPi * 1e3; }
}  // namespace units

inline double lande_g_ls(int L, int S, int J) {
  if (J == 0) return 0.0;
  const double j = J, s = S, l = L;
  return 1.0 + (j * (j + 1) + s * (s + 1) - l * (l + 1)) / (2.0 * j * (j + 1));
}

struct AtomSpec {
  HalfInt nuclear_spin = HalfInt::from_twice(9);
  int excited_L = 1;
  int excited_S = 1;
  int excited_J = 1;
  double g_J = lande_g_ls(1, 1, 1);
  double g_I = -1.0928;
  double hyperfine_A = units::mhz(-260.0);
  double quadrupole_Q = units::mhz(-35.0);
  double gamma = units::khz(7.48);
  double mu_B = units::mhz(units::kBohrMagnetonMHzPerG);
  double mu_N = units::mhz(units::kNuclearMagnetonMHzPerG);
  double omega0 = 0.0;  // rotating frame reference

  int spin_dim() const { return nuclear_spin.dim(); }
  int dim() const { return 4 * spin_dim(); }

  void validate() const {
    if (nuclear_spin.twice() <= 1) throw std::invalid_argument("nuclear spin must exceed 1/2");
    if (excited_J != 1) throw std::invalid_argument("only a J=1 excited manifold is supported");
    if (gamma < 0.0) throw std::invalid_argument("decay rate must be non-negative");
  }
};

inline AtomSpec strontium87() { return AtomSpec{}; }

enum class Manifold { S, P };

// Product basis |n, m_J, m_I>. Electronic order is [S, P(-1), P(0), P(+1)];
// the nuclear index runs with m_I ascending from -I.
struct BasisState {
  Manifold manifold = Manifold::S;
  int m_J = 0;
  HalfInt m_I;

  int electronic_index() const { return manifold == Manifold::S ? 0 : 2 + m_J; }

  int index(const AtomSpec& spec) const {
    const int spin = (m_I.twice() + spec.nuclear_spin.twice()) / 2;
    if (spin < 0 || spin >= spec.spin_dim() || (m_I.twice() + spec.nuclear_spin.twice()) % 2 != 0) {
      throw std::out_of_range("m_I outside the nuclear multiplet");
    }
    if (manifold == Manifold::S ? m_J != 0 : std::abs(m_J) > 1) throw std::out_of_range("bad m_J");
    return electronic_index() * spec.spin_dim() + spin;
  }

  static BasisState from_index(const AtomSpec& spec, int index) {
    const int n = spec.spin_dim();
    if (index < 0 || index >= spec.dim()) throw std::out_of_range("basis index");
    const int e = index / n;
    const int spin = index % n;
    BasisState s;
    s.manifold = e == 0 ? Manifold::S : Manifold::P;
    s.m_J = e == 0 ? 0 : e - 2;
    s.m_I = HalfInt::from_twice(2 * spin - spec.nuclear_spin.twice());
    return s;
  }
};

inline int ground_index(const AtomSpec& spec, double m_I) {
  return BasisState{Manifold::S, 0, HalfInt::from_double(m_I)}.index(spec);
}
inline int excited_index(const AtomSpec& spec, int m_J, double m_I) {
  return BasisState{Manifold::P, m_J, HalfInt::from_double(m_I)}.index(spec);
}

// Embed an operator on the excited manifold (ordered m_J = -1, 0, +1, each
// spanning the nuclear multiplet) into the full basis.
inline ComplexMatrix embed_excited(const AtomSpec& spec, const ComplexMatrix& block) {
  const int n = spec.spin_dim();
  ComplexMatrix out = ComplexMatrix::Zero(spec.dim(), spec.dim());
  out.block(n, n, 3 * n, 3 * n) = block;
  return out;
}

inline ComplexMatrix excited_projector(const AtomSpec& spec) {
  return embed_excited(spec, ComplexMatrix::Identity(3 * spec.spin_dim(), 3 * spec.spin_dim()));
}

inline ComplexMatrix h_electronic(const AtomSpec& spec, double detuning) {
  return -detuning * excited_projector(spec);
}

inline ComplexMatrix h_zeeman(const AtomSpec& spec, double B) {
  if (B < 0.0) throw std::invalid_argument("magnetic field must be non-negative");
  ComplexMatrix h = ComplexMatrix::Zero(spec.dim(), spec.dim());
  for (int k = 0; k < spec.dim(); ++k) {
    const auto s = BasisState::from_index(spec, k);
    h(k, k) = (spec.g_J * spec.mu_B * s.m_J - spec.g_I * spec.mu_N * s.m_I.value()) * B;
  }
  return h;
}

// Hyperfine block on the excited manifold alone (3(2I+1) square).
inline ComplexMatrix hyperfine_block(const AtomSpec& spec) {
  const auto iop = angular_momentum_ops(spec.nuclear_spin);
  const auto jop = angular_momentum_ops(HalfInt::from_twice(2 * spec.excited_J));
  const ComplexMatrix ij = kron(jop.jx, iop.jx) + kron(jop.jy, iop.jy) + kron(jop.jz, iop.jz);
  const double I = spec.nuclear_spin.value();
  const double J = spec.excited_J;
  const ComplexMatrix id = ComplexMatrix::Identity(ij.rows(), ij.cols());
  const ComplexMatrix quad = 1.5 * ij * (2.0 * ij + id) - I * (I + 1) * J * (J + 1) * id;
  const double denom = 2.0 * I * J * (2.0 * I - 1.0) * (2.0 * J - 1.0);
  ComplexMatrix h = spec.hyperfine_A * ij + (spec.quadrupole_Q / denom) * quad;
  return 0.5 * (h + h.adjoint());
}

inline ComplexMatrix h_hyperfine(const AtomSpec& spec) {
  return embed_excited(spec, hyperfine_block(spec));
}

inline ComplexMatrix atom_hamiltonian(const AtomSpec& spec, double B, double detuning) {
  return h_electronic(spec, detuning) + h_zeeman(spec, B) + h_hyperfine(spec);
}

// Energy of a hyperfine cluster with total angular momentum F at zero field,
// from I.J = K/2 with K = F(F+1) - I(I+1) - J(J+1).
inline double hyperfine_cluster_energy(const AtomSpec& spec, double F) {
  const double I = spec.nuclear_spin.value();
  const double J = spec.excited_J;
  const double ij = 0.5 * (F * (F + 1) - I * (I + 1) - J * (J + 1));
  const double denom = 2.0 * I * J * (2.0 * I - 1.0) * (2.0 * J - 1.0);
  return spec.hyperfine_A * ij + spec.quadrupole_Q * (1.5 * ij * (2.0 * ij + 1.0) - I * (I + 1) * J * (J + 1)) / denom;
}

// ---------------------------------------------------------------------------
// Excited-manifold spectrum versus field.

struct ExcitedLabel {
  int m_J = 0;
  HalfInt m_I;
};

// Label of excited-block basis index k (0 .. 3(2I+1)-1).
inline ExcitedLabel excited_label(const AtomSpec& spec, int k) {
  const int n = spec.spin_dim();
  return {k / n - 1, HalfInt::from_twice(2 * (k % n) - spec.nuclear_spin.twice())};
}

struct ExcitedSpectrum {
  RealVector energies;    // ascending
  ComplexMatrix vectors;  // columns over the excited block basis
};

// Diagonalize the excited block of Zeeman plus hyperfine. The block conserves
// m_J + m_I, so each m_F sector is diagonalized separately; that keeps the
// eigenvectors well defined inside the zero-field F degeneracies.
inline ExcitedSpectrum excited_spectrum(const AtomSpec& spec, double B) {
  const int n = spec.spin_dim();
  const int d = 3 * n;
  const ComplexMatrix full = (h_zeeman(spec, B) + h_hyperfine(spec)).block(n, n, d, d);
  std::vector<double> energies;
  std::vector<ComplexVector> vectors;
  for (int twice_mf = -(spec.nuclear_spin.twice() + 2); twice_mf <= spec.nuclear_spin.twice() + 2; twice_mf += 2) {
    std::vector<int> members;
    for (int k = 0; k < d; ++k) {
      const auto lab = excited_label(spec, k);
      if (2 * lab.m_J + lab.m_I.twice() == twice_mf) members.push_back(k);
    }
    if (members.empty()) continue;
    const int m = static_cast<int>(members.size());
    ComplexMatrix sub(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) sub(a, b) = full(members[a], members[b]);
    const auto ed = hermitian_eigendecompose(sub);
    for (int c = 0; c < m; ++c) {
      ComplexVector v = ComplexVector::Zero(d);
      for (int a = 0; a < m; ++a) v(members[a]) = ed.eigenvectors(a, c);
      energies.push_back(ed.eigenvalues(c));
      vectors.push_back(std::move(v));
    }
  }
  std::vector<int> order(energies.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return energies[a] < energies[b]; });
  ExcitedSpectrum out{RealVector(d), ComplexMatrix(d, d)};
  for (int k = 0; k < d; ++k) {
    out.energies(k) = energies[order[k]];
    out.vectors.col(k) = vectors[order[k]];
  }
  return out;
}

struct BreitRabiPoint {
  double B = 0.0;
  RealVector energies;       // ascending
  ComplexMatrix vectors;     // columns, phase fixed
  std::vector<int> track;    // continuity track id per sorted index
  std::vector<double> match_overlap;  // |<previous|current>|^2 along the track
  std::vector<int> dominant;          // excited-block basis index of the largest component
  std::vector<double> dominant_weight;
};

inline std::vector<BreitRabiPoint> breit_rabi_scan(const AtomSpec& spec, const std::vector<double>& B_grid) {
  if (!std::is_sorted(B_grid.begin(), B_grid.end())) throw std::invalid_argument("B grid must be ascending");
  std::vector<BreitRabiPoint> out;
  out.reserve(B_grid.size());
  for (double B : B_grid) {
    const auto sp = excited_spectrum(spec, B);
    const int d = static_cast<int>(sp.energies.size());
    BreitRabiPoint pt;
    pt.B = B;
    pt.energies = sp.energies;
    pt.vectors = sp.vectors;
    pt.track.assign(d, -1);
    pt.match_overlap.assign(d, 1.0);
    pt.dominant.resize(d);
    pt.dominant_weight.resize(d);
    for (int c = 0; c < d; ++c) {
      Eigen::Index r;
      pt.dominant_weight[c] = pt.vectors.col(c).cwiseAbs2().maxCoeff(&r);
      pt.dominant[c] = static_cast<int>(r);
    }
    if (out.empty()) {
      for (int c = 0; c < d; ++c) pt.track[c] = c;
    } else {
      // Greedy maximal-overlap assignment against the previous point.
      const auto& prev = out.back();
      const Eigen::MatrixXd ov = (prev.vectors.adjoint() * pt.vectors).cwiseAbs2();
      std::vector<bool> used_prev(d, false), used_cur(d, false);
      std::vector<std::tuple<double, int, int>> pairs;
      pairs.reserve(static_cast<size_t>(d) * d);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) pairs.emplace_back(ov(a, b), a, b);
      std::stable_sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });
      for (const auto& [w, a, b] : pairs) {
        if (used_prev[a] || used_cur[b]) continue;
        used_prev[a] = used_cur[b] = true;
        pt.track[b] = prev.track[a];
        pt.match_overlap[b] = w;
        // Keep the sign continuous along the track.
        const Complex phase = prev.vectors.col(a).dot(pt.vectors.col(b));
        if (std::abs(phase) > 0.0) pt.vectors.col(b) *= std::conj(phase) / std::abs(phase);
      }
    }
    out.push_back(std::move(pt));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quadrupole-perturbed nuclear spin.

// First-order energy of |m_I> under -gamma_n B m_I plus an axial NQI Q_zz.
inline double quadrupole_energy_correction(double I, double m_I, double gamma_n_B, double Q_zz) {
  if (std::abs(m_I) > I + 1e-12) throw std::invalid_argument("|m_I| exceeds I");
  return -gamma_n_B * m_I + (1.5 * m_I * m_I - 0.5 * I * (I + 1)) * Q_zz;
}

// Transition energy for m_I - delta_m -> m_I, delta_m in {1, 2}.
inline double corrected_transition_energy(int delta_m, double I, double m_I, double gamma_n_B, double Q_zz) {
  if (std::abs(m_I) > I + 1e-12 || std::abs(m_I - delta_m) > I + 1e-12) throw std::invalid_argument("transition outside the multiplet");
  switch (delta_m) {
    case 1: return -gamma_n_B + 1.5 * (2.0 * m_I - 1.0) * Q_zz;
    case 2: return -2.0 * gamma_n_B + 1.5 * (4.0 * m_I - 4.0) * Q_zz;
    default: throw std::invalid_argument("delta_m must be 1 or 2");
  }
}

struct NqiTensor {
  Eigen::Matrix3d q = Eigen::Matrix3d::Zero();

  double max_abs() const { return q.cwiseAbs().maxCoeff(); }
  bool is_symmetric_traceless(double rel = tol::kAlgebraic) const {
    const double scale = std::max(max_abs(), 1e-300);
    return (q - q.transpose()).cwiseAbs().maxCoeff() <= rel * scale && std::abs(q.trace()) <= rel * scale;
  }
};

// Spin-only Hamiltonian -gamma_n B I_z + sum I_mu Q_mu,nu I_nu.
inline ComplexMatrix nuclear_quadrupole_hamiltonian(HalfInt I, double gamma_n_B, const NqiTensor& nqi) {
  const auto op = angular_momentum_ops(I);
  const std::array<const ComplexMatrix*, 3> ax{&op.jx, &op.jy, &op.jz};
  ComplexMatrix h = -gamma_n_B * op.jz;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) h += nqi.q(a, b) * (*ax[a]) * (*ax[b]);
  return 0.5 * (h + h.adjoint());
}

struct TransitionAmplitudes {
  std::optional<Complex> g_delta1;  // m_I -> m_I - 1
  std::optional<Complex> g_delta2;  // m_I -> m_I - 2
  double alpha = 0.0;
  double beta = 0.0;
};

inline double alpha_coefficient(double I, double m) {
  return 0.5 * std::abs(2.0 * m - 1.0) * std::sqrt(I * (I + 1) - m * (m - 1));
}

inline double beta_coefficient(double I, double m) {
  return 0.25 * std::sqrt(I * (I + 1) - (m - 1) * (m - 2)) * std::sqrt(I * (I + 1) - m * (m - 1));
}

inline TransitionAmplitudes transition_amplitudes(double I, double m_I, const NqiTensor& nqi) {
  TransitionAmplitudes out;
  const auto& q = nqi.q;
  if (m_I - 1.0 >= -I - 1e-12 && m_I <= I + 1e-12) {
    out.alpha = alpha_coefficient(I, m_I);
    out.g_delta1 = out.alpha * Complex(q(0, 2), q(1, 2));
  }
  if (m_I - 2.0 >= -I - 1e-12 && m_I <= I + 1e-12) {
    out.beta = beta_coefficient(I, m_I);
    out.g_delta2 = out.beta * Complex(q(0, 0) - q(1, 1), 2.0 * q(1, 0));
  }
  return out;
}

// Amplitudes of the reverse transitions m_I - 1 -> m_I and m_I - 2 -> m_I.
inline TransitionAmplitudes reverse_transition_amplitudes(double I, double m_I, const NqiTensor& nqi) {
  auto out = transition_amplitudes(I, m_I, nqi);
  if (out.g_delta1) out.g_delta1 = std::conj(*out.g_delta1);
  if (out.g_delta2) out.g_delta2 = std::conj(*out.g_delta2);
  return out;
}

// Electronic NQI operators on the 4-dim space [S, P(-1), P(0), P(+1)]:
// Q/(2I(2I-1)J(2J-1)) * (3/2 {J_mu, J_nu} - delta J^2), zero on S.
inline std::array<std::array<ComplexMatrix, 3>, 3> nqi_operators(const AtomSpec& spec) {
  const auto j = angular_momentum_ops(HalfInt::from_twice(2 * spec.excited_J));
  const std::array<const ComplexMatrix*, 3> ax{&j.jx, &j.jy, &j.jz};
  const double I = spec.nuclear_spin.value();
  const double J = spec.excited_J;
  const double scale = spec.quadrupole_Q / (2.0 * I * (2.0 * I - 1.0) * J * (2.0 * J - 1.0));
  const ComplexMatrix j2 = j.jx * j.jx + j.jy * j.jy + j.jz * j.jz;
  std::array<std::array<ComplexMatrix, 3>, 3> out;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      ComplexMatrix blk = 1.5 * ((*ax[a]) * (*ax[b]) + (*ax[b]) * (*ax[a]));
      if (a == b) blk -= j2;
      ComplexMatrix full = ComplexMatrix::Zero(4, 4);
      full.block(1, 1, 3, 3) = scale * blk;
      out[a][b] = full;
    }
  }
  return out;
}

inline bool is_density_matrix(const ComplexMatrix& rho, double tol = 1e-10) {
  if (rho.rows() != rho.cols() || !all_finite(rho)) return false;
  if (hermiticity_residual(rho) > tol) return false;
  if (std::abs(rho.trace() - Complex(1.0)) > tol) return false;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

// Averaged NQI tensor <Q>_mu,nu = tr(rho_E Q_mu,nu). Heuristic: the reduction
// to an electronic state assumes a product state, which fails for strong
// hyperfine mixing.
inline NqiTensor nqi_from_electronic_state(const AtomSpec& spec, const ComplexMatrix& rho_E) {
  if (rho_E.rows() != 4 || !is_density_matrix(rho_E)) throw std::invalid_argument("rho_E must be a 4x4 density matrix");
  const auto ops = nqi_operators(spec);
  NqiTensor t;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) t.q(a, b) = (rho_E * ops[a][b]).trace().real();
  return t;
}

// Partial trace over the nucleus of a full-basis density matrix.
inline ComplexMatrix reduced_electronic_state(const AtomSpec& spec, const ComplexMatrix& rho) {
  const int n = spec.spin_dim();
  ComplexMatrix out = ComplexMatrix::Zero(4, 4);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) out(a, b) = rho.block(a * n, b * n, n, n).trace();
  return out;
}

}  // namespace oner
