// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "oner/core.hpp"
#include "oner/drive.hpp"
#include "oner/dynamics.hpp"
#include "oner/integrator.hpp"

namespace oner {

// Unitarity residual above which a propagator is rejected outright.
inline constexpr double kUnitarityAbort = 1e-6;

inline double unitarity_residual(const ComplexMatrix& u) {
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
}

struct PropagatorOptions {
  // Unitarity to 1e-8 needs this; 1e-10 only reaches a few 1e-7.
  IntegratorOptions integrator{.rtol = 1e-12, .atol = 1e-14};
  // Restrict to the blocks containing these states; empty means all. Columns
  // of other blocks are left as zero.
  std::vector<int> only_blocks_with;
};

// Closed-system time-ordered propagator U(t, 0), obtained by integrating the
// identity block by block. Decay is excluded.
inline ComplexMatrix propagator(const DriveModel& model, double t, const PropagatorOptions& opt = {},
                                IntegratorStats* stats = nullptr) {
  const int d = model.spec.dim();
  if (!(t >= 0.0)) throw std::invalid_argument("propagator: time must be non-negative");
  ComplexMatrix u = ComplexMatrix::Zero(d, d);
  if (t == 0.0) return ComplexMatrix::Identity(d, d);
  for (const auto& states : coupled_blocks(model)) {
    if (!opt.only_blocks_with.empty() &&
        std::none_of(states.begin(), states.end(), [&](int s) {
          return std::find(opt.only_blocks_with.begin(), opt.only_blocks_with.end(), s) != opt.only_blocks_with.end();
        }))
      continue;
    const auto m = static_cast<Eigen::Index>(states.size());
    const NonzeroView a(-kI * block_of(model.h_static, states)), v(-kI * block_of(model.coupling, states));
    auto rhs = [&](double s, const ComplexMatrix& y, ComplexMatrix& dy) {
      a.apply(y, dy);
      v.apply(y, dy, model.envelope(s), true);
    };
    ComplexMatrix y = ComplexMatrix::Identity(m, m);
    const auto st = integrate(rhs, y, 0.0, std::vector<double>{t}, [](double, const ComplexMatrix&) {}, opt.integrator);
    if (stats) {
      stats->accepted += st.accepted;
      stats->rejected += st.rejected;
      stats->evaluations += st.evaluations;
    }
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) u(states[i], states[j]) = y(i, j);
  }
  return u;
}

// True when H(t) is real symmetric and H(T - t) = H(t). Then
// U(T) = U(T/2)^T U(T/2), which halves the work and the accumulated error.
inline bool time_reversal_symmetric(const DriveModel& model) {
  const double tol = 1e-14 * std::max(max_abs(model.h_static), max_abs(model.coupling));
  const auto is_real_sym = [&](const ComplexMatrix& m) {
    return m.imag().cwiseAbs().maxCoeff() <= tol && max_abs(m - m.transpose()) <= tol;
  };
  return std::abs(std::remainder(model.config.envelope_phase, kPi)) <= 1e-12 && is_real_sym(model.h_static) &&
         is_real_sym(model.coupling);
}

inline ComplexMatrix one_period_propagator(const DriveModel& model, const PropagatorOptions& opt = {}) {
  ComplexMatrix u;
  if (time_reversal_symmetric(model)) {
    const ComplexMatrix half = propagator(model, 0.5 * model.config.T, opt);
    u = half.transpose() * half;
  } else {
    u = propagator(model, model.config.T, opt);
  }
  if (opt.only_blocks_with.empty()) {
    const double r = unitarity_residual(u);
    if (r > kUnitarityAbort) throw NumericalError("one-period propagator lost unitarity: " + std::to_string(r));
  }
  return u;
}

struct FloquetModes {
  ComplexMatrix modes;         // orthonormal columns
  RealVector quasi_energies;   // in (-pi/T, pi/T], ascending
  ComplexVector eigenvalues;   // exp(-i eps T)
};

// Eigen-decomposition of a unitary one-period propagator. The complex Schur
// form of a normal matrix is diagonal, so its Schur vectors are orthonormal
// eigenvectors even inside degenerate subspaces.
inline FloquetModes floquet_modes(const ComplexMatrix& u, double T) {
  if (u.rows() != u.cols()) throw std::invalid_argument("floquet_modes: matrix not square");
  if (!(T > 0.0)) throw std::invalid_argument("floquet_modes: period must be positive");
  Eigen::ComplexSchur<ComplexMatrix> schur(u);
  if (schur.info() != Eigen::Success) throw NumericalError("floquet_modes: Schur decomposition failed");
  const ComplexMatrix& tri = schur.matrixT();
  const ComplexMatrix& q = schur.matrixU();
  const auto n = u.rows();
  std::vector<double> eps(static_cast<size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    double e = -std::arg(tri(k, k)) / T;  // arg in (-pi, pi]
    if (e <= -kPi / T) e += kTwoPi / T;
    eps[k] = e;
  }
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return eps[a] < eps[b]; });
  FloquetModes out;
  out.modes.resize(n, n);
  out.quasi_energies.resize(n);
  out.eigenvalues.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.modes.col(k) = q.col(order[k]);
    out.quasi_energies(k) = eps[order[k]];
    out.eigenvalues(k) = tri(order[k], order[k]) / std::abs(tri(order[k], order[k]));
  }
  fix_column_phases(out.modes);
  return out;
}

// U(T)^s through the first-zone quasi-energies; s = 1 reproduces U(T).
inline ComplexMatrix fractional_power(const FloquetModes& f, double T, double s) {
  ComplexVector ph(f.quasi_energies.size());
  for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::exp(-kI * f.quasi_energies(k) * T * s);
  return f.modes * ph.asDiagonal() * f.modes.adjoint();
}

// 2 * sum_n |<a|n><n|b>|^2.
inline double mixture_measure(const ComplexMatrix& modes, int a, int b) {
  double m = 0.0;
  for (Eigen::Index n = 0; n < modes.cols(); ++n) m += std::norm(std::conj(modes(a, n)) * modes(b, n));
  return 2.0 * m;
}

inline double mixture_measure(const AtomSpec& spec, const ComplexMatrix& modes) {
  const double I = spec.nuclear_spin.value();
  return mixture_measure(modes, ground_index(spec, -I), ground_index(spec, -I + 2.0));
}

struct FloquetResult {
  double T = 0.0;
  ComplexMatrix u_T;
  FloquetModes modes;
  double mixture = 0.0;
  double unitarity = 0.0;
};

inline FloquetResult floquet_analysis(const DriveModel& model, const PropagatorOptions& opt = {}) {
  FloquetResult r;
  r.T = model.config.T;
  r.u_T = one_period_propagator(model, opt);
  r.unitarity = unitarity_residual(r.u_T);
  r.modes = floquet_modes(r.u_T, r.T);
  r.mixture = mixture_measure(model.spec, r.modes.modes);
  return r;
}

// |<target|U(T)^k psi0>|^2 for k = 0..k_max, from the Floquet decomposition.
inline std::vector<double> floquet_stroboscopic_populations(const FloquetResult& f, const ComplexVector& psi0, int target, int k_max) {
  const ComplexVector c = f.modes.modes.adjoint() * psi0;
  const ComplexVector row = f.modes.modes.row(target).transpose();
  std::vector<double> out;
  out.reserve(static_cast<size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) {
    Complex amp = 0.0;
    for (Eigen::Index n = 0; n < c.size(); ++n) amp += row(n) * std::pow(f.modes.eigenvalues(n), k) * c(n);
    out.push_back(std::norm(amp));
  }
  return out;
}

// Intra-period factor S(t) = U(t) U(T)^(-t/T), with U(T)^(-t/T) taken on the
// first-zone branch of the quasi-energies. S(0) = S(T) = 1 by construction.
inline ComplexMatrix stroboscopic_operator(const DriveModel& model, const FloquetResult& f, double t,
                                           const PropagatorOptions& opt = {}) {
  const double T = model.config.T;
  if (t < 0.0 || t > T) throw std::invalid_argument("stroboscopic_operator: t must lie in [0, T]");
  return propagator(model, t, opt) * fractional_power(f.modes, T, -t / T);
}

inline ComplexVector stroboscopic_state(const DriveModel& model, double t, const ComplexVector& psi0,
                                        const IntegratorOptions& opt = {}) {
  if (t < 0.0 || t >= model.config.T) throw std::invalid_argument("stroboscopic_state: t must lie in [0, T)");
  if (t == 0.0) return psi0;
  return evolve_state(model, psi0, {t}, opt).back();
}

// How far S(t) is from the identity where it matters: the largest population
// a ground state moves elsewhere within the period, max_i (1 - |S_ii|^2).
// Excited-state columns carry the folded optical phase and are excluded.
inline double stroboscopic_transfer(const AtomSpec& spec, const ComplexMatrix& s) {
  double worst = 0.0;
  for (int i = 0; i < spec.spin_dim(); ++i) worst = std::max(worst, 1.0 - std::norm(s(i, i)));
  return worst;
}

// Floquet analysis restricted to the coupled block that holds `state`.
// Indices inside `result` are block-local; states[i] is the global index.
struct BlockFloquet {
  std::vector<int> states;
  FloquetResult result;

  int local(int global) const {
    const auto it = std::find(states.begin(), states.end(), global);
    return it == states.end() ? -1 : static_cast<int>(it - states.begin());
  }
};

inline BlockFloquet floquet_block(const DriveModel& model, int state, const PropagatorOptions& opt = {}) {
  BlockFloquet out;
  for (const auto& blk : coupled_blocks(model))
    if (std::find(blk.begin(), blk.end(), state) != blk.end()) out.states = blk;
  PropagatorOptions po = opt;
  po.only_blocks_with = {state};
  auto& r = out.result;
  r.T = model.config.T;
  r.u_T = block_of(one_period_propagator(model, po), out.states, 0.0);
  r.unitarity = unitarity_residual(r.u_T);
  if (r.unitarity > kUnitarityAbort) throw NumericalError("one-period propagator lost unitarity: " + std::to_string(r.unitarity));
  r.modes = floquet_modes(r.u_T, r.T);
  const double I = model.spec.nuclear_spin.value();
  const int a = out.local(ground_index(model.spec, -I)), b = out.local(ground_index(model.spec, -I + 2.0));
  r.mixture = (a >= 0 && b >= 0) ? mixture_measure(r.modes.modes, a, b) : 0.0;
  return out;
}

struct FloquetScanPoint {
  double T = 0.0;
  double mixture = 0.0;
  double unitarity = 0.0;
  std::vector<double> quasi_energies;  // modes of the block holding the qubit states
  // The two modes with the largest |<-9/2|n><n|-5/2>|: populations on both qubit states.
  std::array<std::array<double, 2>, 2> top_overlaps{};
};

// One T point of the mixture-measure scan. Only the block containing the
// qubit states contributes to the measure, so only that block is propagated.
inline FloquetScanPoint floquet_point(const AtomSpec& spec, DriveConfig config, double T,
                                      const IntegratorOptions& opt = PropagatorOptions{}.integrator) {
  config.T = T;
  const auto model = build_drive_model(spec, config);
  const double I = spec.nuclear_spin.value();
  PropagatorOptions po;
  po.integrator = opt;
  const auto blk = floquet_block(model, ground_index(spec, -I), po);
  const auto& f = blk.result.modes;
  FloquetScanPoint p;
  p.T = T;
  p.unitarity = blk.result.unitarity;
  p.mixture = blk.result.mixture;
  p.quasi_energies.assign(f.quasi_energies.data(), f.quasi_energies.data() + f.quasi_energies.size());
  const int ia = blk.local(ground_index(spec, -I)), ib = blk.local(ground_index(spec, -I + 2.0));
  if (ib < 0) return p;  // qubit states never mix
  std::vector<std::pair<double, Eigen::Index>> w;
  for (Eigen::Index n = 0; n < f.modes.cols(); ++n) w.push_back({std::norm(std::conj(f.modes(ia, n)) * f.modes(ib, n)), n});
  std::sort(w.begin(), w.end(), [](auto x, auto y) { return x.first > y.first || (x.first == y.first && x.second < y.second); });
  for (int k = 0; k < 2 && k < static_cast<int>(w.size()); ++k) {
    p.top_overlaps[k] = {std::norm(f.modes(ia, w[k].second)), std::norm(f.modes(ib, w[k].second))};
  }
  return p;
}

}  // namespace oner
