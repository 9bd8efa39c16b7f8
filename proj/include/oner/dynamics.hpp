// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oner/atom.hpp"
#include "oner/core.hpp"
#include "oner/drive.hpp"
#include "oner/integrator.hpp"

namespace oner {

// Nonzero entries of a dense operator, used for the products inside the
// integrator right-hand sides. Storage elsewhere stays dense.
class NonzeroView {
 public:
  NonzeroView() = default;
  explicit NonzeroView(const ComplexMatrix& m, double threshold = 0.0) : rows_(m.rows()), cols_(m.cols()) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        if (std::abs(m(i, j)) > threshold) entries_.push_back({static_cast<int>(i), static_cast<int>(j), m(i, j)});
  }

  // out = scale * M * x (out is overwritten when accumulate is false).
  void apply(const ComplexMatrix& x, ComplexMatrix& out, Complex scale = 1.0, bool accumulate = false) const {
    if (!accumulate) out.setZero(rows_, x.cols());
    // Plain real arithmetic: std::complex products go through the
    // NaN-recovering library path, which dominates these tiny kernels.
    scaled_.resize(entries_.size());
    for (size_t k = 0; k < entries_.size(); ++k) scaled_[k] = scale * entries_[k].v;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double* xc = reinterpret_cast<const double*>(x.col(c).data());
      double* oc = reinterpret_cast<double*>(out.col(c).data());
      for (size_t k = 0; k < entries_.size(); ++k) {
        const int i = entries_[k].i, j = entries_[k].j;
        const double ar = scaled_[k].real(), ai = scaled_[k].imag();
        const double br = xc[2 * j], bi = xc[2 * j + 1];
        oc[2 * i] += ar * br - ai * bi;
        oc[2 * i + 1] += ar * bi + ai * br;
      }
    }
  }

  size_t nonzeros() const { return entries_.size(); }

  struct Entry {
    int i, j;
    Complex v;
  };
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  Eigen::Index rows_ = 0, cols_ = 0;
  std::vector<Entry> entries_;
  mutable std::vector<Complex> scaled_;  // scratch; a view is not shared across threads
};

// c_0, c_+, c_- : |P, m_J, m_I> -> |S, 0, m_I>, returned in that order.
inline std::array<ComplexMatrix, 3> collapse_operators(const AtomSpec& spec) {
  const int n = spec.spin_dim();
  std::array<ComplexMatrix, 3> out;
  const std::array<int, 3> mj{0, +1, -1};
  for (int a = 0; a < 3; ++a) {
    out[a] = ComplexMatrix::Zero(spec.dim(), spec.dim());
    for (int k = 0; k < n; ++k) out[a](k, (2 + mj[a]) * n + k) = 1.0;
  }
  return out;
}

inline ComplexMatrix pure_density(const AtomSpec& spec, int index) {
  ComplexMatrix rho = ComplexMatrix::Zero(spec.dim(), spec.dim());
  rho(index, index) = 1.0;
  return rho;
}

struct TrajectoryResult {
  std::vector<double> times;
  Eigen::MatrixXd populations;  // samples x basis states
  std::vector<double> excited_occupation;
  std::vector<double> other_states_leakage;  // everything outside the two qubit levels and the excited manifold
  std::vector<double> strobe_times;          // t = kT
  std::vector<double> strobe_target;         // P_-5/2 at t = kT
  double flip_probability = 0.0;             // max_t P_-5/2
  double flip_time = 0.0;
  double period = 0.0;
  double gamma = 0.0;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  int target_index = 0;
  int initial_index = 0;
  std::string method;
  IntegratorStats stats;

  double max_excited_occupation() const {
    return excited_occupation.empty() ? 0.0 : *std::max_element(excited_occupation.begin(), excited_occupation.end());
  }
};

struct EvolveOptions {
  IntegratorOptions integrator;
  bool monitor_positivity = true;
  double trace_abort = 1e-6;
};

namespace detail {

inline void fill_derived(const AtomSpec& spec, TrajectoryResult& r) {
  const int n = spec.spin_dim();
  const double I = spec.nuclear_spin.value();
  r.initial_index = ground_index(spec, -I);
  r.target_index = ground_index(spec, -I + 2.0);
  const auto ns = static_cast<Eigen::Index>(r.times.size());
  r.excited_occupation.resize(ns);
  r.other_states_leakage.resize(ns);
  r.flip_probability = -1.0;
  for (Eigen::Index k = 0; k < ns; ++k) {
    const double pe = r.populations.row(k).segment(n, 3 * n).sum();
    r.excited_occupation[k] = pe;
    r.other_states_leakage[k] = r.populations.row(k).head(n).sum() - r.populations(k, r.initial_index) - r.populations(k, r.target_index);
    if (r.populations(k, r.target_index) > r.flip_probability) {
      r.flip_probability = r.populations(k, r.target_index);
      r.flip_time = r.times[k];
    }
  }
}

// Merge the sampling grid with the stroboscopic instants kT.
inline std::vector<double> sample_grid(double horizon, double sample_dt, double T, std::vector<int>& strobe_slots) {
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor(horizon / sample_dt + 1e-9));
  for (long k = 0; k <= n; ++k) grid.push_back(k * sample_dt);
  const auto m = static_cast<long>(std::floor(horizon / T + 1e-9));
  for (long k = 0; k <= m; ++k) grid.push_back(k * T);
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  for (double t : grid)
    if (out.empty() || t - out.back() > 1e-12 * std::max(1.0, t)) out.push_back(t);
  strobe_slots.clear();
  for (long k = 0; k <= m; ++k) {
    const double tk = k * T;
    auto it = std::min_element(out.begin(), out.end(), [&](double a, double b) { return std::abs(a - tk) < std::abs(b - tk); });
    strobe_slots.push_back(static_cast<int>(it - out.begin()));
  }
  return out;
}

}  // namespace detail

// Lindblad right-hand side: drho = -i[H(t), rho] + gamma * sum D[c] rho.
class LindbladRhs {
 public:
  LindbladRhs(const DriveModel& model, double gamma) : model_(&model), gamma_(gamma) {
    hs_ = NonzeroView(model.h_static);
    v_ = NonzeroView(model.coupling);
    const auto cs = collapse_operators(model.spec);
    ComplexMatrix ctc = ComplexMatrix::Zero(model.spec.dim(), model.spec.dim());
    for (const auto& c : cs) {
      collapse_.emplace_back(c);
      ctc += c.adjoint() * c;
    }
    ctc_ = NonzeroView(ctc);
  }

  void operator()(double t, const ComplexMatrix& rho, ComplexMatrix& out) const {
    // [H, rho] = X - X^dagger with X = H rho, valid because rho is Hermitian.
    hs_.apply(rho, x_);
    v_.apply(rho, x_, model_->envelope(t), true);
    out.noalias() = -kI * (x_ - x_.adjoint());
    if (gamma_ == 0.0) return;
    ctc_.apply(rho, y_);
    out.noalias() -= (0.5 * gamma_) * (y_ + y_.adjoint());
    for (const auto& c : collapse_) {
      for (const auto& a : c.entries())
        for (const auto& b : c.entries()) out(a.i, b.i) += gamma_ * a.v * rho(a.j, b.j) * std::conj(b.v);
    }
  }

 private:
  const DriveModel* model_;
  double gamma_;
  NonzeroView hs_, v_, ctc_;
  std::vector<NonzeroView> collapse_;
  mutable ComplexMatrix x_, y_;
};

// Direct integration of the master equation for the full density matrix.
inline TrajectoryResult evolve(const DriveModel& model, const ComplexMatrix& rho0, double horizon, double sample_dt,
                               const EvolveOptions& opt = {}) {
  const auto& spec = model.spec;
  if (rho0.rows() != spec.dim() || !is_density_matrix(rho0, 1e-8)) throw std::invalid_argument("evolve: invalid initial density matrix");
  if (!(sample_dt > 0.0) || horizon < sample_dt) throw std::invalid_argument("evolve: need horizon >= sample_dt > 0");

  TrajectoryResult r;
  r.method = "direct";
  r.period = model.config.T;
  r.gamma = spec.gamma;
  std::vector<int> strobe_slots;
  r.times = detail::sample_grid(horizon, sample_dt, model.config.T, strobe_slots);
  r.populations.resize(static_cast<Eigen::Index>(r.times.size()), spec.dim());

  LindbladRhs rhs(model, spec.gamma);
  ComplexMatrix rho = rho0;
  size_t slot = 0;
  r.min_eigenvalue = 1.0;
  auto observe = [&](double t, const ComplexMatrix& y) {
    const double tr_err = std::abs(y.trace() - Complex(1.0));
    r.max_trace_error = std::max(r.max_trace_error, tr_err);
    r.max_hermiticity_error = std::max(r.max_hermiticity_error, hermiticity_residual(y));
    if (tr_err > opt.trace_abort) throw NumericalError("evolve: trace drift " + std::to_string(tr_err) + " at t=" + std::to_string(t));
    if (opt.monitor_positivity) {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (y + y.adjoint()), Eigen::EigenvaluesOnly);
      r.min_eigenvalue = std::min(r.min_eigenvalue, es.eigenvalues().minCoeff());
    }
    r.populations.row(static_cast<Eigen::Index>(slot)) = y.diagonal().real().transpose();
    ++slot;
  };
  observe(0.0, rho);
  std::vector<double> stops(r.times.begin() + 1, r.times.end());
  r.stats = integrate(rhs, rho, 0.0, stops, observe, opt.integrator);

  detail::fill_derived(spec, r);
  for (int s : strobe_slots) {
    r.strobe_times.push_back(r.times[s]);
    r.strobe_target.push_back(r.populations(s, r.target_index));
  }
  return r;
}

inline TrajectoryResult evolve(const AtomSpec& spec, const DriveConfig& config, const ComplexMatrix& rho0, double horizon,
                               double sample_dt, const EvolveOptions& opt = {}) {
  return evolve(build_drive_model(spec, config), rho0, horizon, sample_dt, opt);
}

// Closed-system state-vector propagation, returning psi at each stop.
inline std::vector<ComplexVector> evolve_state(const DriveModel& model, const ComplexVector& psi0, const std::vector<double>& stops,
                                               const IntegratorOptions& opt = {}) {
  const NonzeroView hs(model.h_static), v(model.coupling);
  auto rhs = [&](double t, const ComplexMatrix& y, ComplexMatrix& dy) {
    hs.apply(y, dy, -kI);
    v.apply(y, dy, -kI * model.envelope(t), true);
  };
  ComplexMatrix y = psi0;
  std::vector<ComplexVector> out;
  integrate(rhs, y, 0.0, stops, [&](double, const ComplexMatrix& s) { out.push_back(s.col(0)); }, opt);
  return out;
}

// States grouped into sets that H(t) never connects. Entries below 1e-14 of
// the largest magnitude (cos(pi/2) round-off) count as structural zeros, and
// such entries are dropped again by block_of.
inline double structural_cut(const DriveModel& model) {
  const Eigen::MatrixXd mag = model.h_static.cwiseAbs() + model.config.omega_E * model.coupling.cwiseAbs();
  return 1e-14 * mag.maxCoeff();
}

inline std::vector<std::vector<int>> coupled_blocks(const DriveModel& model) {
  const Eigen::MatrixXd mag = model.h_static.cwiseAbs() + model.config.omega_E * model.coupling.cwiseAbs();
  const double cut = structural_cut(model);
  const auto d = static_cast<int>(mag.rows());
  std::vector<int> comp(d, -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < d; ++s) {
    if (comp[s] >= 0) continue;
    const int c = static_cast<int>(out.size());
    std::vector<int> stack{s};
    comp[s] = c;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < d; ++v)
        if (comp[v] < 0 && (mag(u, v) > cut || mag(v, u) > cut)) {
          comp[v] = c;
          stack.push_back(v);
        }
    }
    out.emplace_back();
    for (int v = 0; v < d; ++v)
      if (comp[v] == c) out.back().push_back(v);
  }
  return out;
}

// Restriction of m to the given states, with structural zeros cleared.
inline ComplexMatrix block_of(const ComplexMatrix& m, const std::vector<int>& states, double cut = 1e-14) {
  const auto k = static_cast<Eigen::Index>(states.size());
  const double thr = cut * max_abs(m);
  ComplexMatrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const Complex v = m(states[i], states[j]);
      out(i, j) = std::abs(v) > thr ? v : Complex(0.0);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Period-map propagation.
//
// For a drive that vanishes at t = 0 and t = T, far-detuned excited
// amplitudes follow the ground amplitudes adiabatically and return to
// (nearly) zero after every period. The engine propagates only the columns of
// the no-jump propagator K(t) (non-Hermitian H - i gamma/2 P_exc) that start
// in the slow set S: every ground state plus the static eigenstates of any
// excited level the drive reaches non-adiabatically. Each block is propagated
// once forward from 0 and once backward from T, and the period map on S is
//
//   rho -> K_SS(T) rho K_SS(T)^+ + gamma * int_0^T sum_a A_a(s) rho A_a(s)^+ ds
//
// with A_a(s) = K(T,s)_{S,g} c_a K(s)_{.,S}. A second decay within the same
// period is folded back onto the level it came from (decay conserves m_I),
// and the fast excited residue at the period boundary is dropped and
// reported.

struct PeriodMapOptions {
  IntegratorOptions integrator;
  int nodes = 64;  // even; quadrature and intra-period sampling nodes
  // Ground states whose coupled blocks are propagated; empty means all.
  // Blocks not reachable from these states are left at the identity.
  std::vector<int> active_ground;
  // An excited state joins the slow set when Omega_E * (2 pi / T) / E^2
  // reaches this value, E being its rotating-frame energy.
  double adiabaticity_cut = 1e-3;
};

class PeriodMap {
 public:
  PeriodMap(const DriveModel& model, const PeriodMapOptions& opt = {}) : model_(model), opt_(opt) {
    const auto& c = model.config;
    if (std::abs(std::remainder(c.envelope_phase, kTwoPi)) > 1e-12) {
      throw std::invalid_argument("period map requires the envelope to vanish at t = 0");
    }
    if (opt.nodes < 2 || opt.nodes % 2 != 0) throw std::invalid_argument("period map needs an even node count");
    build();
  }

  const DriveModel& model() const { return model_; }
  int nodes() const { return opt_.nodes; }
  // Slow-set labels: the ground basis states first, in order, then the
  // dominant basis state of each slow excited eigenvector.
  const std::vector<int>& slow_states() const { return slow_; }
  // Columns: the slow-set vectors in the full basis.
  const ComplexMatrix& slow_basis() const { return basis_; }
  int slow_dim() const { return static_cast<int>(slow_.size()); }
  double boundary_residue() const { return residue_; }
  const IntegratorStats& stats() const { return stats_; }
  const ComplexMatrix& no_jump_map() const { return k_end_; }

  // One period of the slow-set density matrix.
  ComplexMatrix step(const ComplexMatrix& rho) const {
    ComplexMatrix out = k_end_ * rho * k_end_.adjoint();
    const double g = model_.spec.gamma;
    if (g == 0.0) return out;
    const int n = model_.spec.spin_dim();
    for (int j = 0; j <= opt_.nodes; ++j) {
      const double w = g * simpson_[j];
      if (w == 0.0) continue;
      for (int a = 0; a < 3; ++a) {
        const ComplexMatrix& m = jump_end_[j][a];
        out.noalias() += w * (m * rho * m.adjoint());
        const ComplexMatrix post = jump_post_[j][a] * rho * jump_post_[j][a].adjoint();
        out.diagonal().head(n) += w * deficit_[j].cwiseProduct(post.diagonal().real()).cast<Complex>();
      }
    }
    return out;
  }

  // Diagonal of the full density matrix at node j (0 <= j < nodes) of a
  // period that starts in slow-set state rho.
  void node_populations(const ComplexMatrix& rho, std::vector<RealVector>& out) const {
    const int n = model_.spec.spin_dim();
    const int ns = slow_dim();
    const double g = model_.spec.gamma;
    const double h = model_.config.T / opt_.nodes;
    out.assign(opt_.nodes, RealVector());
    ComplexMatrix acc = ComplexMatrix::Zero(ns, ns);
    ComplexMatrix prev = ComplexMatrix::Zero(ns, ns);
    ComplexMatrix cur(ns, ns);
    for (int j = 0; j < opt_.nodes; ++j) {
      const ComplexMatrix& y = forward_[j];
      if (g != 0.0) {
        cur.setZero();
        for (const auto& b : jump_local_[j]) cur.topLeftCorner(n, n).noalias() += b * rho * b.adjoint();
        if (j > 0) acc += 0.5 * h * (prev + cur);
        prev = cur;
      }
      // Jumps so far are pulled back to t = 0 and pushed forward with the
      // no-jump propagator, so they add to rho before the projection.
      const ComplexMatrix eff = g != 0.0 ? ComplexMatrix(rho + g * acc) : rho;
      const ComplexMatrix yr = y * eff;
      RealVector p(y.rows());
      for (Eigen::Index i = 0; i < y.rows(); ++i) p(i) = yr.row(i).dot(y.row(i)).real();
      out[j] = p;
    }
  }

 private:
  struct Block {
    std::vector<int> states;
    std::vector<int> slow;  // slow-set members (slots)
    ComplexMatrix h_static, coupling;
    Eigen::VectorXd excited;  // 1 on excited states
  };

  // Static eigenvectors of excited levels the drive can excite
  // non-adiabatically, labelled by their dominant basis state.
  void add_slow_excited() {
    const int n = model_.spec.spin_dim();
    const auto ed = hermitian_eigendecompose(model_.h_static);
    const double rate = model_.config.omega_E * kTwoPi / model_.config.T;
    if (rate == 0.0) return;
    std::vector<std::pair<int, Eigen::Index>> picked;
    for (Eigen::Index k = 0; k < ed.eigenvalues.size(); ++k) {
      Eigen::Index dom;
      ed.eigenvectors.col(k).cwiseAbs2().maxCoeff(&dom);
      const double e = ed.eigenvalues(k);
      if (dom >= n && e * e <= rate / opt_.adiabaticity_cut) picked.push_back({static_cast<int>(dom), k});
    }
    std::sort(picked.begin(), picked.end());
    const auto old = basis_.cols();
    basis_.conservativeResize(Eigen::NoChange, old + static_cast<Eigen::Index>(picked.size()));
    for (size_t i = 0; i < picked.size(); ++i) {
      slow_.push_back(picked[i].first);
      basis_.col(old + static_cast<Eigen::Index>(i)) = ed.eigenvectors.col(picked[i].second);
    }
  }

  void build() {
    const int d = model_.spec.dim();
    const int n = model_.spec.spin_dim();
    const double T = model_.config.T;
    const int M = opt_.nodes;

    basis_ = ComplexMatrix::Identity(d, n);
    for (int g = 0; g < n; ++g) slow_.push_back(g);
    add_slow_excited();
    const int ns = slow_dim();
    std::vector<int> slot(d, -1);
    for (int k = 0; k < ns; ++k) slot[slow_[k]] = k;

    std::vector<Block> blocks;
    std::vector<int> inactive;
    for (auto& states : coupled_blocks(model_)) {
      Block b;
      b.states = std::move(states);
      bool has_ground = false, active = opt_.active_ground.empty();
      for (int s : b.states) {
        if (slot[s] >= 0) b.slow.push_back(slot[s]);
        if (s < n) has_ground = true;
        if (std::find(opt_.active_ground.begin(), opt_.active_ground.end(), s) != opt_.active_ground.end()) active = true;
      }
      if (!has_ground) continue;  // never populated from the ground block
      if (!active) {
        inactive.insert(inactive.end(), b.slow.begin(), b.slow.end());
        continue;
      }
      const int m = static_cast<int>(b.states.size());
      b.h_static = block_of(model_.h_static, b.states);
      b.coupling = block_of(model_.coupling, b.states);
      b.excited.resize(m);
      for (int i = 0; i < m; ++i) b.excited(i) = b.states[i] >= n ? 1.0 : 0.0;
      blocks.push_back(std::move(b));
    }

    std::vector<double> stops(M);
    for (int j = 1; j <= M; ++j) stops[j - 1] = T * j / M;

    forward_.assign(M + 1, ComplexMatrix::Zero(d, ns));
    std::vector<ComplexMatrix> backward(M + 1, ComplexMatrix::Zero(d, ns));  // (K(T,s)_{S,.})^dagger at s_j
    const double g = model_.spec.gamma;
    std::vector<bool> in_active_block(d, false);
    for (const auto& b : blocks) {
      const int m = static_cast<int>(b.states.size());
      const int nc = static_cast<int>(b.slow.size());
      ComplexMatrix y0(m, nc);
      for (int c = 0; c < nc; ++c)
        for (int i = 0; i < m; ++i) y0(i, c) = basis_(b.states[i], b.slow[c]);
      for (int s : b.states) in_active_block[s] = true;
      const ComplexMatrix decay = (-0.5 * g) * b.excited.cast<Complex>().asDiagonal().toDenseMatrix();
      auto scatter = [&](std::vector<ComplexMatrix>& dst, int j, const ComplexMatrix& y) {
        for (int c = 0; c < nc; ++c)
          for (int i = 0; i < m; ++i) dst[j](b.states[i], b.slow[c]) = y(i, c);
      };
      // forward: Y' = (-i H(t) - gamma/2 P) Y
      {
        const NonzeroView a(-kI * b.h_static + decay), v(-kI * b.coupling);
        auto rhs = [&](double t, const ComplexMatrix& y, ComplexMatrix& dy) {
          a.apply(y, dy);
          v.apply(y, dy, model_.envelope(t), true);
        };
        ComplexMatrix y = y0;
        scatter(forward_, 0, y);
        int j = 1;
        accumulate(integrate(rhs, y, 0.0, stops, [&](double, const ComplexMatrix& s) { scatter(forward_, j++, s); }, opt_.integrator));
      }
      // backward in u = T - s: W' = (+i H(T-u) - gamma/2 P) W, W = K(T,s)_{S,.}^dagger
      {
        const NonzeroView a(kI * b.h_static + decay), v(kI * b.coupling);
        auto rhs = [&](double u, const ComplexMatrix& w, ComplexMatrix& dw) {
          a.apply(w, dw);
          v.apply(w, dw, model_.envelope(T - u), true);
        };
        ComplexMatrix w = y0;
        scatter(backward, M, w);
        int j = M - 1;
        accumulate(integrate(rhs, w, 0.0, stops, [&](double, const ComplexMatrix& s) { scatter(backward, j--, s); }, opt_.integrator));
      }
    }

    // Inactive slow states are kept as decoupled identity columns.
    for (int k : inactive)
      for (int j = 0; j <= M; ++j) {
        forward_[j].col(k) = basis_.col(k);
        backward[j].col(k) = basis_.col(k);
      }
    k_end_ = basis_.adjoint() * forward_[M];
    // Part of the end state outside the slow span, over propagated columns.
    const ComplexMatrix outside = forward_[M] - basis_ * k_end_;
    residue_ = 0.0;
    for (int r = 0; r < d; ++r)
      if (in_active_block[r]) residue_ = std::max(residue_, outside.row(r).cwiseAbs().maxCoeff());

    simpson_.assign(M + 1, 0.0);
    const double h = T / M;
    for (int j = 0; j <= M; ++j) simpson_[j] = h / 3.0 * (j == 0 || j == M ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0));

    jump_end_.resize(M + 1);
    jump_post_.resize(M + 1);
    jump_local_.resize(M + 1);
    deficit_.assign(M + 1, RealVector::Zero(n));
    for (int j = 0; j <= M; ++j) {
      // Z = K(T, s_j)_{S,g}: where a ground state at s_j ends up at T.
      ComplexMatrix z(ns, n);
      for (int k = 0; k < ns; ++k)
        for (int c = 0; c < n; ++c) z(k, c) = std::conj(backward[j](c, k));
      // A bare ground state at s_j is partly a dressed excited state, and may
      // decay again before T. That weight returns to the same m_I level.
      for (int k = 0; k < n; ++k) deficit_[j](k) = std::max(0.0, 1.0 - z.col(k).squaredNorm());
      Eigen::PartialPivLU<ComplexMatrix> lu(basis_.adjoint() * forward_[j]);
      for (int a = 0; a < 3; ++a) {
        const int mj = a - 1;
        const ComplexMatrix r = forward_[j].middleRows((2 + mj) * n, n);  // c_a K(s_j), n x ns
        jump_end_[j][a] = z * r;
        jump_post_[j][a] = r;
        ComplexMatrix embedded = ComplexMatrix::Zero(ns, ns);
        embedded.topRows(n) = r;
        jump_local_[j][a] = lu.solve(embedded).topRows(n);  // K_SS(s_j)^{-1} c_a K(s_j), ground rows
      }
    }
  }

  void accumulate(const IntegratorStats& s) {
    stats_.accepted += s.accepted;
    stats_.rejected += s.rejected;
    stats_.evaluations += s.evaluations;
  }

  DriveModel model_;
  PeriodMapOptions opt_;
  std::vector<int> slow_;
  ComplexMatrix basis_;
  std::vector<ComplexMatrix> forward_;  // K(s_j)_{.,S}, full rows
  std::vector<std::array<ComplexMatrix, 3>> jump_end_;
  std::vector<std::array<ComplexMatrix, 3>> jump_post_;  // c_a K(s_j) onto the ground block
  std::vector<std::array<ComplexMatrix, 3>> jump_local_;
  std::vector<RealVector> deficit_;
  std::vector<double> simpson_;
  ComplexMatrix k_end_;
  double residue_ = 0.0;
  IntegratorStats stats_;
};

// Trajectory from repeated application of the period map, sampled at the
// map's intra-period nodes. The initial state lives on the slow set.
inline TrajectoryResult evolve_periodic(const PeriodMap& map, const ComplexMatrix& rho0_slow, double horizon) {
  const auto& model = map.model();
  const auto& spec = model.spec;
  if (rho0_slow.rows() != map.slow_dim() || !is_density_matrix(rho0_slow, 1e-8)) throw std::invalid_argument("evolve_periodic: invalid slow-set state");
  const double T = model.config.T;
  const int M = map.nodes();

  TrajectoryResult r;
  r.method = "period-map";
  r.period = T;
  r.gamma = spec.gamma;
  r.stats = map.stats();
  const auto periods = static_cast<long>(std::floor(horizon / T + 1e-9));
  std::vector<RealVector> pops;
  std::vector<RealVector> rows;
  ComplexMatrix rho = rho0_slow;
  r.min_eigenvalue = 1.0;
  for (long k = 0; k <= periods; ++k) {
    const double t0 = k * T;
    const double tr_err = std::abs(rho.trace() - Complex(1.0));
    r.max_trace_error = std::max(r.max_trace_error, tr_err);
    r.max_hermiticity_error = std::max(r.max_hermiticity_error, hermiticity_residual(rho));
    map.node_populations(rho, pops);
    for (int j = 0; j < M; ++j) {
      const double t = t0 + T * j / M;
      if (t > horizon + 1e-12) break;
      r.times.push_back(t);
      rows.push_back(pops[j]);
    }
    r.strobe_times.push_back(t0);
    if (k == periods) break;
    rho = map.step(rho);
    rho = 0.5 * (rho + rho.adjoint()).eval();
  }
  r.populations.resize(static_cast<Eigen::Index>(rows.size()), spec.dim());
  for (size_t i = 0; i < rows.size(); ++i) r.populations.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  detail::fill_derived(spec, r);
  for (size_t i = 0; i < r.strobe_times.size(); ++i) r.strobe_target.push_back(r.populations(static_cast<Eigen::Index>(i) * M, r.target_index));
  return r;
}

// Dispatch: the period map when the envelope starts at zero, the direct
// integrator otherwise. The initial state is a ground basis state.
inline TrajectoryResult simulate_from_ground(const DriveModel& model, int initial_ground_index, double horizon,
                                             const PeriodMapOptions& opt = {}) {
  if (std::abs(std::remainder(model.config.envelope_phase, kTwoPi)) <= 1e-12) {
    PeriodMapOptions o = opt;
    if (o.active_ground.empty()) o.active_ground = {initial_ground_index};
    const PeriodMap map(model, o);
    ComplexMatrix rho = ComplexMatrix::Zero(map.slow_dim(), map.slow_dim());
    rho(initial_ground_index, initial_ground_index) = 1.0;
    return evolve_periodic(map, rho, horizon);
  }
  EvolveOptions eo;
  eo.integrator = opt.integrator;
  return evolve(model, pure_density(model.spec, initial_ground_index), horizon, model.config.T / opt.nodes, eo);
}

// ---------------------------------------------------------------------------

struct RabiEstimate {
  std::optional<double> omega_N;  // pi / t_firstmax
  double t_firstmax = 0.0;
  std::optional<double> omega_dft;
  bool dft_agrees = false;  // within 15 %
};

inline std::optional<double> dominant_frequency(const std::vector<double>& t, const std::vector<double>& x) {
  if (x.size() < 4) return std::nullopt;
  const double dt = t[1] - t[0];
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  const size_t pad = 16 * x.size();
  double best = 0.0, best_f = 0.0;
  // Skip the zero bin; scan positive frequencies of the zero-padded series.
  for (size_t k = 1; k <= pad / 2; ++k) {
    const double f = static_cast<double>(k) / (pad * dt);
    Complex acc = 0.0;
    for (size_t i = 0; i < x.size(); ++i) acc += (x[i] - mean) * std::exp(-kI * (kTwoPi * f * i * dt));
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      best_f = f;
    }
  }
  if (best <= 0.0) return std::nullopt;
  return kTwoPi * best_f;
}

// Nuclear Rabi frequency from the stroboscopic samples of P_-5/2.
inline RabiEstimate extract_nuclear_rabi(const std::vector<double>& t, const std::vector<double>& p) {
  RabiEstimate out;
  for (size_t k = 1; k + 1 < p.size(); ++k) {
    if (p[k] > 0.5 && p[k] >= p[k - 1] && p[k] > p[k + 1]) {
      // Parabolic refinement of the maximum between the neighbouring samples.
      const double dt = t[k + 1] - t[k];
      const double den = p[k - 1] - 2.0 * p[k] + p[k + 1];
      double shift = den < 0.0 ? 0.5 * (p[k - 1] - p[k + 1]) / den : 0.0;
      shift = std::clamp(shift, -0.5, 0.5);
      out.t_firstmax = t[k] + shift * dt;
      out.omega_N = kPi / out.t_firstmax;
      break;
    }
  }
  out.omega_dft = dominant_frequency(t, p);
  if (out.omega_N && out.omega_dft) out.dft_agrees = std::abs(*out.omega_dft - *out.omega_N) <= 0.15 * *out.omega_N;
  return out;
}

inline RabiEstimate extract_nuclear_rabi(const TrajectoryResult& traj) {
  return extract_nuclear_rabi(traj.strobe_times, traj.strobe_target);
}

inline std::optional<double> scattered_photons(const TrajectoryResult& traj, const std::optional<double>& omega_N) {
  if (!omega_N || *omega_N <= 0.0) return std::nullopt;
  return traj.max_excited_occupation() * traj.gamma / *omega_N;
}

}  // namespace oner
