// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "oner/atom.hpp"
#include "oner/core.hpp"
#include "oner/drive.hpp"
#include "oner/dynamics.hpp"

namespace oner {

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// fn(0) ... fn(n-1) on up to `threads` workers. Results are stored by index,
// so the output never depends on scheduling. The exception of the lowest
// failing index is rethrown after all workers finish.
template <class F>
auto parallel_map(size_t n, unsigned threads, F&& fn) -> std::vector<decltype(fn(size_t{}))> {
  using R = decltype(fn(size_t{}));
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto workers = static_cast<unsigned>(std::min<size_t>(std::max(1u, threads), n));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

// ---------------------------------------------------------------------------
// Single scan point

struct FlipOptions {
  double horizon = 50.0;  // us
  PeriodMapOptions map;
};

struct FlipPoint {
  double T = 0.0;
  double P = 0.0;  // max_t P_-5/2
  double flip_time = 0.0;
  std::optional<double> omega_N;
  // When the stroboscopic P_-5/2 is still rising at the horizon, the first
  // maximum lies beyond it and pi / t_last bounds Omega_N from above.
  std::optional<double> omega_N_bound;
  std::optional<double> omega_dft;
  bool dft_agrees = false;
  double max_excited = 0.0;
  double max_leakage = 0.0;
  std::optional<double> n_sc;
  double trace_error = 0.0;
};

inline FlipPoint summarize(const TrajectoryResult& tr) {
  FlipPoint p;
  p.T = tr.period;
  p.P = tr.flip_probability;
  p.flip_time = tr.flip_time;
  const auto rabi = extract_nuclear_rabi(tr);
  p.omega_N = rabi.omega_N;
  p.omega_dft = rabi.omega_dft;
  p.dft_agrees = rabi.dft_agrees;
  const auto& s = tr.strobe_target;
  if (!p.omega_N && s.size() >= 2 && s.back() > 0.5 && s.back() >= *std::max_element(s.begin(), s.end())) {
    p.omega_N_bound = kPi / tr.strobe_times.back();
  }
  p.max_excited = tr.max_excited_occupation();
  p.max_leakage = tr.other_states_leakage.empty() ? 0.0 : *std::max_element(tr.other_states_leakage.begin(), tr.other_states_leakage.end());
  p.n_sc = scattered_photons(tr, p.omega_N);
  p.trace_error = tr.max_trace_error;
  return p;
}

// Flip probability from |S,0,-I> over the horizon at config.T.
inline FlipPoint flip_point(const AtomSpec& spec, const DriveConfig& config, const FlipOptions& opt = {}) {
  const auto model = build_drive_model(spec, config);
  const int start = ground_index(spec, -spec.nuclear_spin.value());
  return summarize(simulate_from_ground(model, start, opt.horizon, opt.map));
}

// ---------------------------------------------------------------------------
// Period scans

// Indices of local maxima with value >= min_value and topographic prominence
// >= min_prominence. End points never qualify: the scan cannot tell whether
// they are maxima.
inline std::vector<size_t> detect_peaks(const std::vector<double>& p, double min_value = 0.5, double min_prominence = 0.2) {
  std::vector<size_t> out;
  const size_t n = p.size();
  for (size_t i = 1; i + 1 < n; ++i) {
    if (!(p[i] > p[i - 1])) continue;
    size_t j = i;  // plateau end
    while (j + 1 < n && p[j + 1] == p[i]) ++j;
    if (j + 1 >= n || !(p[j + 1] < p[i])) continue;
    if (p[i] < min_value) continue;
    double left = p[i], right = p[i];
    size_t l = i;
    while (l > 0 && p[l - 1] <= p[i]) left = std::min(left, p[--l]);
    const bool left_open = l == 0;
    size_t r = j;
    while (r + 1 < n && p[r + 1] <= p[i]) right = std::min(right, p[++r]);
    const bool right_open = r + 1 == n;
    // A side that never meets a higher point contributes its own minimum.
    double base;
    if (left_open && right_open) base = std::min(left, right);
    else if (left_open) base = right;
    else if (right_open) base = left;
    else base = std::max(left, right);
    if (p[i] - base >= min_prominence) out.push_back(i);
    i = j;
  }
  return out;
}

inline std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("uniform_grid: need step > 0 and hi >= lo");
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> g;
  for (long k = 0; k <= n; ++k) g.push_back(lo + k * step);
  return g;
}

struct Peak {
  FlipPoint point;
  size_t order = 0;  // 1-based, ascending in T
};

struct LadderStats {
  size_t count = 0;
  double T_spacing_mean = 0.0;
  double T_spacing_dispersion = 0.0;  // std / mean of successive spacings
  double inverse_spacing_mean = 0.0;
  double inverse_spacing_dispersion = 0.0;
  std::vector<int> photon_order;  // n in Delta E_eff = 2 pi n / T_n
  std::vector<double> delta_E;    // 2 pi n / T_n
  double delta_E_mean = 0.0;
  double delta_E_spread = 0.0;  // max |dE - mean| / mean
  // Omega_N strictly decreases; an unresolved later peak counts through its
  // upper bound.
  bool omega_N_decreasing = false;
};

struct PeriodScanResult {
  std::vector<FlipPoint> points;  // ascending T
  std::vector<Peak> peaks;        // ascending T
  LadderStats ladder;
};

namespace detail {
inline double dispersion(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  return mean != 0.0 ? std::sqrt(var / static_cast<double>(x.size())) / std::abs(mean) : 0.0;
}
}  // namespace detail

inline LadderStats ladder_stats(const std::vector<Peak>& peaks) {
  LadderStats s;
  s.count = peaks.size();
  if (peaks.empty()) return s;
  std::vector<double> dT, dinv;
  for (size_t k = 1; k < peaks.size(); ++k) {
    dT.push_back(peaks[k].point.T - peaks[k - 1].point.T);
    dinv.push_back(1.0 / peaks[k - 1].point.T - 1.0 / peaks[k].point.T);
  }
  if (!dT.empty()) {
    s.T_spacing_mean = std::accumulate(dT.begin(), dT.end(), 0.0) / static_cast<double>(dT.size());
    s.inverse_spacing_mean = std::accumulate(dinv.begin(), dinv.end(), 0.0) / static_cast<double>(dinv.size());
    s.T_spacing_dispersion = detail::dispersion(dT);
    s.inverse_spacing_dispersion = detail::dispersion(dinv);
  }
  // The ladder T_n = n * 2 pi / dE has spacing 2 pi / dE, so n follows from
  // T_n over the median spacing (or T_1 itself for a single peak).
  double base = peaks.front().point.T;
  if (!dT.empty()) {
    auto sorted = dT;
    std::sort(sorted.begin(), sorted.end());
    base = sorted[sorted.size() / 2];
  }
  for (const auto& p : peaks) {
    const int n = std::max(1, static_cast<int>(std::lround(p.point.T / base)));
    s.photon_order.push_back(n);
    s.delta_E.push_back(kTwoPi * n / p.point.T);
  }
  s.delta_E_mean = std::accumulate(s.delta_E.begin(), s.delta_E.end(), 0.0) / static_cast<double>(s.delta_E.size());
  for (double e : s.delta_E) s.delta_E_spread = std::max(s.delta_E_spread, std::abs(e - s.delta_E_mean) / s.delta_E_mean);

  s.omega_N_decreasing = peaks.front().point.omega_N.has_value();
  for (size_t k = 1; k < peaks.size() && s.omega_N_decreasing; ++k) {
    const auto& prev = peaks[k - 1].point;
    const auto& cur = peaks[k].point;
    const auto cur_value = cur.omega_N ? cur.omega_N : cur.omega_N_bound;
    s.omega_N_decreasing = prev.omega_N && cur_value && *cur_value < *prev.omega_N;
  }
  return s;
}

struct PeakRule {
  double min_value = 0.5;
  double min_prominence = 0.2;
};

namespace detail {
inline void sort_points(std::vector<FlipPoint>& pts) {
  std::sort(pts.begin(), pts.end(), [](const FlipPoint& a, const FlipPoint& b) { return a.T < b.T; });
  pts.erase(std::unique(pts.begin(), pts.end(), [](const FlipPoint& a, const FlipPoint& b) { return std::abs(a.T - b.T) < 1e-9; }),
            pts.end());
}

inline std::vector<Peak> peaks_of(const std::vector<FlipPoint>& pts, const PeakRule& rule) {
  std::vector<double> p;
  for (const auto& x : pts) p.push_back(x.P);
  std::vector<Peak> out;
  for (size_t i : detect_peaks(p, rule.min_value, rule.min_prominence)) out.push_back({pts[i], out.size() + 1});
  return out;
}

inline std::vector<FlipPoint> evaluate(const AtomSpec& spec, const DriveConfig& base, const std::vector<double>& Ts,
                                       const FlipOptions& opt, unsigned threads) {
  return parallel_map(Ts.size(), threads, [&](size_t i) {
    DriveConfig c = base;
    c.T = Ts[i];
    return flip_point(spec, c, opt);
  });
}
}  // namespace detail

// Uniform scan over the given T values.
inline PeriodScanResult period_scan(const AtomSpec& spec, const DriveConfig& base, const std::vector<double>& T_grid,
                                    const FlipOptions& opt = {}, unsigned threads = default_threads(), const PeakRule& rule = {}) {
  PeriodScanResult r;
  r.points = detail::evaluate(spec, base, T_grid, opt, threads);
  detail::sort_points(r.points);
  r.peaks = detail::peaks_of(r.points, rule);
  r.ladder = ladder_stats(r.peaks);
  return r;
}

struct ScanPlan {
  double T_min = 0.01;  // us
  double T_max = 5.0;
  double coarse_step = 0.025;
  double candidate_min = 0.1;  // coarse local maxima at or above this are refined
  double refine_halfwidth = 0.05;
  double refine_step = 0.001;
  double polish_tolerance = 5e-5;  // final peak position, us
  bool full_fidelity = false;      // uniform grid at full_step over [T_min, T_max]
  double full_step = 0.005;
  PeakRule rule;
};

// Maximize P over [T - step, T + step] around a detected peak.
inline FlipPoint polish_peak(const AtomSpec& spec, const DriveConfig& base, const FlipPoint& seed, double step, double tolerance,
                             const FlipOptions& opt) {
  std::map<double, FlipPoint> seen;
  auto eval = [&](double T) {
    auto it = seen.find(T);
    if (it == seen.end()) {
      DriveConfig c = base;
      c.T = T;
      it = seen.emplace(T, flip_point(spec, c, opt)).first;
    }
    return -it->second.P;
  };
  const double lo = seed.T - step, hi = seed.T + step;
  // Bits of precision relative to the bracket; Brent stops once the bracket
  // shrinks below the tolerance.
  const int bits = std::clamp(static_cast<int>(std::ceil(std::log2(seed.T / tolerance))) + 1, 8, 40);
  std::uintmax_t iters = 60;
  boost::math::tools::brent_find_minima(eval, lo, hi, bits, iters);
  FlipPoint best = seed;
  for (const auto& [T, p] : seen)
    if (p.P > best.P) best = p;
  return best;
}

// Coarse grid, refinement windows around coarse candidates, then a polish of
// every detected peak. With plan.full_fidelity the first two stages are
// replaced by the uniform fine grid.
inline PeriodScanResult windowed_scan(const AtomSpec& spec, const DriveConfig& base, const ScanPlan& plan = {},
                                      const FlipOptions& opt = {}, unsigned threads = default_threads()) {
  PeriodScanResult r;
  double step;
  if (plan.full_fidelity) {
    r.points = detail::evaluate(spec, base, uniform_grid(plan.T_min, plan.T_max, plan.full_step), opt, threads);
    step = plan.full_step;
  } else {
    r.points = detail::evaluate(spec, base, uniform_grid(plan.T_min, plan.T_max, plan.coarse_step), opt, threads);
    std::vector<double> coarse;
    for (const auto& p : r.points) coarse.push_back(p.P);
    std::vector<double> fine;
    for (size_t i : detect_peaks(coarse, plan.candidate_min, 0.0)) {
      const double c = r.points[i].T;
      for (double T : uniform_grid(c - plan.refine_halfwidth, c + plan.refine_halfwidth, plan.refine_step))
        if (T > 0.0) fine.push_back(std::round(T / plan.refine_step) * plan.refine_step);
    }
    std::sort(fine.begin(), fine.end());
    fine.erase(std::unique(fine.begin(), fine.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }), fine.end());
    std::erase_if(fine, [&](double T) {
      return std::any_of(r.points.begin(), r.points.end(), [&](const FlipPoint& p) { return std::abs(p.T - T) < 1e-9; });
    });
    auto refined = detail::evaluate(spec, base, fine, opt, threads);
    r.points.insert(r.points.end(), refined.begin(), refined.end());
    step = plan.refine_step;
  }
  detail::sort_points(r.points);
  r.peaks = detail::peaks_of(r.points, plan.rule);
  auto polished = parallel_map(r.peaks.size(), threads, [&](size_t k) {
    return polish_peak(spec, base, r.peaks[k].point, step, plan.polish_tolerance, opt);
  });
  for (size_t k = 0; k < r.peaks.size(); ++k) {
    r.peaks[k].point = polished[k];
    r.points.push_back(polished[k]);
  }
  detail::sort_points(r.points);
  r.ladder = ladder_stats(r.peaks);
  return r;
}

struct GridCell {
  double B = 0.0;
  double omega_E = 0.0;
  PeriodScanResult scan;
};

inline std::vector<double> default_grid_fields() { return {200.0, 300.0, 500.0, 1000.0}; }
inline std::vector<double> default_grid_rabi() {
  return {units::mhz(20.0), units::mhz(30.0), units::mhz(40.0), units::mhz(50.0), units::mhz(60.0), units::mhz(80.0)};
}

// Outer product of fields and Rabi frequencies, B-major. on_cell(index, cell)
// runs after each cell, e.g. to write partial results.
template <class OnCell>
std::vector<GridCell> grid_scan(const AtomSpec& spec, const DriveConfig& base, const std::vector<double>& fields,
                                const std::vector<double>& rabis, const ScanPlan& plan, const FlipOptions& opt, unsigned threads,
                                OnCell&& on_cell) {
  std::vector<GridCell> out;
  for (double B : fields)
    for (double w : rabis) {
      DriveConfig c = base;
      c.B = B;
      c.omega_E = w;
      c.detuning.reset();  // midpoint rule per field
      out.push_back({B, w, windowed_scan(spec, c, plan, opt, threads)});
      on_cell(out.size() - 1, out.back());
    }
  return out;
}

inline std::vector<GridCell> grid_scan(const AtomSpec& spec, const DriveConfig& base, const std::vector<double>& fields,
                                       const std::vector<double>& rabis, const ScanPlan& plan = {}, const FlipOptions& opt = {},
                                       unsigned threads = default_threads()) {
  return grid_scan(spec, base, fields, rabis, plan, opt, threads, [](size_t, const GridCell&) {});
}

// A peak that counts as a usable gate point.
inline bool accepted_stable_peak(const FlipPoint& p) { return p.P > 0.99 && p.omega_N.has_value(); }

// ---------------------------------------------------------------------------
// Stability matrices

enum class Parameter { T, B, OmegaE, Theta, Detuning };

inline const std::vector<Parameter>& all_parameters() {
  static const std::vector<Parameter> all{Parameter::T, Parameter::B, Parameter::OmegaE, Parameter::Theta, Parameter::Detuning};
  return all;
}

inline std::string parameter_name(Parameter p) {
  switch (p) {
    case Parameter::T: return "T";
    case Parameter::B: return "B";
    case Parameter::OmegaE: return "omega_E";
    case Parameter::Theta: return "theta";
    case Parameter::Detuning: return "detuning";
  }
  return "?";
}

inline Parameter parse_parameter(const std::string& s) {
  for (auto p : all_parameters())
    if (parameter_name(p) == s) return p;
  throw std::invalid_argument("unknown parameter '" + s + "'");
}

// Fix the laser frequency at the base field, so a field perturbation moves
// the atom and not the laser.
inline DriveConfig pin_detuning(const AtomSpec& spec, DriveConfig c) {
  if (!c.detuning) c.detuning = resolve_detuning(spec, c);
  return c;
}

// Offsets in internal units: us, G, rad/us, rad, rad/us.
inline DriveConfig perturbed(DriveConfig c, Parameter p, double offset) {
  switch (p) {
    case Parameter::T: c.T += offset; break;
    case Parameter::B: c.B += offset; break;
    case Parameter::OmegaE: c.omega_E += offset; break;
    case Parameter::Theta: c.theta += offset; break;
    case Parameter::Detuning: c.detuning = c.detuning.value() + offset; break;
  }
  return c;
}

inline double log_infidelity(double P) { return std::log10(std::max(1.0 - P, 1e-16)); }

struct StabilityAxis {
  Parameter parameter;
  std::vector<double> offsets;  // must contain 0
};

// Symmetric grid of 2k+1 offsets spanning [-max, max].
inline std::vector<double> symmetric_offsets(double max, int points) {
  if (points < 1 || points % 2 == 0) throw std::invalid_argument("stability axis needs an odd number of points");
  std::vector<double> o;
  const int h = points / 2;
  for (int k = -h; k <= h; ++k) o.push_back(h == 0 ? 0.0 : max * k / h);
  return o;
}

struct StabilityMatrix {
  DriveConfig base;  // detuning pinned
  double base_P = 0.0;
  std::vector<StabilityAxis> axes;
  std::vector<std::vector<double>> slice_P;  // per axis, per offset
  struct Plane {
    size_t a = 0, b = 0;      // axis indices, a < b
    Eigen::MatrixXd P;        // rows: offsets of a, cols: offsets of b
  };
  std::vector<Plane> planes;

  std::vector<double> slice_log(size_t axis) const {
    std::vector<double> v;
    for (double p : slice_P[axis]) v.push_back(log_infidelity(p));
    return v;
  }
};

inline StabilityMatrix stability_matrix(const AtomSpec& spec, const DriveConfig& base, const std::vector<StabilityAxis>& axes,
                                        bool with_planes = true, const FlipOptions& opt = {}, unsigned threads = default_threads()) {
  StabilityMatrix m;
  m.base = pin_detuning(spec, base);
  m.axes = axes;
  for (const auto& ax : axes)
    if (std::none_of(ax.offsets.begin(), ax.offsets.end(), [](double o) { return o == 0.0; }))
      throw std::invalid_argument("stability axis " + parameter_name(ax.parameter) + " must contain the zero offset");

  // One flat task list: the base point, every slice cell, every plane cell.
  struct Task {
    int a = -1, b = -1;
    double oa = 0.0, ob = 0.0;
  };
  std::vector<Task> tasks{{}};
  for (size_t i = 0; i < axes.size(); ++i)
    for (double o : axes[i].offsets) tasks.push_back({static_cast<int>(i), -1, o, 0.0});
  if (with_planes)
    for (size_t i = 0; i < axes.size(); ++i)
      for (size_t j = i + 1; j < axes.size(); ++j)
        for (double oa : axes[i].offsets)
          for (double ob : axes[j].offsets) tasks.push_back({static_cast<int>(i), static_cast<int>(j), oa, ob});

  // Zero offsets reuse the base point, so the center cell is the base fidelity exactly.
  const auto results = parallel_map(tasks.size(), threads, [&](size_t k) -> double {
    const auto& t = tasks[k];
    if (k > 0 && t.oa == 0.0 && t.ob == 0.0) return std::nan("");
    DriveConfig c = m.base;
    if (t.a >= 0) c = perturbed(c, axes[t.a].parameter, t.oa);
    if (t.b >= 0) c = perturbed(c, axes[t.b].parameter, t.ob);
    return flip_point(spec, c, opt).P;
  });
  m.base_P = results[0];
  auto value = [&](size_t k) { return std::isnan(results[k]) ? m.base_P : results[k]; };
  size_t k = 1;
  for (size_t i = 0; i < axes.size(); ++i) {
    m.slice_P.emplace_back();
    for (size_t q = 0; q < axes[i].offsets.size(); ++q) m.slice_P.back().push_back(value(k++));
  }
  if (with_planes)
    for (size_t i = 0; i < axes.size(); ++i)
      for (size_t j = i + 1; j < axes.size(); ++j) {
        StabilityMatrix::Plane pl{i, j, Eigen::MatrixXd(axes[i].offsets.size(), axes[j].offsets.size())};
        for (Eigen::Index r = 0; r < pl.P.rows(); ++r)
          for (Eigen::Index c = 0; c < pl.P.cols(); ++c) pl.P(r, c) = value(k++);
        m.planes.push_back(std::move(pl));
      }
  return m;
}

// ---------------------------------------------------------------------------
// Noise and effective two-level model

struct NoiseEstimate {
  std::string parameter;
  double psd = 0.0;       // S_x(Omega_N), one-sided
  double slope_sq = 0.0;  // (d Delta_eff / dx)^2
  double gamma1 = 0.0;
};

// Quasi-static slope from a stability-matrix fidelity: a two-level model
// with maximal occupation P = Omega_N^2 / (Omega_N^2 + Delta_eff^2) and
// Delta_eff ~ slope * dx. Units are the caller's, consistently.
inline double detuning_slope_sq(double delta_x, double P_delta_x, double omega_N) {
  if (delta_x == 0.0) throw std::invalid_argument("perturbation must be nonzero");
  if (!(P_delta_x > 0.0 && P_delta_x <= 1.0)) throw std::invalid_argument("fidelity must lie in (0, 1]");
  return (1.0 - P_delta_x) / P_delta_x * omega_N * omega_N / (delta_x * delta_x);
}

inline NoiseEstimate gamma1_from_slope(const std::string& parameter, double slope_sq, double psd) {
  if (slope_sq < 0.0 || psd < 0.0) throw std::invalid_argument("slope and spectral density must be non-negative");
  return {parameter, psd, slope_sq, slope_sq * psd};
}

inline NoiseEstimate gamma1_estimate(const std::string& parameter, double delta_x, double P_delta_x, double omega_N, double psd) {
  return gamma1_from_slope(parameter, detuning_slope_sq(delta_x, P_delta_x, omega_N), psd);
}

struct TwoLevelFit {
  double omega_N = 0.0;
  double delta_eff = 0.0;  // >= 0; the sign is not observable from P
};

inline TwoLevelFit effective_two_level_fit(double max_transfer, double omega_N) {
  if (max_transfer > 1.0 + 1e-9) throw std::invalid_argument("transfer amplitude exceeds 1");
  if (!(max_transfer > 0.0)) throw std::invalid_argument("transfer amplitude must be positive");
  const double P = std::min(max_transfer, 1.0);
  return {omega_N, omega_N * std::sqrt((1.0 - P) / P)};
}

inline TwoLevelFit effective_two_level_fit(const TrajectoryResult& traj, double omega_N) {
  return effective_two_level_fit(traj.flip_probability, omega_N);
}

// Off-resonant scattering rate (Omega_E / delta)^2 Gamma for a drive detuned
// by delta from the nearest excited level. Reporting only.
inline double scattering_rate_estimate(double omega_E, double delta, double gamma) {
  if (delta == 0.0) throw std::invalid_argument("detuning from the excited level must be nonzero");
  return (omega_E / delta) * (omega_E / delta) * gamma;
}

}  // namespace oner
