// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

// Subcommand implementations behind the oner CLI. Each writes its CSV files
// and a manifest into ctx.out_dir and returns a short summary.

#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "oner/analysis.hpp"
#include "oner/config.hpp"
#include "oner/dynamics.hpp"
#include "oner/floquet.hpp"
#include "oner/io.hpp"

namespace oner {

struct CommandContext {
  std::filesystem::path out_dir = ".";
  unsigned threads = default_threads();
  bool full_fidelity = false;
  std::ostream* log = nullptr;

  void say(const std::string& s) const {
    if (log) *log << s << '\n';
  }
};

namespace cmd_detail {

inline double to_mhz(double w) { return w / kTwoPi; }
inline double to_khz(double w) { return w / kTwoPi * 1e3; }

inline std::string state_label(const AtomSpec& spec, int index) {
  const auto b = BasisState::from_index(spec, index);
  const std::string mi = (b.m_I.twice() < 0 ? "m" : "p") + std::to_string(std::abs(b.m_I.twice())) + "_2";
  if (b.manifold == Manifold::S) return "S0_" + mi;
  return "P" + std::string(b.m_J < 0 ? "m1" : (b.m_J > 0 ? "p1" : "0")) + "_" + mi;
}

inline std::filesystem::path prepare(const CommandContext& ctx) {
  std::filesystem::create_directories(ctx.out_dir);
  return ctx.out_dir;
}

inline DriveConfig require_T(const RunConfig& cfg) {
  if (!cfg.has_T) throw ConfigError("missing required key 'drive.T'");
  return cfg.drive;
}

inline std::vector<std::string> ladder_header(const LadderStats& l) {
  auto n = [](double v) { return format_number(v); };
  std::vector<std::string> h{"peaks: " + std::to_string(l.count)};
  if (l.count >= 2) {
    h.push_back("T_spacing_us: mean=" + n(l.T_spacing_mean) + " dispersion=" + n(l.T_spacing_dispersion));
    h.push_back("inverse_T_spacing_per_us: mean=" + n(l.inverse_spacing_mean) + " dispersion=" + n(l.inverse_spacing_dispersion));
  }
  if (l.count >= 1) {
    h.push_back("delta_E_eff_MHz: mean=" + n(to_mhz(l.delta_E_mean)) + " spread=" + n(l.delta_E_spread));
    h.push_back(std::string("omega_N_decreasing: ") + (l.omega_N_decreasing ? "yes" : "no"));
  }
  return h;
}

inline void write_scan(const std::filesystem::path& dir, const std::string& stem, const Provenance& prov, const std::vector<std::string>& head,
                       const PeriodScanResult& r, Manifest& manifest, const Json& cell = Json::object()) {
  {
    CsvWriter w(dir / (stem + ".csv"), prov, head,
                {"T_us", "P_flip", "log10_1mP", "flip_time_us", "omega_N_kHz", "omega_N_bound_kHz", "omega_dft_kHz", "max_P3P1",
                 "max_other", "N_sc", "trace_error"});
    for (const auto& p : r.points)
      w.row({p.T, p.P, log_infidelity(p.P), p.flip_time, optional_cell(p.omega_N, 1e3 / kTwoPi), optional_cell(p.omega_N_bound, 1e3 / kTwoPi),
             optional_cell(p.omega_dft, 1e3 / kTwoPi), p.max_excited, p.max_leakage, optional_cell(p.n_sc), p.trace_error});
    manifest.add_file(w.path(), w.rows(), cell);
  }
  auto h = head;
  for (const auto& l : ladder_header(r.ladder)) h.push_back(l);
  CsvWriter w(dir / (stem + "_peaks.csv"), prov, h,
              {"order", "T_us", "P_flip", "log10_1mP", "omega_N_kHz", "omega_N_bound_kHz", "max_P3P1", "N_sc", "photon_order", "delta_E_eff_MHz",
               "accepted"});
  for (size_t k = 0; k < r.peaks.size(); ++k) {
    const auto& p = r.peaks[k].point;
    w.row({static_cast<long long>(r.peaks[k].order), p.T, p.P, log_infidelity(p.P), optional_cell(p.omega_N, 1e3 / kTwoPi),
           optional_cell(p.omega_N_bound, 1e3 / kTwoPi), p.max_excited, optional_cell(p.n_sc),
           static_cast<long long>(r.ladder.photon_order[k]), to_mhz(r.ladder.delta_E[k]),
           std::string(accepted_stable_peak(p) ? "yes" : "no")});
  }
  manifest.add_file(w.path(), w.rows(), cell);
}

inline ScanPlan plan_for(const RunConfig& cfg, const CommandContext& ctx) {
  ScanPlan p = cfg.scan;
  p.full_fidelity = ctx.full_fidelity;
  return p;
}

}  // namespace cmd_detail

// Breit-Rabi levels and the projections of the three lowest excited states.
inline Json run_levels(const RunConfig& cfg, const CommandContext& ctx) {
  using namespace cmd_detail;
  const auto dir = prepare(ctx);
  const auto prov = Provenance::make("levels", cfg);
  Manifest manifest(dir, prov, cfg.document);
  const auto& spec = cfg.atom;
  const auto grid = uniform_grid(cfg.levels_B_min, cfg.levels_B_max, cfg.levels_B_step);
  const auto scan = breit_rabi_scan(spec, grid);
  const int d = 3 * spec.spin_dim();
  double worst_match = 1.0;
  {
    CsvWriter w(dir / "levels.csv", prov, {"energies relative to the optical reference, excited manifold"},
                {"B_G", "eigenvalue_index", "energy_MHz", "dominant_mJ", "dominant_mI", "overlap", "track", "match_overlap"});
    for (const auto& pt : scan)
      for (int k = 0; k < d; ++k) {
        const auto lab = excited_label(spec, pt.dominant[k]);
        w.row({pt.B, static_cast<long long>(k), to_mhz(pt.energies(k)), static_cast<long long>(lab.m_J), lab.m_I.value(),
               pt.dominant_weight[k], static_cast<long long>(pt.track[k]), pt.match_overlap[k]});
        worst_match = std::min(worst_match, pt.match_overlap[k]);
      }
    manifest.add_file(w.path(), w.rows());
  }
  {
    std::vector<std::string> cols{"B_G", "state", "energy_MHz"};
    for (int k = 0; k < d; ++k) cols.push_back("w_" + state_label(spec, spec.spin_dim() + k));
    CsvWriter w(dir / "projections.csv", prov, {"three lowest excited eigenstates, |<P,m_J,m_I|psi>|^2"}, cols);
    for (const auto& pt : scan)
      for (int s = 0; s < 3; ++s) {
        std::vector<Cell> row{pt.B, static_cast<long long>(s), to_mhz(pt.energies(s))};
        for (int k = 0; k < d; ++k) row.push_back(std::norm(pt.vectors(k, s)));
        w.row(row);
      }
    manifest.add_file(w.path(), w.rows());
  }
  manifest.complete();
  return {{"points", scan.size()}, {"worst_match_overlap", worst_match}};
}

inline Json run_simulate(const RunConfig& cfg, const CommandContext& ctx) {
  using namespace cmd_detail;
  const auto dir = prepare(ctx);
  const auto prov = Provenance::make("simulate", cfg);
  Manifest manifest(dir, prov, cfg.document);
  AtomSpec spec = cfg.atom;
  if (cfg.closed_system) spec.gamma = 0.0;
  const auto model = build_drive_model(spec, require_T(cfg));
  for (const auto& w : model.warnings) ctx.say("warning: " + w);
  const double horizon = cfg.simulate_horizon > 0.0 ? cfg.simulate_horizon : cfg.horizon;
  const int start = ground_index(spec, -spec.nuclear_spin.value());

  TrajectoryResult tr;
  const bool direct = cfg.solver.method == "direct" || (cfg.sample_dt > 0.0 && cfg.solver.method != "period-map");
  if (direct) {
    EvolveOptions eo;
    eo.integrator = cfg.solver.integrator;
    const double dt = cfg.sample_dt > 0.0 ? cfg.sample_dt : model.config.T / cfg.solver.nodes;
    tr = evolve(model, pure_density(spec, start), horizon, dt, eo);
  } else {
    tr = simulate_from_ground(model, start, horizon, cfg.solver.flip(horizon).map);
  }
  const auto fp = summarize(tr);

  std::vector<std::string> head{drive_header(spec, model.config, true), "method: " + tr.method,
                                std::string("closed_system: ") + (cfg.closed_system ? "yes" : "no"),
                                "flip_probability: " + format_number(fp.P), "flip_time_us: " + format_number(fp.flip_time),
                                "omega_N_kHz: " + (fp.omega_N ? format_number(to_khz(*fp.omega_N)) : std::string("unresolved")),
                                "max_P3P1: " + format_number(fp.max_excited),
                                "N_sc: " + (fp.n_sc ? format_number(*fp.n_sc) : std::string("n/a")),
                                "max_trace_error: " + format_number(tr.max_trace_error)};
  {
    std::vector<std::string> cols{"time_us", "P_m9_2", "P_m5_2", "P_3P1", "P_other"};
    for (int k = 0; k < spec.dim(); ++k) cols.push_back(state_label(spec, k));
    CsvWriter w(dir / "trajectory.csv", prov, head, cols);
    for (size_t i = 0; i < tr.times.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      std::vector<Cell> row{tr.times[i], tr.populations(r, tr.initial_index), tr.populations(r, tr.target_index), tr.excited_occupation[i],
                            tr.other_states_leakage[i]};
      for (int k = 0; k < spec.dim(); ++k) row.push_back(tr.populations(r, k));
      w.row(row);
    }
    manifest.add_file(w.path(), w.rows());
  }
  {
    CsvWriter w(dir / "strobe.csv", prov, head, {"k", "time_us", "P_m5_2"});
    for (size_t k = 0; k < tr.strobe_times.size(); ++k) w.row({static_cast<long long>(k), tr.strobe_times[k], tr.strobe_target[k]});
    manifest.add_file(w.path(), w.rows());
  }
  manifest.complete();
  Json j = {{"flip_probability", fp.P}, {"flip_time_us", fp.flip_time}, {"max_P3P1", fp.max_excited}, {"method", tr.method}};
  if (fp.omega_N) j["omega_N_kHz"] = to_khz(*fp.omega_N);
  return j;
}

inline Json run_scan(const RunConfig& cfg, const CommandContext& ctx) {
  using namespace cmd_detail;
  const auto dir = prepare(ctx);
  const auto prov = Provenance::make("scan", cfg);
  Manifest manifest(dir, prov, cfg.document);
  const auto plan = plan_for(cfg, ctx);
  const auto r = windowed_scan(cfg.atom, cfg.drive, plan, cfg.solver.flip(cfg.horizon), ctx.threads);
  std::vector<std::string> head{drive_header(cfg.atom, cfg.drive, false),
                                std::string("mode: ") + (plan.full_fidelity ? "full-fidelity uniform grid" : "windowed")};
  write_scan(dir, "scan", prov, head, r, manifest);
  manifest.complete();
  Json peaks = Json::array();
  for (const auto& p : r.peaks) peaks.push_back({{"T_us", p.point.T}, {"P", p.point.P}});
  return {{"points", r.points.size()}, {"peaks", peaks}};
}

inline Json run_grid(const RunConfig& cfg, const CommandContext& ctx) {
  using namespace cmd_detail;
  const auto dir = prepare(ctx);
  const auto prov = Provenance::make("grid", cfg);
  Manifest manifest(dir, prov, cfg.document);
  Json cells = Json::array();
  for (double B : cfg.grid_B)
    for (double w : cfg.grid_omega_E)
      cells.push_back({{"B_G", B}, {"omega_E_MHz", to_mhz(w)}, {"status", "pending"}});
  manifest.set("cells", cells);
  const auto plan = plan_for(cfg, ctx);
  CsvWriter summary(dir / "grid.csv", prov, {}, {"B_G", "omega_E_MHz", "peaks", "best_P", "first_peak_T_us", "first_peak_omega_N_kHz"});
  grid_scan(cfg.atom, cfg.drive, cfg.grid_B, cfg.grid_omega_E, plan, cfg.solver.flip(cfg.horizon), ctx.threads,
            [&](size_t index, const GridCell& cell) {
              const std::string stem = "scan_B" + format_number(cell.B) + "G_W" + format_number(to_mhz(cell.omega_E)) + "MHz";
              DriveConfig c = cfg.drive;
              c.B = cell.B;
              c.omega_E = cell.omega_E;
              c.detuning.reset();
              const Json tag = {{"B_G", cell.B}, {"omega_E_MHz", to_mhz(cell.omega_E)}};
              write_scan(dir, stem, prov, {drive_header(cfg.atom, c, false)}, cell.scan, manifest, tag);
              double best = 0.0;
              for (const auto& p : cell.scan.peaks) best = std::max(best, p.point.P);
              const auto& pk = cell.scan.peaks;
              summary.row({cell.B, to_mhz(cell.omega_E), static_cast<long long>(pk.size()), best,
                           pk.empty() ? Cell{std::monostate{}} : Cell{pk.front().point.T},
                           pk.empty() ? Cell{std::monostate{}} : optional_cell(pk.front().point.omega_N, 1e3 / kTwoPi)});
              cells[index]["status"] = "complete";
              cells[index]["file"] = stem + ".csv";
              manifest.set("cells", cells);
              ctx.say("cell " + std::to_string(index + 1) + "/" + std::to_string(cells.size()) + " done");
            });
  manifest.add_file(summary.path(), summary.rows());
  manifest.complete();
  return {{"cells", cells.size()}};
}

inline Json run_floquet(const RunConfig& cfg, const CommandContext& ctx) {
  using namespace cmd_detail;
  const auto dir = prepare(ctx);
  const auto prov = Provenance::make("floquet", cfg);
  Manifest manifest(dir, prov, cfg.document);
  const auto& spec = cfg.atom;
  std::vector<double> grid;
  if (cfg.floquet_window) {
    grid = uniform_grid(cfg.floquet_T_min, cfg.floquet_T_max, cfg.floquet_T_step);
  } else {
    const double T = require_T(cfg).T;
    grid = uniform_grid(T - 0.025, T + 0.025, cfg.floquet_T_step);
  }
  const auto pts = parallel_map(grid.size(), ctx.threads, [&](size_t i) { return floquet_point(spec, cfg.drive, grid[i], cfg.solver.floquet); });
  const size_t nq = pts.empty() ? 0 : pts.front().quasi_energies.size();
  std::vector<std::string> cols{"T_us", "mixture", "unitarity", "mode1_P_m9_2", "mode1_P_m5_2", "mode2_P_m9_2", "mode2_P_m5_2"};
  for (size_t k = 0; k < nq; ++k) cols.push_back("quasi_energy_" + std::to_string(k) + "_MHz");
  std::vector<std::string> head{drive_header(spec, cfg.drive, false), "closed system; block holding |S,0,-I>"};
  double best_M = -1.0, best_T = 0.0;
  {
    CsvWriter w(dir / "floquet.csv", prov, head, cols);
    for (const auto& p : pts) {
      std::vector<Cell> row{p.T, p.mixture, p.unitarity, p.top_overlaps[0][0], p.top_overlaps[0][1], p.top_overlaps[1][0], p.top_overlaps[1][1]};
      for (size_t k = 0; k < nq; ++k) row.push_back(k < p.quasi_energies.size() ? Cell{to_mhz(p.quasi_energies[k])} : Cell{std::monostate{}});
      w.row(row);
      if (p.mixture > best_M) best_M = p.mixture, best_T = p.T;
    }
    manifest.add_file(w.path(), w.rows());
  }
  Json out = {{"points", pts.size()}, {"max_mixture", best_M}, {"T_at_max_us", best_T}};
  if (cfg.floquet_periods > 0) {
    AtomSpec closed = spec;
    closed.gamma = 0.0;
    const auto model = build_drive_model(closed, require_T(cfg));
    const double I = spec.nuclear_spin.value();
    const int a = ground_index(spec, -I), b = ground_index(spec, -I + 2.0);
    PropagatorOptions po;
    po.integrator = cfg.solver.floquet;
    const auto blk = floquet_block(model, a, po);
    ComplexVector psi_b = ComplexVector::Zero(static_cast<Eigen::Index>(blk.states.size()));
    psi_b(blk.local(a)) = 1.0;
    const int K = cfg.floquet_periods;
    const auto fl = blk.local(b) >= 0 ? floquet_stroboscopic_populations(blk.result, psi_b, blk.local(b), K) : std::vector<double>(K + 1, 0.0);
    ComplexVector psi = ComplexVector::Zero(spec.dim());
    psi(a) = 1.0;
    std::vector<double> stops;
    for (int k = 1; k <= K; ++k) stops.push_back(k * model.config.T);
    const auto direct = evolve_state(model, psi, stops, cfg.solver.floquet);
    double worst = 0.0;
    CsvWriter w(dir / "floquet_strobe.csv", prov, {drive_header(spec, model.config, true)}, {"k", "time_us", "P_m5_2_floquet", "P_m5_2_direct", "difference"});
    for (int k = 0; k <= K; ++k) {
      const double d = k == 0 ? 0.0 : std::norm(direct[k - 1](b));
      worst = std::max(worst, std::abs(fl[k] - d));
      w.row({static_cast<long long>(k), k * model.config.T, fl[k], d, fl[k] - d});
    }
    manifest.add_file(w.path(), w.rows());
    out["strobe_max_difference"] = worst;
  }
  manifest.complete();
  return out;
}

inline Json run_stability(const RunConfig& cfg, const CommandContext& ctx) {
  using namespace cmd_detail;
  const auto dir = prepare(ctx);
  const auto prov = Provenance::make("stability", cfg);
  Manifest manifest(dir, prov, cfg.document);
  const auto flip = cfg.solver.flip(cfg.horizon);
  DriveConfig base = cfg.drive;
  if (cfg.stability_peak > 0) {
    const auto scan = windowed_scan(cfg.atom, cfg.drive, plan_for(cfg, ctx), flip, ctx.threads);
    if (static_cast<int>(scan.peaks.size()) < cfg.stability_peak)
      throw NumericalError("stability: only " + std::to_string(scan.peaks.size()) + " peaks found");
    base.T = scan.peaks[cfg.stability_peak - 1].point.T;
  } else {
    base = require_T(cfg);
  }
  auto axes = cfg.stability_axes;
  if (ctx.full_fidelity)
    for (auto& ax : axes) ax.offsets = symmetric_offsets(ax.offsets.back(), 21);
  const auto m = stability_matrix(cfg.atom, base, axes, cfg.stability_planes, flip, ctx.threads);
  std::vector<std::string> head{drive_header(cfg.atom, m.base, true), "base_P: " + format_number(m.base_P)};
  auto shown = [&](Parameter p, double o) { return o / unit_table(parameter_dimension(p))[0].factor; };
  auto scaled = [&](Parameter p, double o) {
    for (const auto& u : unit_table(parameter_dimension(p)))
      if (parameter_unit(p) == u.name) return o / u.factor;
    return shown(p, o);
  };
  {
    CsvWriter w(dir / "stability_slices.csv", prov, head, {"parameter", "offset", "unit", "P_flip", "log10_1mP"});
    for (size_t i = 0; i < m.axes.size(); ++i) {
      const auto p = m.axes[i].parameter;
      for (size_t q = 0; q < m.axes[i].offsets.size(); ++q)
        w.row({parameter_name(p), scaled(p, m.axes[i].offsets[q]), parameter_unit(p), m.slice_P[i][q], log_infidelity(m.slice_P[i][q])});
    }
    manifest.add_file(w.path(), w.rows());
  }
  if (!m.planes.empty()) {
    CsvWriter w(dir / "stability_planes.csv", prov, head,
                {"parameter_a", "parameter_b", "offset_a", "offset_b", "unit_a", "unit_b", "P_flip", "log10_1mP"});
    for (const auto& pl : m.planes) {
      const auto pa = m.axes[pl.a].parameter, pb = m.axes[pl.b].parameter;
      for (Eigen::Index r = 0; r < pl.P.rows(); ++r)
        for (Eigen::Index c = 0; c < pl.P.cols(); ++c)
          w.row({parameter_name(pa), parameter_name(pb), scaled(pa, m.axes[pl.a].offsets[r]), scaled(pb, m.axes[pl.b].offsets[c]),
                 parameter_unit(pa), parameter_unit(pb), pl.P(r, c), log_infidelity(pl.P(r, c))});
    }
    manifest.add_file(w.path(), w.rows());
  }
  manifest.complete();
  Json slices = Json::object();
  for (size_t i = 0; i < m.axes.size(); ++i) slices[parameter_name(m.axes[i].parameter)] = *std::min_element(m.slice_P[i].begin(), m.slice_P[i].end());
  return {{"base_P", m.base_P}, {"T_us", m.base.T}, {"min_P_per_slice", slices}};
}

inline Json run_noise(const RunConfig& cfg, const CommandContext& ctx) {
  using namespace cmd_detail;
  if (cfg.noise.empty()) throw ConfigError("missing required key 'noise'");
  const auto dir = prepare(ctx);
  const auto prov = Provenance::make("noise", cfg);
  Manifest manifest(dir, prov, cfg.document);
  CsvWriter w(dir / "noise.csv", prov, {"rates in 1/s; Gamma_1 = slope_sq * S_x(Omega_N)"},
              {"parameter", "omega_N_per_s", "slope_sq", "psd_per_s", "gamma1_per_s"});
  Json out = Json::array();
  for (const auto& e : cfg.noise) {
    const double slope = e.slope_sq ? *e.slope_sq : detuning_slope_sq(*e.delta, *e.P_delta, e.omega_N);
    const double psd = e.psd ? *e.psd : e.omega_N * e.omega_N * *e.phase_noise;
    const auto est = gamma1_from_slope(e.parameter, slope, psd);
    w.row({est.parameter, e.omega_N, est.slope_sq, est.psd, est.gamma1});
    ctx.say(est.parameter + ": Gamma_1 = " + format_number(est.gamma1) + " 1/s");
    out.push_back({{"parameter", est.parameter}, {"gamma1_per_s", est.gamma1}});
  }
  manifest.add_file(w.path(), w.rows());
  manifest.complete();
  return out;
}

// "20 MHz" -> intensity, "1 W/cm2" -> Rabi frequency.
inline std::string run_convert(const std::string& value) {
  const auto q = parse_quantity(value, "value");
  const IntensityConversion conv;
  if (q.dimension == Dimension::Frequency) return format_number(conv.rabi_to_intensity(q.value)) + " W/cm2";
  if (q.dimension == Dimension::Intensity) return format_quantity(conv.intensity_to_rabi(q.value), Dimension::Frequency, "MHz");
  throw ConfigError("convert: expected a Rabi frequency or an intensity, got '" + value + "'");
}

}  // namespace oner
