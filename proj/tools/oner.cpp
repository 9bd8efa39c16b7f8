// Copyright 2026 The oner-sim Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "oner/commands.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optical nuclear electric resonance simulator for 87Sr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("oner-sim ") + oner::kVersion);

  std::string config_path, out_dir = ".", value;
  unsigned threads = oner::default_threads();
  bool full_fidelity = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--full-fidelity", full_fidelity, "fine uniform grids (hours)");
  };
  const char* descriptions[][2] = {{"levels", "Breit-Rabi levels and excited-state projections"},
                                   {"simulate", "single driven open-system evolution"},
                                   {"scan", "modulation-period scan with peak detection"},
                                   {"grid", "period scans over fields and Rabi frequencies"},
                                   {"floquet", "mixture measure over a period window"},
                                   {"stability", "fidelity under parameter perturbations"},
                                   {"noise", "Gamma_1 estimates from spectral densities"}};
  for (const auto& d : descriptions) add_common(app.add_subcommand(d[0], d[1]));
  auto* convert = app.add_subcommand("convert", "Rabi frequency <-> intensity, e.g. \"20 MHz\" or \"1 W/cm2\"");
  convert->add_option("value", value, "quantity with unit")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "convert") {
      std::cout << value << " -> " << oner::run_convert(value) << '\n';
      return 0;
    }
    const oner::RunConfig cfg = config_path.empty() ? oner::parse_config(oner::Json::object()) : oner::load_config(config_path);
    oner::CommandContext ctx;
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    ctx.full_fidelity = full_fidelity;
    ctx.log = &std::cerr;
    oner::Json summary;
    if (name == "levels") summary = oner::run_levels(cfg, ctx);
    else if (name == "simulate") summary = oner::run_simulate(cfg, ctx);
    else if (name == "scan") summary = oner::run_scan(cfg, ctx);
    else if (name == "grid") summary = oner::run_grid(cfg, ctx);
    else if (name == "floquet") summary = oner::run_floquet(cfg, ctx);
    else if (name == "stability") summary = oner::run_stability(cfg, ctx);
    else if (name == "noise") summary = oner::run_noise(cfg, ctx);
    std::cout << summary.dump(2) << '\n';
  } catch (const oner::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const oner::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
