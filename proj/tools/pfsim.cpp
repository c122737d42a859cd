// Command-line front end: scenario configuration, Monte-Carlo driver and
// CSV emission. Exit code 0 on success, 2 on configuration errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pfsim/harness.hpp"
#include "pfsim/scenario.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_path;
  std::string sweep;
  bool timing_only = false;
};

std::pair<std::string, std::vector<double>> parse_sweep(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos) {
    throw pfsim::ConfigError("--sweep expects KEY=v1,v2,...");
  }
  const std::string key = arg.substr(0, eq);
  std::vector<double> values;
  std::stringstream ss(arg.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
  if (values.empty()) throw pfsim::ConfigError("--sweep needs at least one value");
  return {key, values};
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw pfsim::ConfigError("cannot open output file: " + path);
  return file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel SIR particle-filter simulator for bearings-only "
               "binary-sensor source localization"};

  CliOptions opts;
  // Flag overrides are collected as strings and applied on top of the
  // config-file values through the same key parser.
  std::vector<std::pair<std::string, std::string>> overrides;
  auto add_override = [&](const std::string& flag, const std::string& key,
                          const std::string& desc) {
    app.add_option_function<std::string>(
        flag,
        [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
        desc);
  };

  app.add_option("--config", opts.config_path, "Config file (key = value lines)");
  add_override("--dims", "dims", "Arena dimensionality (2 or 3)");
  add_override("--particles", "particles", "Total particle count N (power of 2)");
  add_override("--subfilters", "subfilters", "Sub-filter count K");
  add_override("--alpha", "alpha", "Sensor detection probability");
  add_override("--beta", "beta", "Clutter probability");
  add_override("--std", "std", "Process-noise scale");
  add_override("--step-len", "step_len", "Vehicle step length per time step");
  add_override("--steps", "steps", "Time steps per run (horizon)");
  add_override("--runs", "runs", "Monte-Carlo run count");
  add_override("--seed", "seed", "Base seed");
  add_override("--mode", "mode", "Arithmetic mode: fixed|real");
  add_override("--likelihood", "likelihood", "Likelihood variant: full|own-sector");
  app.add_option("--sweep", opts.sweep, "Parameter sweep KEY=v1,v2,...");
  app.add_option("--out", opts.out_path, "Output CSV path (default: stdout)");
  app.add_flag("--timing", opts.timing_only, "Emit the cycle table only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    pfsim::ScenarioConfig cfg;
    if (!opts.config_path.empty()) cfg = pfsim::load_config_file(opts.config_path);
    for (const auto& [key, value] : overrides) {
      pfsim::apply_config_key(cfg, key, value);
    }
    cfg.validate();

    std::ofstream file;
    std::ostream& out = open_output(file, opts.out_path);

    if (opts.timing_only) {
      pfsim::write_timing_csv(out, cfg);
      return 0;
    }
    if (!opts.sweep.empty()) {
      const auto [key, values] = parse_sweep(opts.sweep);
      pfsim::write_aggregate_csv(out, pfsim::monte_carlo(cfg, key, values));
      return 0;
    }
    if (cfg.runs == 1) {
      pfsim::write_trace_csv(out, pfsim::run_scenario(cfg), cfg.dims);
      return 0;
    }
    pfsim::write_aggregate_csv(out, {pfsim::run_batch(cfg, "", 0.0)});
    return 0;
  } catch (const pfsim::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
