#pragma once

// Scenario configuration: defaults, flat key-value config files
// (`key = value`, `#` comments, comma-separated arrays) and validation.

#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "pfsim/filterbank.hpp"
#include "pfsim/timing.hpp"

namespace pfsim {

enum class ArithMode { Fixed, Real };
enum class LikelihoodVariant { Full, OwnSector };

struct ScenarioConfig {
  int dims = 2;
  std::size_t n_particles = 256;
  std::size_t k_subfilters = 8;
  double alpha = 0.8;
  double beta = 0.6;
  double noise_std = 1.0;
  double step_len = 0.5;
  int horizon = 250;  // steps per run
  int runs = 100;
  std::uint64_t seed = 1;
  ArithMode mode = ArithMode::Fixed;
  LikelihoodVariant likelihood = LikelihoodVariant::Full;
  std::array<double, 3> source_pos{6.0, 22.0, 0.0};
  std::array<double, 3> vehicle_start{38.0, -4.0, 0.0};
  double vehicle_heading0 = 0.0;  // radians
  double localized_threshold = 2.5;
  bool no_routing = false;
  Latency latency{};
  double f_clk = 100e6;

  int sectors() const { return dims == 2 ? 8 : 16; }

  void validate() const {
    if (dims != 2 && dims != 3) throw ConfigError("dims must be 2 or 3");
    if (k_subfilters == 0 || n_particles % k_subfilters != 0) {
      throw ConfigError("subfilters must divide particles");
    }
    if (!is_pow2(n_particles) || !is_pow2(n_particles / k_subfilters)) {
      throw ConfigError("particles and particles-per-subfilter must be powers of 2");
    }
    if (alpha < 0 || alpha > 1 || beta < 0 || beta > 1) {
      throw ConfigError("alpha and beta must lie in [0, 1]");
    }
    if (noise_std < 0) throw ConfigError("std must be non-negative");
    if (step_len <= 0) throw ConfigError("step-len must be positive");
    if (horizon <= 0) throw ConfigError("steps must be positive");
    if (runs <= 0) throw ConfigError("runs must be positive");
    if (localized_threshold <= 0) throw ConfigError("threshold must be positive");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::array<double, 3> parse_vec(const std::string& value) {
  std::array<double, 3> v{};
  std::stringstream ss(value);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',') && i < 3) v[i++] = std::stod(trim(item));
  return v;
}

}  // namespace detail

inline void apply_config_key(ScenarioConfig& cfg, const std::string& key,
                             const std::string& value) {
  using detail::parse_vec;
  if (key == "dims") cfg.dims = std::stoi(value);
  else if (key == "particles") cfg.n_particles = std::stoull(value);
  else if (key == "subfilters") cfg.k_subfilters = std::stoull(value);
  else if (key == "alpha") cfg.alpha = std::stod(value);
  else if (key == "beta") cfg.beta = std::stod(value);
  else if (key == "std") cfg.noise_std = std::stod(value);
  else if (key == "step_len" || key == "step-len") cfg.step_len = std::stod(value);
  else if (key == "steps") cfg.horizon = std::stoi(value);
  else if (key == "runs") cfg.runs = std::stoi(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "mode") {
    if (value == "fixed") cfg.mode = ArithMode::Fixed;
    else if (value == "real") cfg.mode = ArithMode::Real;
    else throw ConfigError("mode must be fixed or real");
  } else if (key == "likelihood") {
    if (value == "full") cfg.likelihood = LikelihoodVariant::Full;
    else if (value == "own-sector") cfg.likelihood = LikelihoodVariant::OwnSector;
    else throw ConfigError("likelihood must be full or own-sector");
  } else if (key == "source_pos") cfg.source_pos = parse_vec(value);
  else if (key == "vehicle_start") cfg.vehicle_start = parse_vec(value);
  else if (key == "vehicle_heading0") cfg.vehicle_heading0 = std::stod(value);
  else if (key == "localized_threshold") cfg.localized_threshold = std::stod(value);
  else if (key == "no_routing") cfg.no_routing = (value == "1" || value == "true");
  else if (key == "tau_s") cfg.latency.tau_s = std::stoi(value);
  else if (key == "tau_i") cfg.latency.tau_i = std::stoi(value);
  else if (key == "tau_r") cfg.latency.tau_r = std::stoi(value);
  else if (key == "f_clk") cfg.f_clk = std::stod(value);
  else throw ConfigError("unknown config key: " + key);
}

inline ScenarioConfig load_config_file(const std::string& path,
                                       ScenarioConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("bad config line: " + line);
    apply_config_key(cfg, detail::trim(line.substr(0, eq)),
                     detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace pfsim
