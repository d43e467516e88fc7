#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recourse/error.hpp"
#include "recourse/io.hpp"
#include "recourse/logit.hpp"
#include "recourse/model.hpp"

namespace recourse {

/// Run configuration, read from a line-oriented key=value file. `#` starts a
/// comment line. Every key is optional; unknown keys are rejected.
struct RunConfig {
  logit::TrainConfig train;
  double u = 0.5;
  double m = 0.2;
  std::size_t bins = 20;
  std::size_t calibration_bins = 10;
  std::vector<double> sharpen_betas{1.0, 2.0, 4.0};
  std::optional<std::pair<double, double>> sharpen_band;  // defaults to recourse_band(u, m)
  std::uint64_t draws = 1000000;
  std::size_t grid_steps = 101;

  PolicyParams params() const { return PolicyParams(u, m); }

  Band decision_band() const {
    if (sharpen_band) return Band::open(sharpen_band->first, sharpen_band->second);
    return recourse_band(params());
  }

  void validate() const {
    train.validate();
    (void)params();
    if (bins < 1) throw ValidationError("bins must be >= 1");
    if (calibration_bins < 1) throw ValidationError("calibration_bins must be >= 1");
    if (grid_steps < 2) throw ValidationError("grid_steps must be >= 2");
    if (draws < 1) throw ValidationError("draws must be >= 1");
    if (sharpen_betas.empty()) throw ValidationError("sharpen_betas must not be empty");
    for (double b : sharpen_betas) {
      if (!(b >= 1.0)) throw ValidationError("sharpen_betas entries must be >= 1");
    }
    if (sharpen_band && !(sharpen_band->first < sharpen_band->second)) {
      throw ValidationError("sharpen_band must satisfy lower < upper");
    }
    (void)decision_band();
  }
};

namespace detail {

inline std::uint64_t parse_count(std::string_view v, std::string_view key) {
  long long n = 0;
  if (!io::try_parse_int(v, n) || n < 0) {
    throw ValidationError("config: '" + std::string(key) + "' needs a non-negative integer, got '" +
                          std::string(v) + "'");
  }
  return static_cast<std::uint64_t>(n);
}

}  // namespace detail

inline void apply_config_entry(RunConfig& cfg, std::string_view key, std::string_view value) {
  using detail::parse_count;
  if (key == "seed") {
    cfg.train.seed = parse_count(value, key);
  } else if (key == "train_fraction") {
    cfg.train.train_fraction = io::parse_double(value, key);
  } else if (key == "max_iterations") {
    cfg.train.max_iterations = static_cast<int>(parse_count(value, key));
  } else if (key == "tolerance") {
    cfg.train.tolerance = io::parse_double(value, key);
  } else if (key == "l2") {
    cfg.train.l2 = io::parse_double(value, key);
  } else if (key == "u") {
    cfg.u = io::parse_double(value, key);
  } else if (key == "m") {
    cfg.m = io::parse_double(value, key);
  } else if (key == "bins") {
    cfg.bins = parse_count(value, key);
  } else if (key == "calibration_bins") {
    cfg.calibration_bins = parse_count(value, key);
  } else if (key == "sharpen_betas") {
    cfg.sharpen_betas = io::parse_double_list(value, key);
  } else if (key == "sharpen_band") {
    const auto v = io::parse_double_list(value, key);
    if (v.size() != 2) throw ValidationError("config: sharpen_band needs two values 'lower,upper'");
    cfg.sharpen_band = std::pair{v[0], v[1]};
  } else if (key == "draws") {
    cfg.draws = parse_count(value, key);
  } else if (key == "grid_steps") {
    cfg.grid_steps = parse_count(value, key);
  } else {
    throw ValidationError("config: unknown key '" + std::string(key) + "'");
  }
}

inline RunConfig parse_config(std::string_view text, RunConfig cfg = {}) {
  std::size_t line_no = 0;
  for (std::string_view line : io::split(text, '\n')) {
    ++line_no;
    line = io::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    apply_config_entry(cfg, io::trim(line.substr(0, eq)), io::trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

}  // namespace recourse
