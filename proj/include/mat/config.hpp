#pragma once

#include <string>

#include "mat/sim_env.hpp"
#include "mat/soft_ppo.hpp"

namespace mat::harness {

// Evaluation-side settings: disjoint seen/novel object pools and sweep
// defaults.
struct EvalConfigSection {
  sim::ObjectPool seen_pool;
  sim::ObjectPool novel_pool{.disc_probability = 1.0,
                             .disc_radius_lo = 0.055,
                             .disc_radius_hi = 0.07,
                             .box_half_lo = 0.045,
                             .box_half_hi = 0.06,
                             .height_lo = 0.03,
                             .height_hi = 0.06};
  int scenes_per_category = 20;
  int trials = 5;
  int horizon = 60;
  double mat_delta_finger = 0.1;
};

struct RunConfig {
  rl::TrainerConfig trainer;
  sim::EnvConfig env;
  EvalConfigSection eval;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Strict JSON parsing: unknown keys are rejected, known keys override the
// defaults. Round-trips: parse(dump(cfg)) == cfg.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);
std::string dump_config(const RunConfig& cfg);
void write_config_file(const RunConfig& cfg, const std::string& path);

}  // namespace mat::harness
