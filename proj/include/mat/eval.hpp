#pragma once

#include <functional>
#include <optional>
#include <string>

#include "mat/baselines.hpp"
#include "mat/policy_net.hpp"
#include "mat/sim_env.hpp"

namespace mat::harness {

enum class PolicyKind { Mat, OpenLoop, TactileLatch };

PolicyKind policy_kind_from_string(const std::string& name);
std::string to_string(PolicyKind kind);

struct EvalOptions {
  int trials = 5;                  // episodes per scene
  double noise_cm = 0.0;
  bool deterministic = false;      // MAT only: mode actions instead of sampling
  int horizon = 60;
  double mat_delta_finger = 0.1;   // finger increment for the trained policy
  baselines::AblationMode ablation = baselines::AblationMode::None;
  baselines::OpenLoopConfig open_loop;
  baselines::LatchConfig latch;
  std::uint64_t seed = 0;
  bool include_rotation_logprob = true;
};

struct EpisodeRow {
  int scene_index = 0;
  int trial = 0;
  int steps = 0;
  bool success = false;
  double reward_sum = 0.0;
  std::string category;
};

struct CategoryStats {
  std::string category;
  double success_rate_pct = 0.0;  // mean over scenes of per-scene success %
  double std_pct = 0.0;           // std-dev across scenes
  int trials = 0;
  double noise_cm = 0.0;
};

struct EvalReport {
  std::vector<CategoryStats> categories;
  std::vector<EpisodeRow> episodes;
  double overall_success_rate_pct = 0.0;
};

// One CSV row per simulation step: t, joint angles, active cell count,
// action kind, reward.
using TraceSink = std::function<void(int scene_index, int trial, int t,
                                     const std::vector<double>& joints, int contact_count,
                                     const std::string& action_kind, double reward)>;

struct EpisodeResult {
  bool success = false;
  int steps = 0;
  double reward_sum = 0.0;
  bool reopened = false;
};

// Runs one evaluation episode of the selected controller on a scene.
EpisodeResult run_episode(const sim::EnvConfig& env_cfg, const sim::Scene& scene,
                          const policy::Net* policy_net, PolicyKind kind,
                          const EvalOptions& options, Rng& rng, int scene_index = 0,
                          int trial = 0, const TraceSink& trace = nullptr);

// `trials` episodes per scene with a frozen policy; per-category mean/std
// aggregated across scenes. Every reported number is recomputable from the
// returned episode rows.
EvalReport evaluate(const sim::EnvConfig& env_cfg, const std::vector<sim::Scene>& scenes,
                    const policy::Net* policy_net, PolicyKind kind, const EvalOptions& options,
                    const TraceSink& trace = nullptr);

void write_report_csv(const EvalReport& report, PolicyKind kind, const std::string& path);
void write_episodes_csv(const EvalReport& report, const std::string& path);

struct SweepRow {
  std::string policy;
  double noise_cm = 0.0;
  CategoryStats stats;
};

// EvalReport per (policy, noise level), flattened into long-format rows for
// external plotting.
std::vector<SweepRow> sweep(const sim::EnvConfig& env_cfg, const std::vector<sim::Scene>& scenes,
                            const policy::Net* policy_net, const std::vector<double>& levels,
                            const std::vector<PolicyKind>& policies, const EvalOptions& options);

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);

// Two results differ significantly when their mean gap exceeds the larger
// standard deviation.
bool is_significant(double mean_a, double std_a, double mean_b, double std_b);

}  // namespace mat::harness
