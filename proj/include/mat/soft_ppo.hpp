#pragma once

#include <functional>
#include <optional>
#include <string>

#include "mat/gae.hpp"
#include "mat/optim.hpp"
#include "mat/policy_net.hpp"
#include "mat/sim_env.hpp"

namespace mat::rl {

struct TrainerConfig {
  double gamma = 0.999;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double temperature = 5e-4;  // soft advantage-target coefficient
  int actors = 10;
  int episodes_per_batch_per_actor = 30;
  int horizon = 250;
  int epochs_per_batch = 10;
  double lr = 1e-4;
  int policy_minibatch = 350;
  int baseline_minibatch = 200;
  double grad_clip = 200.0;
  double vf_coeff = 1.0;
  bool normalize_advantages = true;
  bool include_rotation_logprob = true;
  int hidden = 128;
  bool xyz_time_pool = false;
  int n_threads = 0;  // 0 = hardware concurrency
  int total_batches = 50;
  double stop_at_success_rate = -1.0;  // negative disables early stop
  int checkpoint_every = 0;            // extra numbered snapshots, 0 = latest only

  // Scene generation during training.
  double single_scene_prob = 0.5;
  double train_noise_cm = 0.0;
  bool random_initial_roll = false;
  sim::ObjectPool pool;
  int clutter_lo = 2;
  int clutter_hi = 30;

  void validate() const;
  int resolved_threads() const;
};

struct StepRecord {
  std::vector<float> obs;  // encoded observation (promoted to double at use)
  ActionSample sample;
  ResolvedAction resolved;
  double logp_old = 0.0;
  double reward = 0.0;
  double value = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

struct Trajectory {
  std::vector<StepRecord> steps;
  bool success = false;
  double episode_return = 0.0;
};

struct RolloutBatch {
  std::vector<Trajectory> trajectories;
  int total_steps = 0;
  double success_rate = 0.0;
};

// actors x episodes_per_batch_per_actor complete episodes under an immutable
// policy snapshot, merged in actor order. All randomness derives from
// (seed, batch_index, actor, episode), so resumed runs reproduce rollouts.
RolloutBatch collect_rollouts(const policy::Net& policy, const policy::Net& value,
                              const sim::EnvConfig& env_cfg, const TrainerConfig& cfg,
                              double delta_finger, std::uint64_t seed, int batch_index);

// Fills advantages/returns per trajectory and optionally normalizes the
// advantages across the batch.
void fill_advantages(RolloutBatch& batch, double gamma, double lambda, bool normalize);

// Eq-style losses over whole batches (no gradients); unit-test surface.
double soft_clipped_policy_loss(const RolloutBatch& batch, const policy::Net& policy, double eps,
                                double alpha, bool include_rotation = true);
double baseline_loss(const RolloutBatch& batch, const policy::Net& value, double vf_coeff = 1.0);

// Mean loss over `steps` with the gradient accumulated into `grad` (caller
// zeroes it). Exposed for the finite-difference checks.
double policy_loss_and_grad(std::span<const StepRecord* const> steps, const policy::Net& policy,
                            double eps, double alpha, bool include_rotation,
                            std::span<double> grad);
double value_loss_and_grad(std::span<const StepRecord* const> steps, const policy::Net& value,
                           double vf_coeff, std::span<double> grad);

struct UpdateMetrics {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
  double mean_ratio = 0.0;
  double mean_entropy = 0.0;  // -mean log pi
};

// Shuffled minibatch epochs with global-norm gradient clipping and Adam
// steps. Deterministic for a fixed (seed, batch_index, thread count).
UpdateMetrics update(const RolloutBatch& batch, policy::Net& policy, policy::Net& value,
                     optim::Adam& adam_policy, optim::Adam& adam_value, const TrainerConfig& cfg,
                     std::uint64_t seed, int batch_index);

// delta_finger_angle from the best success rate so far: anneals linearly
// from 0.4 rad (rate 0) to 0.1 rad (rate 1).
double curriculum_delta(double current_max_success_rate);

struct CurriculumState {
  double current_max_success_rate = 0.0;
  double delta_finger_angle = 0.4;
};

struct TrainResult {
  int batches_run = 0;
  long long total_env_steps = 0;
  double final_success_rate = 0.0;
  double max_success_rate = 0.0;
  std::string policy_checkpoint;
  std::string metrics_csv;
};

// Full training loop: alternate collect/update, measure the batch success
// rate, advance the curriculum, persist checkpoints and one metrics row per
// batch under out_dir. `resume_state` continues a previous run bit-exactly.
TrainResult train(const TrainerConfig& cfg, const sim::EnvConfig& env_cfg, std::uint64_t seed,
                  const std::string& out_dir,
                  const std::optional<std::string>& resume_state = std::nullopt);

}  // namespace mat::rl
