#include "mat/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace mat::harness {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config: " + where + " must be an object");
  for (const auto& item : j.items()) {
    if (!allowed.contains(item.key()))
      throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_pool(const json& j, sim::ObjectPool& pool) {
  check_keys(j, {"disc_probability", "disc_radius_lo", "disc_radius_hi", "box_half_lo",
                 "box_half_hi", "height_lo", "height_hi"},
             "pool");
  get_if(j, "disc_probability", pool.disc_probability);
  get_if(j, "disc_radius_lo", pool.disc_radius_lo);
  get_if(j, "disc_radius_hi", pool.disc_radius_hi);
  get_if(j, "box_half_lo", pool.box_half_lo);
  get_if(j, "box_half_hi", pool.box_half_hi);
  get_if(j, "height_lo", pool.height_lo);
  get_if(j, "height_hi", pool.height_hi);
}

json dump_pool(const sim::ObjectPool& pool) {
  json j;
  j["disc_probability"] = pool.disc_probability;
  j["disc_radius_lo"] = pool.disc_radius_lo;
  j["disc_radius_hi"] = pool.disc_radius_hi;
  j["box_half_lo"] = pool.box_half_lo;
  j["box_half_hi"] = pool.box_half_hi;
  j["height_lo"] = pool.height_lo;
  j["height_hi"] = pool.height_hi;
  return j;
}

void parse_hand(const json& j, sim::HandModel& hand) {
  check_keys(j,
             {"n_fingers", "cells_per_link", "joint_min", "joint_max", "finger_base_radius",
              "finger_length", "finger_min_radius", "palm_radius", "finger_azimuths"},
             "env.hand");
  get_if(j, "n_fingers", hand.n_fingers);
  get_if(j, "cells_per_link", hand.cells_per_link);
  get_if(j, "joint_min", hand.joint_min);
  get_if(j, "joint_max", hand.joint_max);
  get_if(j, "finger_base_radius", hand.finger_base_radius);
  get_if(j, "finger_length", hand.finger_length);
  get_if(j, "finger_min_radius", hand.finger_min_radius);
  get_if(j, "palm_radius", hand.palm_radius);
  get_if(j, "finger_azimuths", hand.finger_azimuths);
}

json dump_hand(const sim::HandModel& hand) {
  json j;
  j["n_fingers"] = hand.n_fingers;
  j["cells_per_link"] = hand.cells_per_link;
  j["joint_min"] = hand.joint_min;
  j["joint_max"] = hand.joint_max;
  j["finger_base_radius"] = hand.finger_base_radius;
  j["finger_length"] = hand.finger_length;
  j["finger_min_radius"] = hand.finger_min_radius;
  j["palm_radius"] = hand.palm_radius;
  j["finger_azimuths"] = hand.finger_azimuths;
  return j;
}

void parse_env(const json& j, sim::EnvConfig& env) {
  check_keys(j,
             {"hand", "contact_tolerance", "hover_clearance", "grasp_angle_min_deg",
              "lift_height", "workspace_radius", "joint_move_threshold", "stall_window",
              "reopen_penalty", "grip_gate_rad", "pre_grasp_rad", "planner_jitter_cm",
              "enable_forced_reopen",
              "enable_collision_recovery", "recovery_step", "recovery_max_iters",
              "side_guard_tol_deg", "enable_position_adjust", "enable_orientation_adjust"},
             "env");
  if (j.contains("hand")) parse_hand(j.at("hand"), env.hand);
  get_if(j, "contact_tolerance", env.contact_tolerance);
  get_if(j, "hover_clearance", env.hover_clearance);
  get_if(j, "grasp_angle_min_deg", env.grasp_angle_min_deg);
  get_if(j, "lift_height", env.lift_height);
  get_if(j, "workspace_radius", env.workspace_radius);
  get_if(j, "joint_move_threshold", env.joint_move_threshold);
  get_if(j, "stall_window", env.stall_window);
  get_if(j, "reopen_penalty", env.reopen_penalty);
  get_if(j, "grip_gate_rad", env.grip_gate_rad);
  get_if(j, "pre_grasp_rad", env.pre_grasp_rad);
  get_if(j, "planner_jitter_cm", env.planner_jitter_cm);
  get_if(j, "enable_forced_reopen", env.enable_forced_reopen);
  get_if(j, "enable_collision_recovery", env.enable_collision_recovery);
  get_if(j, "recovery_step", env.recovery_step);
  get_if(j, "recovery_max_iters", env.recovery_max_iters);
  get_if(j, "side_guard_tol_deg", env.side_guard_tol_deg);
  get_if(j, "enable_position_adjust", env.enable_position_adjust);
  get_if(j, "enable_orientation_adjust", env.enable_orientation_adjust);
}

json dump_env(const sim::EnvConfig& env) {
  json j;
  j["hand"] = dump_hand(env.hand);
  j["contact_tolerance"] = env.contact_tolerance;
  j["hover_clearance"] = env.hover_clearance;
  j["grasp_angle_min_deg"] = env.grasp_angle_min_deg;
  j["lift_height"] = env.lift_height;
  j["workspace_radius"] = env.workspace_radius;
  j["joint_move_threshold"] = env.joint_move_threshold;
  j["stall_window"] = env.stall_window;
  j["reopen_penalty"] = env.reopen_penalty;
  j["grip_gate_rad"] = env.grip_gate_rad;
  j["pre_grasp_rad"] = env.pre_grasp_rad;
  j["planner_jitter_cm"] = env.planner_jitter_cm;
  j["enable_forced_reopen"] = env.enable_forced_reopen;
  j["enable_collision_recovery"] = env.enable_collision_recovery;
  j["recovery_step"] = env.recovery_step;
  j["recovery_max_iters"] = env.recovery_max_iters;
  j["side_guard_tol_deg"] = env.side_guard_tol_deg;
  j["enable_position_adjust"] = env.enable_position_adjust;
  j["enable_orientation_adjust"] = env.enable_orientation_adjust;
  return j;
}

void parse_trainer(const json& j, rl::TrainerConfig& t) {
  check_keys(j,
             {"gamma", "gae_lambda", "clip_eps", "temperature", "actors",
              "episodes_per_batch_per_actor", "horizon", "epochs_per_batch", "lr",
              "policy_minibatch", "baseline_minibatch", "grad_clip", "vf_coeff",
              "normalize_advantages", "include_rotation_logprob", "hidden", "xyz_time_pool",
              "n_threads", "total_batches", "stop_at_success_rate", "checkpoint_every",
              "single_scene_prob", "train_noise_cm", "random_initial_roll", "pool", "clutter_lo",
              "clutter_hi"},
             "trainer");
  get_if(j, "gamma", t.gamma);
  get_if(j, "gae_lambda", t.gae_lambda);
  get_if(j, "clip_eps", t.clip_eps);
  get_if(j, "temperature", t.temperature);
  get_if(j, "actors", t.actors);
  get_if(j, "episodes_per_batch_per_actor", t.episodes_per_batch_per_actor);
  get_if(j, "horizon", t.horizon);
  get_if(j, "epochs_per_batch", t.epochs_per_batch);
  get_if(j, "lr", t.lr);
  get_if(j, "policy_minibatch", t.policy_minibatch);
  get_if(j, "baseline_minibatch", t.baseline_minibatch);
  get_if(j, "grad_clip", t.grad_clip);
  get_if(j, "vf_coeff", t.vf_coeff);
  get_if(j, "normalize_advantages", t.normalize_advantages);
  get_if(j, "include_rotation_logprob", t.include_rotation_logprob);
  get_if(j, "hidden", t.hidden);
  get_if(j, "xyz_time_pool", t.xyz_time_pool);
  get_if(j, "n_threads", t.n_threads);
  get_if(j, "total_batches", t.total_batches);
  get_if(j, "stop_at_success_rate", t.stop_at_success_rate);
  get_if(j, "checkpoint_every", t.checkpoint_every);
  get_if(j, "single_scene_prob", t.single_scene_prob);
  get_if(j, "train_noise_cm", t.train_noise_cm);
  get_if(j, "random_initial_roll", t.random_initial_roll);
  if (j.contains("pool")) parse_pool(j.at("pool"), t.pool);
  get_if(j, "clutter_lo", t.clutter_lo);
  get_if(j, "clutter_hi", t.clutter_hi);
}

json dump_trainer(const rl::TrainerConfig& t) {
  json j;
  j["gamma"] = t.gamma;
  j["gae_lambda"] = t.gae_lambda;
  j["clip_eps"] = t.clip_eps;
  j["temperature"] = t.temperature;
  j["actors"] = t.actors;
  j["episodes_per_batch_per_actor"] = t.episodes_per_batch_per_actor;
  j["horizon"] = t.horizon;
  j["epochs_per_batch"] = t.epochs_per_batch;
  j["lr"] = t.lr;
  j["policy_minibatch"] = t.policy_minibatch;
  j["baseline_minibatch"] = t.baseline_minibatch;
  j["grad_clip"] = t.grad_clip;
  j["vf_coeff"] = t.vf_coeff;
  j["normalize_advantages"] = t.normalize_advantages;
  j["include_rotation_logprob"] = t.include_rotation_logprob;
  j["hidden"] = t.hidden;
  j["xyz_time_pool"] = t.xyz_time_pool;
  j["n_threads"] = t.n_threads;
  j["total_batches"] = t.total_batches;
  j["stop_at_success_rate"] = t.stop_at_success_rate;
  j["checkpoint_every"] = t.checkpoint_every;
  j["single_scene_prob"] = t.single_scene_prob;
  j["train_noise_cm"] = t.train_noise_cm;
  j["random_initial_roll"] = t.random_initial_roll;
  j["pool"] = dump_pool(t.pool);
  j["clutter_lo"] = t.clutter_lo;
  j["clutter_hi"] = t.clutter_hi;
  return j;
}

void parse_eval(const json& j, EvalConfigSection& e) {
  check_keys(j,
             {"seen_pool", "novel_pool", "scenes_per_category", "trials", "horizon",
              "mat_delta_finger"},
             "eval");
  if (j.contains("seen_pool")) parse_pool(j.at("seen_pool"), e.seen_pool);
  if (j.contains("novel_pool")) parse_pool(j.at("novel_pool"), e.novel_pool);
  get_if(j, "scenes_per_category", e.scenes_per_category);
  get_if(j, "trials", e.trials);
  get_if(j, "horizon", e.horizon);
  get_if(j, "mat_delta_finger", e.mat_delta_finger);
}

json dump_eval(const EvalConfigSection& e) {
  json j;
  j["seen_pool"] = dump_pool(e.seen_pool);
  j["novel_pool"] = dump_pool(e.novel_pool);
  j["scenes_per_category"] = e.scenes_per_category;
  j["trials"] = e.trials;
  j["horizon"] = e.horizon;
  j["mat_delta_finger"] = e.mat_delta_finger;
  return j;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j, {"trainer", "env", "eval"}, "config");
  RunConfig cfg;
  try {
    if (j.contains("trainer")) parse_trainer(j.at("trainer"), cfg.trainer);
    if (j.contains("env")) parse_env(j.at("env"), cfg.env);
    if (j.contains("eval")) parse_eval(j.at("eval"), cfg.eval);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    cfg.trainer.validate();
    cfg.env.hand.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string dump_config(const RunConfig& cfg) {
  json j;
  j["trainer"] = dump_trainer(cfg.trainer);
  j["env"] = dump_env(cfg.env);
  j["eval"] = dump_eval(cfg.eval);
  return j.dump(2);
}

void write_config_file(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write " + path);
  out << dump_config(cfg) << "\n";
}

}  // namespace mat::harness
