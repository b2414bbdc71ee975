#include "mat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace mat::harness {

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "mat") return PolicyKind::Mat;
  if (name == "open_loop") return PolicyKind::OpenLoop;
  if (name == "tactile_latch") return PolicyKind::TactileLatch;
  throw std::invalid_argument("unknown policy: " + name);
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Mat: return "mat";
    case PolicyKind::OpenLoop: return "open_loop";
    case PolicyKind::TactileLatch: return "tactile_latch";
  }
  return "mat";
}

namespace {

std::string kind_name(ActionKind k, bool forced) {
  switch (k) {
    case ActionKind::Fingers: return "fingers";
    case ActionKind::Reopen: return forced ? "forced_reopen" : "reopen";
    case ActionKind::Lift: return "lift";
    case ActionKind::HorizonLift: return "horizon_lift";
  }
  return "fingers";
}

int count_contacts(const sim::TactileFrame& frame) {
  int n = 0;
  for (auto b : frame.binary) n += b;
  return n;
}

}  // namespace

EpisodeResult run_episode(const sim::EnvConfig& env_cfg_in, const sim::Scene& scene,
                          const policy::Net* policy_net, PolicyKind kind,
                          const EvalOptions& options, Rng& rng, int scene_index, int trial,
                          const TraceSink& trace) {
  sim::EnvConfig env_cfg = env_cfg_in;
  if (options.ablation == baselines::AblationMode::OrientationOnly)
    env_cfg.enable_position_adjust = false;
  if (options.ablation == baselines::AblationMode::FingerClosingOnly)
    env_cfg.enable_forced_reopen = false;

  const int target =
      scene.objects.size() == 1 ? 0 : rng.uniform_int(0, static_cast<int>(scene.objects.size()) - 1);
  const sim::InitialPose pose = sim::jittered_initial_pose(env_cfg, scene, target, 0.0, rng);

  sim::GraspEnv env(env_cfg);
  obs::ObsDims dims;
  dims.cells = env_cfg.hand.n_cells();
  dims.joints = env_cfg.hand.n_joints();
  obs::ObservationWindow window(dims, env_cfg.joint_move_threshold);

  sim::TactileFrame frame = env.reset(scene, pose, options.noise_cm, rng);
  window.push(frame);

  policy::Workspace ws;
  std::vector<double> obs_d;
  if (kind == PolicyKind::Mat) {
    if (!policy_net) throw std::invalid_argument("run_episode: MAT policy requires a network");
    ws.resize(*policy_net);
    obs_d.resize(dims.encoded_len());
  }
  baselines::LatchState latch = baselines::make_latch_state(env_cfg.hand.n_fingers);

  EpisodeResult result;
  for (int t = 0; t < options.horizon; ++t) {
    ResolvedAction resolved;
    double delta = options.mat_delta_finger;
    const bool at_horizon = t == options.horizon - 1;

    switch (kind) {
      case PolicyKind::Mat: {
        window.encode_into(obs_d.data());
        const policy::HeadOut heads = policy::policy_forward(*policy_net, obs_d, ws);
        ActionSample sample = options.deterministic ? policy::deterministic_action(heads)
                                                    : policy::sample_action(heads, rng);
        sample = baselines::apply_ablation(std::move(sample), options.ablation);
        const bool forced =
            env_cfg.enable_forced_reopen &&
            sim::forced_reopen_check(window, env_cfg.joint_move_threshold, env_cfg.stall_window);
        resolved = resolve_action(sample, forced, at_horizon);
        break;
      }
      case PolicyKind::OpenLoop: {
        resolved = baselines::open_loop_policy(t, options.open_loop, env_cfg.hand.n_fingers);
        if (at_horizon) resolved.kind = ActionKind::HorizonLift;
        delta = options.open_loop.delta_finger;
        break;
      }
      case PolicyKind::TactileLatch: {
        resolved = baselines::tactile_latch_policy(frame, latch, env_cfg.hand, options.latch);
        if (at_horizon) resolved.kind = ActionKind::HorizonLift;
        delta = options.latch.delta_finger;
        break;
      }
    }

    const sim::StepOutcome out = env.apply_action(resolved, delta);
    result.reward_sum += out.reward;
    result.steps += 1;
    result.reopened = result.reopened || out.info.reopen_executed;
    if (trace)
      trace(scene_index, trial, t, out.frame.joint_angles, count_contacts(out.frame),
            kind_name(resolved.kind, resolved.forced_reopen), out.reward);
    window.push(out.frame);
    frame = out.frame;
    if (out.done) {
      result.success = out.lift_success;
      break;
    }
  }
  return result;
}

namespace {

std::string scene_category(const sim::Scene& scene) {
  const std::string kind = scene.objects.size() == 1 ? "single" : "cluttered";
  return scene.label.empty() ? kind : kind + "/" + scene.label;
}

}  // namespace

EvalReport evaluate(const sim::EnvConfig& env_cfg, const std::vector<sim::Scene>& scenes,
                    const policy::Net* policy_net, PolicyKind kind, const EvalOptions& options,
                    const TraceSink& trace) {
  if (options.trials < 1) throw std::invalid_argument("evaluate: trials must be >= 1");
  if (scenes.empty()) throw std::invalid_argument("evaluate: no scenes");

  EvalReport report;
  std::map<std::string, std::vector<double>> per_scene_rate;  // category -> scene success %
  long long successes = 0;

  for (std::size_t s = 0; s < scenes.size(); ++s) {
    int scene_successes = 0;
    for (int trial = 0; trial < options.trials; ++trial) {
      Rng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(s),
                                         static_cast<std::uint64_t>(trial)}));
      const EpisodeResult r = run_episode(env_cfg, scenes[s], policy_net, kind, options, rng,
                                          static_cast<int>(s), trial, trace);
      EpisodeRow row;
      row.scene_index = static_cast<int>(s);
      row.trial = trial;
      row.steps = r.steps;
      row.success = r.success;
      row.reward_sum = r.reward_sum;
      row.category = scene_category(scenes[s]);
      report.episodes.push_back(std::move(row));
      scene_successes += r.success ? 1 : 0;
    }
    successes += scene_successes;
    per_scene_rate[scene_category(scenes[s])].push_back(100.0 * scene_successes / options.trials);
  }

  for (const auto& [category, rates] : per_scene_rate) {
    CategoryStats stats;
    stats.category = category;
    stats.noise_cm = options.noise_cm;
    stats.trials = static_cast<int>(rates.size()) * options.trials;
    double mean = 0.0;
    for (double r : rates) mean += r;
    mean /= static_cast<double>(rates.size());
    double var = 0.0;
    for (double r : rates) var += (r - mean) * (r - mean);
    stats.success_rate_pct = mean;
    stats.std_pct = std::sqrt(var / static_cast<double>(rates.size()));
    report.categories.push_back(std::move(stats));
  }
  report.overall_success_rate_pct =
      100.0 * static_cast<double>(successes) /
      (static_cast<double>(scenes.size()) * static_cast<double>(options.trials));
  return report;
}

void write_report_csv(const EvalReport& report, PolicyKind kind, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << "policy,category,noise_cm,success_rate,std,trials\n";
  char buf[256];
  for (const auto& c : report.categories) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g,%.17g,%d", to_string(kind).c_str(),
                  c.category.c_str(), c.noise_cm, c.success_rate_pct, c.std_pct, c.trials);
    out << buf << "\n";
  }
}

void write_episodes_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write episodes: " + path);
  out << "scene_index,trial,category,steps,success,reward_sum\n";
  char buf[256];
  for (const auto& e : report.episodes) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%s,%d,%d,%.17g", e.scene_index, e.trial,
                  e.category.c_str(), e.steps, e.success ? 1 : 0, e.reward_sum);
    out << buf << "\n";
  }
}

std::vector<SweepRow> sweep(const sim::EnvConfig& env_cfg, const std::vector<sim::Scene>& scenes,
                            const policy::Net* policy_net, const std::vector<double>& levels,
                            const std::vector<PolicyKind>& policies, const EvalOptions& options) {
  for (double level : levels)
    if (level < 0.0) throw std::invalid_argument("sweep: noise levels must be >= 0");

  std::vector<SweepRow> rows;
  for (PolicyKind kind : policies) {
    for (double level : levels) {
      EvalOptions opt = options;
      opt.noise_cm = level;
      const EvalReport report = evaluate(env_cfg, scenes, policy_net, kind, opt);
      for (const auto& c : report.categories) {
        SweepRow row;
        row.policy = to_string(kind);
        if (options.ablation != baselines::AblationMode::None && kind == PolicyKind::Mat)
          row.policy += "+" + baselines::to_string(options.ablation);
        row.noise_cm = level;
        row.stats = c;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sweep: " + path);
  out << "policy,noise_cm,category,success_rate,std,trials\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%s,%.17g,%.17g,%d", r.policy.c_str(), r.noise_cm,
                  r.stats.category.c_str(), r.stats.success_rate_pct, r.stats.std_pct,
                  r.stats.trials);
    out << buf << "\n";
  }
}

bool is_significant(double mean_a, double std_a, double mean_b, double std_b) {
  if (std_a < 0.0 || std_b < 0.0) throw std::invalid_argument("is_significant: negative std");
  return std::fabs(mean_a - mean_b) > std::max(std_a, std_b);
}

}  // namespace mat::harness
