// Command-line front end: train / eval / sweep.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mat/checkpoint.hpp"
#include "mat/config.hpp"
#include "mat/eval.hpp"
#include "mat/soft_ppo.hpp"

namespace fs = std::filesystem;
using namespace mat;

namespace {

harness::RunConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return {};
  return harness::load_config_file(path);
}

std::vector<sim::Scene> procedural_scenes(const harness::RunConfig& cfg, std::uint64_t seed,
                                          int per_category) {
  std::vector<sim::Scene> scenes;
  struct Cat {
    sim::SceneMode mode;
    const sim::ObjectPool* pool;
    const char* label;
  };
  const Cat cats[] = {
      {sim::SceneMode::Single, &cfg.eval.seen_pool, "seen"},
      {sim::SceneMode::Single, &cfg.eval.novel_pool, "novel"},
      {sim::SceneMode::Cluttered, &cfg.eval.seen_pool, "seen"},
      {sim::SceneMode::Cluttered, &cfg.eval.novel_pool, "novel"},
  };
  std::uint64_t stream = 0;
  for (const auto& cat : cats) {
    for (int i = 0; i < per_category; ++i) {
      Rng rng(derive_seed(seed, {77, stream, static_cast<std::uint64_t>(i)}));
      sim::Scene s = sim::sample_scene(rng, cat.mode, *cat.pool, cfg.env.workspace_radius,
                                       cfg.trainer.clutter_lo, cfg.trainer.clutter_hi);
      s.label = cat.label;
      scenes.push_back(std::move(s));
    }
    ++stream;
  }
  return scenes;
}

void print_report(const harness::EvalReport& report, harness::PolicyKind kind, double noise_cm) {
  std::printf("policy=%s noise=%.2fcm\n", harness::to_string(kind).c_str(), noise_cm);
  std::printf("%-24s %10s %8s %8s\n", "category", "success%", "std%", "trials");
  for (const auto& c : report.categories) {
    std::printf("%-24s %10.1f %8.1f %8d\n", c.category.c_str(), c.success_rate_pct, c.std_pct,
                c.trials);
  }
  std::printf("overall: %.1f%%\n", report.overall_success_rate_pct);
}

int cmd_train(const std::string& config_path, const std::string& out_dir, std::uint64_t seed,
              const std::string& resume) {
  if (!fs::exists(config_path)) {
    std::cerr << "error: config file not found: " << config_path << "\n";
    return 2;
  }
  harness::RunConfig cfg;
  try {
    cfg = harness::load_config_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  fs::create_directories(out_dir);
  harness::write_config_file(cfg, out_dir + "/resolved_config.json");

  std::optional<std::string> resume_opt;
  if (!resume.empty()) resume_opt = resume;
  const rl::TrainResult result = rl::train(cfg.trainer, cfg.env, seed, out_dir, resume_opt);
  std::printf("trained %d batches, %lld env steps, final success %.1f%% (best %.1f%%)\n",
              result.batches_run, result.total_env_steps, 100.0 * result.final_success_rate,
              100.0 * result.max_success_rate);
  std::printf("checkpoint: %s\nmetrics: %s\n", result.policy_checkpoint.c_str(),
              result.metrics_csv.c_str());
  return 0;
}

int cmd_eval(const std::string& ckpt, const std::string& scenes_path, int trials, double noise_cm,
             bool deterministic, const std::string& config_path, const std::string& out_dir,
             std::uint64_t seed, double delta, const std::string& policy_name,
             const std::string& ablate, const std::string& traces_dir) {
  if (trials <= 0) {
    std::cerr << "error: --trials must be >= 1\n";
    return 2;
  }
  const harness::RunConfig cfg = load_config_or_default(config_path);
  const harness::PolicyKind kind = harness::policy_kind_from_string(policy_name);

  std::optional<policy::Net> net;
  if (kind == harness::PolicyKind::Mat) net = policy::load_net_file(ckpt);

  const std::vector<sim::Scene> scenes = sim::scenes_from_json_file(scenes_path);

  harness::EvalOptions options;
  options.trials = trials;
  options.noise_cm = noise_cm;
  options.deterministic = deterministic;
  options.horizon = cfg.eval.horizon;
  options.mat_delta_finger = delta > 0.0 ? delta : cfg.eval.mat_delta_finger;
  options.ablation = baselines::ablation_from_string(ablate);
  options.seed = seed;

  std::ofstream trace_file;
  harness::TraceSink sink = nullptr;
  if (!traces_dir.empty()) {
    fs::create_directories(traces_dir);
    trace_file.open(traces_dir + "/traces.csv");
    trace_file << "scene_index,trial,t";
    for (int j = 0; j < cfg.env.hand.n_joints(); ++j) trace_file << ",q" << j;
    trace_file << ",binary_contact_count,action_kind,reward\n";
    sink = [&trace_file](int scene, int trial, int t, const std::vector<double>& joints,
                         int contacts, const std::string& kind_s, double reward) {
      trace_file << scene << "," << trial << "," << t;
      char buf[64];
      for (double q : joints) {
        std::snprintf(buf, sizeof(buf), ",%.17g", q);
        trace_file << buf;
      }
      std::snprintf(buf, sizeof(buf), ",%d,%s,%.17g", contacts, kind_s.c_str(), reward);
      trace_file << buf << "\n";
    };
  }

  const harness::EvalReport report =
      harness::evaluate(cfg.env, scenes, net ? &*net : nullptr, kind, options, sink);
  print_report(report, kind, noise_cm);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    harness::write_report_csv(report, kind, out_dir + "/report.csv");
    harness::write_episodes_csv(report, out_dir + "/episodes.csv");
  }
  return 0;
}

int cmd_sweep(const std::string& ckpt, const std::vector<double>& levels,
              const std::vector<std::string>& policy_names, const std::string& ablate,
              const std::string& config_path, const std::string& scenes_path,
              int scenes_per_category, int trials, std::uint64_t seed, double delta,
              const std::string& out_dir) {
  const harness::RunConfig cfg = load_config_or_default(config_path);

  std::vector<harness::PolicyKind> policies;
  for (const auto& name : policy_names) policies.push_back(harness::policy_kind_from_string(name));

  std::optional<policy::Net> net;
  for (auto kind : policies)
    if (kind == harness::PolicyKind::Mat && !net) net = policy::load_net_file(ckpt);

  std::vector<sim::Scene> scenes = scenes_path.empty()
                                       ? procedural_scenes(cfg, seed, scenes_per_category)
                                       : sim::scenes_from_json_file(scenes_path);

  harness::EvalOptions options;
  options.trials = trials > 0 ? trials : cfg.eval.trials;
  options.horizon = cfg.eval.horizon;
  options.mat_delta_finger = delta > 0.0 ? delta : cfg.eval.mat_delta_finger;
  options.ablation = baselines::ablation_from_string(ablate);
  options.seed = seed;

  const auto rows = harness::sweep(cfg.env, scenes, net ? &*net : nullptr, levels, policies,
                                   options);
  std::printf("%-28s %8s %-24s %10s %8s %8s\n", "policy", "noise", "category", "success%", "std%",
              "trials");
  for (const auto& r : rows) {
    std::printf("%-28s %8.2f %-24s %10.1f %8.1f %8d\n", r.policy.c_str(), r.noise_cm,
                r.stats.category.c_str(), r.stats.success_rate_pct, r.stats.std_pct,
                r.stats.trials);
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    harness::write_sweep_csv(rows, out_dir + "/sweep.csv");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop tactile grasping: training and evaluation harness"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the tactile policy");
  std::string train_config, train_out, train_resume;
  std::uint64_t train_seed = 0;
  train_cmd->add_option("--config", train_config, "Run config JSON")->required();
  train_cmd->add_option("--out", train_out, "Output directory")->required();
  train_cmd->add_option("--seed", train_seed, "Master seed");
  train_cmd->add_option("--resume", train_resume, "trainer_state.bin to resume from");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on scene files");
  std::string eval_ckpt, eval_scenes, eval_config, eval_out, eval_policy = "mat", eval_ablate,
                                                             eval_traces;
  int eval_trials = 0;
  double eval_noise = 0.0, eval_delta = 0.0;
  bool eval_det = false;
  std::uint64_t eval_seed = 0;
  eval_cmd->add_option("--ckpt", eval_ckpt, "Policy checkpoint")->required();
  eval_cmd->add_option("--scenes", eval_scenes, "Scene JSON file")->required();
  eval_cmd->add_option("--trials", eval_trials, "Episodes per scene")->required();
  eval_cmd->add_option("--noise", eval_noise, "Calibration noise in cm")->required();
  eval_cmd->add_flag("--deterministic", eval_det, "Mode actions instead of sampling");
  eval_cmd->add_option("--config", eval_config, "Run config JSON (env parameters)");
  eval_cmd->add_option("--out", eval_out, "Directory for report/episode CSVs");
  eval_cmd->add_option("--seed", eval_seed, "Eval seed");
  eval_cmd->add_option("--delta", eval_delta, "Finger increment for the policy");
  eval_cmd->add_option("--policy", eval_policy, "mat|open_loop|tactile_latch");
  eval_cmd->add_option("--ablate", eval_ablate, "Ablation mode for MAT");
  eval_cmd->add_option("--dump-traces", eval_traces, "Directory for step traces");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Noise sweep across policies");
  std::string sweep_ckpt, sweep_config, sweep_scenes, sweep_ablate, sweep_out;
  std::vector<double> sweep_levels{0.0, 2.5, 5.0, 7.5};
  std::vector<std::string> sweep_policies{"mat", "open_loop"};
  int sweep_spc = 0, sweep_trials = 0;
  double sweep_delta = 0.0;
  std::uint64_t sweep_seed = 0;
  sweep_cmd->add_option("--ckpt", sweep_ckpt, "Policy checkpoint")->required();
  sweep_cmd->add_option("--levels", sweep_levels, "Noise levels in cm")->delimiter(',');
  sweep_cmd->add_option("--policies", sweep_policies, "Comma-separated policy list")
      ->delimiter(',');
  sweep_cmd->add_option("--ablate", sweep_ablate, "Ablation mode for MAT");
  sweep_cmd->add_option("--config", sweep_config, "Run config JSON");
  sweep_cmd->add_option("--scenes", sweep_scenes, "Scene JSON file (procedural when omitted)");
  sweep_cmd->add_option("--scenes-per-category", sweep_spc, "Procedural scenes per category");
  sweep_cmd->add_option("--trials", sweep_trials, "Episodes per scene");
  sweep_cmd->add_option("--seed", sweep_seed, "Sweep seed");
  sweep_cmd->add_option("--delta", sweep_delta, "Finger increment for the policy");
  sweep_cmd->add_option("--out", sweep_out, "Directory for sweep.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(train_config, train_out, train_seed, train_resume);
    if (*eval_cmd)
      return cmd_eval(eval_ckpt, eval_scenes, eval_trials, eval_noise, eval_det, eval_config,
                      eval_out, eval_seed, eval_delta, eval_policy, eval_ablate, eval_traces);
    if (*sweep_cmd)
      return cmd_sweep(sweep_ckpt, sweep_levels, sweep_policies, sweep_ablate, sweep_config,
                       sweep_scenes, sweep_spc > 0 ? sweep_spc : 20, sweep_trials, sweep_seed,
                       sweep_delta, sweep_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
