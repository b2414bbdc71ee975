// Acceptance suite: one PASS/FAIL line per criterion. The end-to-end
// training criterion runs last among the slow ones and feeds the trained
// checkpoint into the trend criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "mat/baselines.hpp"
#include "mat/checkpoint.hpp"
#include "mat/config.hpp"
#include "mat/eval.hpp"
#include "mat/soft_ppo.hpp"
#include "mat/tactile_conditioning.hpp"
#include "test_util.hpp"

using namespace mat;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const char* name, bool pass, const std::string& detail = "") {
  std::printf("[%s] %s%s%s\n", pass ? "PASS" : "FAIL", name, detail.empty() ? "" : " -- ",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Gradient correctness: 20 random small policy/value networks, both losses,
// central differences at 1e-5, relative error <= 1e-4 on every parameter.
void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dims = testutil::small_dims();
  Rng rng(2024);
  double worst = 0.0;
  bool pass = true;

  for (int net_i = 0; net_i < 20 && pass; ++net_i) {
    const bool pooled = net_i % 4 == 3;
    policy::Net pol = policy::Net::make_policy(dims, 3, 6, pooled);
    testutil::randomize_params(pol, rng);
    const auto batch = testutil::make_gradcheck_batch(pol, rng, 8, true);
    const auto steps = testutil::flat_steps(batch);

    std::vector<double> grad(pol.n_params(), 0.0);
    rl::policy_loss_and_grad(steps, pol, 0.2, 5e-4, true, grad);
    const auto pc = testutil::finite_difference_check(
        pol, [&] { return rl::policy_loss_and_grad(steps, pol, 0.2, 5e-4, true, {}); }, grad);
    worst = std::max(worst, pc.max_rel_err);
    pass = pass && pc.ok();

    policy::Net val = policy::Net::make_value(dims, 6, pooled);
    testutil::randomize_params(val, rng);
    std::vector<double> vgrad(val.n_params(), 0.0);
    rl::value_loss_and_grad(steps, val, 1.0, vgrad);
    const auto vc = testutil::finite_difference_check(
        val, [&] { return rl::value_loss_and_grad(steps, val, 1.0, {}); }, vgrad);
    worst = std::max(worst, vc.max_rel_err);
    pass = pass && vc.ok();
  }
  const double secs = elapsed_s(t0);
  char detail[128];
  std::snprintf(detail, sizeof(detail), "max rel err %.3g, %.1fs (budget 60s)", worst, secs);
  report("gradient correctness: policy and baseline losses vs central differences",
         pass && secs < 60.0, detail);
}

// ---------------------------------------------------------------------------
void criterion_gae() {
  Rng rng(77);
  const std::vector<double> lambdas{0.0, 0.5, 0.95, 1.0};
  double worst = 0.0;
  for (int episode = 0; episode < 1000; ++episode) {
    const int len = rng.uniform_int(1, 10);
    std::vector<double> rewards(len), values(len);
    for (auto& r : rewards) r = rng.uniform(-1.0, 1.0);
    for (auto& v : values) v = rng.uniform(-1.0, 1.0);
    const double gamma = rng.uniform() < 0.5 ? 0.9 : 0.999;
    const double lambda = lambdas[rng.uniform_int(0, 3)];

    const auto got = rl::compute_gae(rewards, values, gamma, lambda);
    for (int t = 0; t < len; ++t) {
      double acc = 0.0;
      for (int l = 0; t + l < len; ++l) {
        const double next_v = t + l + 1 < len ? values[t + l + 1] : 0.0;
        acc += std::pow(gamma * lambda, l) * (rewards[t + l] + gamma * next_v - values[t + l]);
      }
      worst = std::max(worst, std::fabs(got.advantages[t] - acc));
    }
  }
  char detail[64];
  std::snprintf(detail, sizeof(detail), "max abs err %.3g", worst);
  report("advantage estimator matches brute-force nested sum (1000 episodes, 1e-10)",
         worst <= 1e-10, detail);
}

// ---------------------------------------------------------------------------
void criterion_normalization() {
  Rng rng(31);
  const policy::LogProbOptions discrete{false};
  double worst_gap = 0.0;
  bool pass = true;

  for (int trial = 0; trial < 100; ++trial) {
    policy::HeadOut heads;
    heads.finger_logits = {rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)};
    heads.reopen_logit = rng.uniform(-4, 4);
    heads.lift_logit = rng.uniform(-4, 4);
    heads.log_sigma = std::log(0.5);

    double total = 0.0;
    ResolvedAction r;
    r.kind = ActionKind::Reopen;
    total += std::exp(policy::log_prob(heads, r, discrete));
    r.kind = ActionKind::Lift;
    total += std::exp(policy::log_prob(heads, r, discrete));
    r.kind = ActionKind::Fingers;
    for (int mask = 0; mask < 8; ++mask) {
      r.finger_flags = {static_cast<std::uint8_t>(mask & 1),
                        static_cast<std::uint8_t>((mask >> 1) & 1),
                        static_cast<std::uint8_t>((mask >> 2) & 1)};
      total += std::exp(policy::log_prob(heads, r, discrete));
    }
    worst_gap = std::max(worst_gap, std::fabs(total - 1.0));
    pass = pass && std::fabs(total - 1.0) <= 1e-12;
  }

  // Monte Carlo: resolved-outcome frequencies against exp(log_prob).
  policy::HeadOut heads;
  heads.finger_logits = {0.6, -0.4, 1.1};
  heads.reopen_logit = -0.9;
  heads.lift_logit = 0.3;
  heads.log_sigma = std::log(0.5);
  const int n = 100000;
  long long reopen_n = 0, lift_n = 0;
  std::vector<long long> finger_n(8, 0);
  for (int i = 0; i < n; ++i) {
    const ActionSample s = policy::sample_action(heads, rng);
    const ResolvedAction r = resolve_action(s, false, false);
    if (r.kind == ActionKind::Reopen)
      ++reopen_n;
    else if (r.kind == ActionKind::Lift)
      ++lift_n;
    else
      ++finger_n[r.finger_flags[0] | (r.finger_flags[1] << 1) | (r.finger_flags[2] << 2)];
  }
  auto within_3sigma = [&](long long count, double p) {
    return std::fabs(count - p * n) <= 3.0 * std::sqrt(p * (1.0 - p) * n) + 1e-9;
  };
  ResolvedAction r;
  r.kind = ActionKind::Reopen;
  pass = pass && within_3sigma(reopen_n, std::exp(policy::log_prob(heads, r, discrete)));
  r.kind = ActionKind::Lift;
  pass = pass && within_3sigma(lift_n, std::exp(policy::log_prob(heads, r, discrete)));
  r.kind = ActionKind::Fingers;
  for (int mask = 0; mask < 8; ++mask) {
    r.finger_flags = {static_cast<std::uint8_t>(mask & 1),
                      static_cast<std::uint8_t>((mask >> 1) & 1),
                      static_cast<std::uint8_t>((mask >> 2) & 1)};
    pass = pass && within_3sigma(finger_n[mask], std::exp(policy::log_prob(heads, r, discrete)));
  }

  char detail[64];
  std::snprintf(detail, sizeof(detail), "max |sum-1| = %.3g", worst_gap);
  report("composite log-prob normalization + Monte Carlo consistency (3 sigma)", pass, detail);
}

// ---------------------------------------------------------------------------
void criterion_reward_table() {
  sim::EnvConfig cfg;
  ResolvedAction reopen;
  reopen.kind = ActionKind::Reopen;
  ResolvedAction lift;
  lift.kind = ActionKind::Lift;
  ResolvedAction fingers;
  fingers.kind = ActionKind::Fingers;
  fingers.finger_flags = {1, 1, 1};

  std::vector<double> low(cfg.hand.n_joints(), 0.1);
  std::vector<double> high = low;
  high[2] = 0.3;

  const bool pass = sim::step_reward(cfg, low, reopen, false) == -0.05 &&
                    sim::step_reward(cfg, high, reopen, false) == 0.0 &&
                    sim::step_reward(cfg, low, fingers, false) == 0.0 &&
                    sim::step_reward(cfg, low, lift, true) == 1.0 &&
                    sim::step_reward(cfg, low, lift, false) == 0.0;
  report("reward table: reopen penalty gate at 0.2 rad, terminal 0/1", pass);
}

bool curriculum_endpoints() {
  return rl::curriculum_delta(0.0) == 0.4 && rl::curriculum_delta(1.0) == 0.1 &&
         std::fabs(rl::curriculum_delta(0.5) - 0.25) < 1e-15;
}

// ---------------------------------------------------------------------------
void criterion_regrasp() {
  sim::HandModel hand;
  Rng rng(99);
  bool pass = true;
  for (int trial = 0; trial < 1000 && pass; ++trial) {
    sim::ContactSnapshot snap;
    const int n_active = rng.uniform_int(0, 10);
    for (int i = 0; i < n_active; ++i) {
      const int link = rng.uniform_int(0, hand.n_links_with_cells() - 1);
      snap.active.push_back({link * hand.cells_per_link + rng.uniform_int(0, 23), link, 0,
                             {rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), 0.02}});
    }
    std::vector<sim::ContactSnapshot> history{snap};
    const Vec3 p_old{rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), 0.3};
    const Vec3 got = regrasp::tactile_centroid_target(history, hand, p_old);

    if (n_active == 0) {
      pass = got == p_old;
      continue;
    }
    double sx[4] = {0, 0, 0, 0}, sy[4] = {0, 0, 0, 0};
    int cnt[4] = {0, 0, 0, 0};
    double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9;
    for (const auto& rec : snap.active) {
      sx[rec.link] += rec.world_pos.x;
      sy[rec.link] += rec.world_pos.y;
      cnt[rec.link] += 1;
      min_x = std::min(min_x, rec.world_pos.x);
      max_x = std::max(max_x, rec.world_pos.x);
      min_y = std::min(min_y, rec.world_pos.y);
      max_y = std::max(max_y, rec.world_pos.y);
    }
    double mx = 0, my = 0;
    int links = 0;
    for (int m = 0; m < 4; ++m) {
      if (!cnt[m]) continue;
      mx += sx[m] / cnt[m];
      my += sy[m] / cnt[m];
      ++links;
    }
    mx /= links;
    my /= links;
    pass = got.x == mx && got.y == my && got.z == p_old.z;
    pass = pass && got.x >= min_x - 1e-12 && got.x <= max_x + 1e-12 && got.y >= min_y - 1e-12 &&
           got.y <= max_y + 1e-12;
  }
  report("regrasp centroid matches two-level averaging oracle (1000 patterns)", pass);
}

// ---------------------------------------------------------------------------
void criterion_conditioning() {
  Rng rng(55);
  bool pass = true;
  for (int trial = 0; trial < 30 && pass; ++trial) {
    obs::RawTactileStream stream(96, 3, 24);
    std::vector<std::vector<double>> forces(96);
    std::vector<double> efforts(3, 0.0);
    const int n_samples = rng.uniform_int(1, 400);
    for (int i = 0; i < n_samples; ++i) {
      if (rng.uniform() < 0.9) {
        const int cell = rng.uniform_int(0, 95);
        const double f = rng.uniform(0.0, 3.0);
        stream.push_force(cell, f);
        forces[cell].push_back(f);
      } else {
        const int finger = rng.uniform_int(0, 2);
        const double e = rng.uniform(0.0, 1.2);
        stream.push_effort(finger, e);
        efforts[finger] = e;
      }
    }
    const auto binary = obs::condition_raw_tactile(stream, 50, 0.8);
    for (int c = 0; c < 96 && pass; ++c) {
      double mean = 0.0;
      if (!forces[c].empty()) {
        const std::size_t n = std::min<std::size_t>(50, forces[c].size());
        for (std::size_t k = forces[c].size() - n; k < forces[c].size(); ++k) mean += forces[c][k];
        mean /= n;
      }
      if (c / 24 < 3) mean += efforts[c / 24];
      pass = binary[c] == (mean > 0.8 ? 1 : 0);
    }
  }
  report("tactile conditioning matches mean+threshold oracle (incl. finger effort)", pass);
}

// ---------------------------------------------------------------------------
void criterion_determinism(const harness::RunConfig& toy, const std::string& work) {
  harness::RunConfig cfg = toy;
  cfg.trainer.total_batches = 3;
  cfg.trainer.stop_at_success_rate = -1.0;
  cfg.trainer.actors = 4;
  cfg.trainer.episodes_per_batch_per_actor = 6;

  const std::string dir_a = work + "/det_a", dir_b = work + "/det_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  rl::train(cfg.trainer, cfg.env, 4242, dir_a);
  rl::train(cfg.trainer, cfg.env, 4242, dir_b);

  auto read_file = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = read_file(dir_a + "/metrics.csv");
  const std::string b = read_file(dir_b + "/metrics.csv");
  const bool pass = !a.empty() && a == b;
  report("determinism: identical seeds give bit-identical metrics CSVs (3 batches)", pass);
}

// ---------------------------------------------------------------------------
void criteria_end_to_end(const harness::RunConfig& toy, const std::string& work) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string run_dir = work + "/train";
  fs::remove_all(run_dir);

  const rl::TrainResult result = rl::train(toy.trainer, toy.env, 1, run_dir);
  const double train_secs = elapsed_s(t0);

  // Curriculum trace: non-increasing, within [0.1, 0.4].
  {
    std::ifstream in(result.metrics_csv);
    std::string line;
    std::getline(in, line);  // header
    double prev = 0.4;
    bool trace_ok = true;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string field;
      for (int i = 0; i <= 4; ++i) std::getline(ss, field, ',');
      const double delta = std::stod(field);
      trace_ok =
          trace_ok && delta <= prev + 1e-15 && delta >= 0.1 - 1e-15 && delta <= 0.4 + 1e-15;
      prev = delta;
    }
    report("curriculum: endpoints exact and training trace non-increasing in [0.1, 0.4]",
           curriculum_endpoints() && trace_ok);
  }

  const policy::Net trained = policy::load_net_file(result.policy_checkpoint);
  const double final_delta = rl::curriculum_delta(result.max_success_rate);

  std::vector<sim::Scene> suite;
  for (int i = 0; i < 40; ++i) {
    Rng rng(derive_seed(9000, {static_cast<std::uint64_t>(i)}));
    sim::Scene s = sim::sample_scene(rng, sim::SceneMode::Single, toy.trainer.pool);
    s.label = "seen";
    suite.push_back(std::move(s));
  }

  harness::EvalOptions options;
  options.trials = 5;  // 40 scenes x 5 trials = 200 episodes
  options.horizon = toy.trainer.horizon;
  options.mat_delta_finger = final_delta;
  options.seed = 1234;

  const auto eval0 = harness::evaluate(toy.env, suite, &trained, harness::PolicyKind::Mat, options);
  const double mat_0 = eval0.overall_success_rate_pct;

  {
    char detail[192];
    std::snprintf(detail, sizeof(detail),
                  "eval %.1f%% over 200 episodes, %lld env steps, train %.0fs (%u cores)", mat_0,
                  result.total_env_steps, train_secs, std::thread::hardware_concurrency());
    const bool steps_ok = result.total_env_steps <= 2000000;
    // The wall-clock budget is stated for an 8-core machine; it binds only
    // when that much parallelism is available.
    const bool time_ok = std::thread::hardware_concurrency() < 8 || train_secs <= 45 * 60;
    report("end-to-end learning: >=90% eval success within 2e6 env steps",
           mat_0 >= 90.0 && steps_ok && time_ok, detail);
  }

  auto eval_at = [&](harness::PolicyKind kind, double noise) {
    harness::EvalOptions opt = options;
    opt.noise_cm = noise;
    return harness::evaluate(toy.env, suite,
                             kind == harness::PolicyKind::Mat ? &trained : nullptr, kind, opt);
  };

  const auto mat5 = eval_at(harness::PolicyKind::Mat, 5.0);
  const auto ol5 = eval_at(harness::PolicyKind::OpenLoop, 5.0);
  const double mat_25 = eval_at(harness::PolicyKind::Mat, 2.5).overall_success_rate_pct;
  const double ol_0 = eval_at(harness::PolicyKind::OpenLoop, 0.0).overall_success_rate_pct;
  const double ol_75 = eval_at(harness::PolicyKind::OpenLoop, 7.5).overall_success_rate_pct;
  const double latch_25 = eval_at(harness::PolicyKind::TactileLatch, 2.5).overall_success_rate_pct;

  {
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "mat %.1f/%.1f/%.1f at 0/2.5/5cm; open-loop %.1f/%.1f/%.1f at 0/5/7.5cm",
                  mat_0, mat_25, mat5.overall_success_rate_pct, ol_0,
                  ol5.overall_success_rate_pct, ol_75);
    const bool mat_vs_ol = mat5.overall_success_rate_pct >= ol5.overall_success_rate_pct + 25.0;
    const bool ol_degrades = ol_0 - ol_75 >= 30.0;
    const bool mat_robust = mat_0 - mat5.overall_success_rate_pct <= 15.0;
    const bool significant =
        harness::is_significant(mat5.categories[0].success_rate_pct, mat5.categories[0].std_pct,
                                ol5.categories[0].success_rate_pct, ol5.categories[0].std_pct);
    report("calibration-noise trend: tactile policy robust where open-loop collapses",
           mat_vs_ol && ol_degrades && mat_robust && significant, detail);
  }
  {
    char detail[128];
    std::snprintf(detail, sizeof(detail), "mat %.1f%% vs latch %.1f%% at 2.5cm", mat_25, latch_25);
    report("tactile-baseline trend: >=10 points over contact-latch at 2.5cm noise",
           mat_25 >= latch_25 + 10.0, detail);
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::string work = argc > 1 ? argv[1] : "acceptance_artifacts";
  fs::create_directories(work);

  // Toy task: single discs of radius 3-5cm, horizon 60, pre-shaped hand.
  harness::RunConfig toy;
  toy.trainer.horizon = 60;
  toy.trainer.total_batches = 45;
  toy.trainer.stop_at_success_rate = 0.92;
  toy.trainer.single_scene_prob = 1.0;
  toy.trainer.xyz_time_pool = true;
  toy.trainer.train_noise_cm = 0.0;
  toy.trainer.pool.disc_probability = 1.0;
  toy.trainer.pool.disc_radius_lo = 0.03;
  toy.trainer.pool.disc_radius_hi = 0.05;
  toy.trainer.pool.height_lo = 0.03;
  toy.trainer.pool.height_hi = 0.06;
  toy.env.pre_grasp_rad = 1.2;
  toy.env.grip_gate_rad = 1.4;

  criterion_gradients();
  criterion_gae();
  criterion_normalization();
  criterion_reward_table();
  criterion_regrasp();
  criterion_conditioning();
  criterion_determinism(toy, work);
  criteria_end_to_end(toy, work);

  std::printf("%s: %d criterion(s) failed\n",
              g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", g_failures);
  return g_failures == 0 ? 0 : 1;
}
