#include "mat/soft_ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "mat/checkpoint.hpp"
#include "mat/kernels.hpp"

namespace mat::rl {

namespace {

constexpr std::uint64_t kStreamCollect = 11;
constexpr std::uint64_t kStreamInit = 12;
constexpr std::uint64_t kStreamShufflePolicy = 13;
constexpr std::uint64_t kStreamShuffleValue = 14;

obs::ObsDims dims_for(const sim::EnvConfig& env_cfg) {
  obs::ObsDims dims;
  dims.cells = env_cfg.hand.n_cells();
  dims.joints = env_cfg.hand.n_joints();
  return dims;
}

}  // namespace

void TrainerConfig::validate() const {
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("config: gamma must be in [0,1)");
  if (clip_eps <= 0.0) throw std::invalid_argument("config: clip_eps must be > 0");
  if (temperature < 0.0) throw std::invalid_argument("config: temperature must be >= 0");
  if (gae_lambda < 0.0 || gae_lambda > 1.0)
    throw std::invalid_argument("config: gae_lambda must be in [0,1]");
  if (actors < 1 || episodes_per_batch_per_actor < 1)
    throw std::invalid_argument("config: actors and episodes must be >= 1");
  if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (policy_minibatch < 1 || baseline_minibatch < 1)
    throw std::invalid_argument("config: minibatch sizes must be >= 1");
  if (lr <= 0.0) throw std::invalid_argument("config: lr must be > 0");
  if (clutter_lo < 1 || clutter_hi < clutter_lo || clutter_hi > 30)
    throw std::invalid_argument("config: clutter range must be within [1,30]");
  if (single_scene_prob < 0.0 || single_scene_prob > 1.0)
    throw std::invalid_argument("config: single_scene_prob must be in [0,1]");
}

int TrainerConfig::resolved_threads() const {
  if (n_threads > 0) return n_threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

Trajectory run_training_episode(sim::GraspEnv& env, const obs::ObsDims& dims,
                                const policy::Net& pol, const policy::Net& val,
                                policy::Workspace& wsp, policy::Workspace& wsv,
                                const TrainerConfig& cfg, double delta_finger, Rng& rng) {
  const auto& env_cfg = env.config();
  const bool single = rng.uniform() < cfg.single_scene_prob;
  const sim::Scene scene =
      sim::sample_scene(rng, single ? sim::SceneMode::Single : sim::SceneMode::Cluttered, cfg.pool,
                        env_cfg.workspace_radius, cfg.clutter_lo, cfg.clutter_hi);
  const int target = single ? 0 : rng.uniform_int(0, static_cast<int>(scene.objects.size()) - 1);
  const double roll = cfg.random_initial_roll ? rng.uniform(-kPi, kPi) : 0.0;
  const sim::InitialPose pose = sim::jittered_initial_pose(env_cfg, scene, target, roll, rng);

  obs::ObservationWindow window(dims, env_cfg.joint_move_threshold);
  window.push(env.reset(scene, pose, cfg.train_noise_cm, rng));

  const policy::LogProbOptions opts{cfg.include_rotation_logprob};
  const int obs_len = dims.encoded_len();
  std::vector<double> obs_d(obs_len);

  Trajectory traj;
  for (int t = 0; t < cfg.horizon; ++t) {
    StepRecord rec;
    rec.obs.resize(obs_len);
    window.encode_into(rec.obs.data());
    for (int i = 0; i < obs_len; ++i) obs_d[i] = rec.obs[i];

    const policy::HeadOut heads = policy::policy_forward(pol, obs_d, wsp);
    rec.value = policy::value_forward(val, obs_d, wsv);
    rec.sample = policy::sample_action(heads, rng);
    const bool forced =
        env_cfg.enable_forced_reopen &&
        sim::forced_reopen_check(window, env_cfg.joint_move_threshold, env_cfg.stall_window);
    rec.resolved = resolve_action(rec.sample, forced, t == cfg.horizon - 1);
    rec.logp_old = policy::log_prob(heads, rec.resolved, opts);

    const sim::StepOutcome out = env.apply_action(rec.resolved, delta_finger);
    rec.reward = out.reward;
    traj.episode_return += out.reward;
    window.push(out.frame);
    traj.steps.push_back(std::move(rec));
    if (out.done) {
      traj.success = out.lift_success;
      break;
    }
  }
  return traj;
}

}  // namespace

RolloutBatch collect_rollouts(const policy::Net& pol, const policy::Net& val,
                              const sim::EnvConfig& env_cfg, const TrainerConfig& cfg,
                              double delta_finger, std::uint64_t seed, int batch_index) {
  cfg.validate();
  const obs::ObsDims dims = dims_for(env_cfg);

  std::vector<std::vector<Trajectory>> per_actor(cfg.actors);
  std::vector<std::exception_ptr> errors(cfg.actors);

  auto actor_body = [&](int a) {
    try {
      sim::GraspEnv env(env_cfg);
      policy::Workspace wsp, wsv;
      wsp.resize(pol);
      wsv.resize(val);
      per_actor[a].reserve(cfg.episodes_per_batch_per_actor);
      for (int e = 0; e < cfg.episodes_per_batch_per_actor; ++e) {
        Rng rng(derive_seed(seed, {kStreamCollect, static_cast<std::uint64_t>(batch_index),
                                   static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(e)}));
        per_actor[a].push_back(
            run_training_episode(env, dims, pol, val, wsp, wsv, cfg, delta_finger, rng));
      }
    } catch (...) {
      errors[a] = std::current_exception();
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(cfg.actors);
  for (int a = 0; a < cfg.actors; ++a) threads.emplace_back(actor_body, a);
  for (auto& t : threads) t.join();
  for (int a = 0; a < cfg.actors; ++a)
    if (errors[a]) std::rethrow_exception(errors[a]);

  RolloutBatch batch;
  int successes = 0;
  for (int a = 0; a < cfg.actors; ++a) {
    for (auto& traj : per_actor[a]) {
      batch.total_steps += static_cast<int>(traj.steps.size());
      successes += traj.success ? 1 : 0;
      batch.trajectories.push_back(std::move(traj));
    }
  }
  batch.success_rate =
      batch.trajectories.empty()
          ? 0.0
          : static_cast<double>(successes) / static_cast<double>(batch.trajectories.size());
  return batch;
}

void fill_advantages(RolloutBatch& batch, double gamma, double lambda, bool normalize) {
  for (auto& traj : batch.trajectories) {
    std::vector<double> rewards, values;
    rewards.reserve(traj.steps.size());
    values.reserve(traj.steps.size());
    for (const auto& s : traj.steps) {
      rewards.push_back(s.reward);
      values.push_back(s.value);
    }
    const GaeResult g = compute_gae(rewards, values, gamma, lambda);
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
      traj.steps[i].advantage = g.advantages[i];
      traj.steps[i].ret = g.returns[i];
    }
  }
  if (!normalize) return;

  double sum = 0.0;
  long long n = 0;
  for (const auto& traj : batch.trajectories)
    for (const auto& s : traj.steps) {
      sum += s.advantage;
      ++n;
    }
  if (n == 0) return;
  const double mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (const auto& traj : batch.trajectories)
    for (const auto& s : traj.steps) var += (s.advantage - mean) * (s.advantage - mean);
  const double std_dev = std::sqrt(var / static_cast<double>(n)) + 1e-8;
  for (auto& traj : batch.trajectories)
    for (auto& s : traj.steps) s.advantage = (s.advantage - mean) / std_dev;
}

namespace {

struct LossAccum {
  double loss = 0.0;
  double sum_ratio = 0.0;
  double sum_neg_logp = 0.0;
  long long clipped = 0;
  long long count = 0;
};

void promote_obs(const StepRecord& rec, std::vector<double>& obs_d) {
  obs_d.resize(rec.obs.size());
  for (std::size_t i = 0; i < rec.obs.size(); ++i) obs_d[i] = rec.obs[i];
}

// One step of the soft clipped surrogate:
//   L_t = -min(lambda_t * T_t, clip(lambda_t, 1-eps, 1+eps) * T_t),
//   lambda_t = exp(logpi - logpi_old), T_t = A_t - alpha * logpi.
// The gradient path keeps the dependence of T_t on theta.
void policy_step(const policy::Net& pol, const StepRecord& rec, double eps, double alpha,
                 const policy::LogProbOptions& opts, double inv_b, policy::Workspace& ws,
                 std::vector<double>& obs_d, std::vector<double>& d_head, std::span<double> grad,
                 LossAccum& acc, long long step_index) {
  promote_obs(rec, obs_d);
  const policy::HeadOut heads = policy::policy_forward(pol, obs_d, ws);
  const double lp = policy::log_prob(heads, rec.resolved, opts);
  const double ratio = std::exp(lp - rec.logp_old);
  if (!std::isfinite(ratio)) {
    throw std::runtime_error("policy loss: non-finite probability ratio at step " +
                             std::to_string(step_index));
  }
  const double target = rec.advantage - alpha * lp;
  const double clipped_ratio = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  const double u_raw = ratio * target;
  const double u_clip = clipped_ratio * target;
  const bool raw_arm = u_raw <= u_clip;

  acc.loss += -std::min(u_raw, u_clip) * inv_b;
  acc.sum_ratio += ratio;
  acc.sum_neg_logp += -lp;
  acc.clipped += (ratio < 1.0 - eps || ratio > 1.0 + eps) ? 1 : 0;
  acc.count += 1;

  if (grad.empty()) return;

  const bool inside = ratio > 1.0 - eps && ratio < 1.0 + eps;
  const double darm_dlogp = raw_arm ? ratio * (target - alpha)
                                    : (inside ? ratio * target : 0.0) - clipped_ratio * alpha;
  const double coef = -darm_dlogp * inv_b;

  const policy::HeadGrad hg = policy::log_prob_grad(heads, rec.resolved, opts);
  policy::pack_head_grad(hg, coef, d_head);
  policy::backward(pol, obs_d, ws, d_head, grad);
  if (pol.config().has_log_sigma) grad[pol.log_sigma_offset()] += coef * hg.log_sigma;
}

void value_step(const policy::Net& val, const StepRecord& rec, double vf_coeff, double inv_b,
                policy::Workspace& ws, std::vector<double>& obs_d, std::vector<double>& d_head,
                std::span<double> grad, double& loss) {
  promote_obs(rec, obs_d);
  const double v = policy::value_forward(val, obs_d, ws);
  const double err = v - rec.ret;
  loss += vf_coeff * err * err * inv_b;
  if (grad.empty()) return;
  d_head[0] = 2.0 * vf_coeff * err * inv_b;
  policy::backward(val, obs_d, ws, d_head, grad);
}

std::vector<const StepRecord*> flatten(const RolloutBatch& batch) {
  std::vector<const StepRecord*> steps;
  steps.reserve(batch.total_steps);
  for (const auto& traj : batch.trajectories)
    for (const auto& s : traj.steps) steps.push_back(&s);
  return steps;
}

}  // namespace

double soft_clipped_policy_loss(const RolloutBatch& batch, const policy::Net& pol, double eps,
                                double alpha, bool include_rotation) {
  const auto steps = flatten(batch);
  if (steps.empty()) return 0.0;
  policy::Workspace ws;
  ws.resize(pol);
  std::vector<double> obs_d, d_head;
  LossAccum acc;
  const double inv_b = 1.0 / static_cast<double>(steps.size());
  const policy::LogProbOptions opts{include_rotation};
  long long i = 0;
  for (const StepRecord* s : steps)
    policy_step(pol, *s, eps, alpha, opts, inv_b, ws, obs_d, d_head, {}, acc, i++);
  return acc.loss;
}

double baseline_loss(const RolloutBatch& batch, const policy::Net& val, double vf_coeff) {
  const auto steps = flatten(batch);
  if (steps.empty()) return 0.0;
  policy::Workspace ws;
  ws.resize(val);
  std::vector<double> obs_d, d_head;
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(steps.size());
  for (const StepRecord* s : steps)
    value_step(val, *s, vf_coeff, inv_b, ws, obs_d, d_head, {}, loss);
  return loss;
}

double policy_loss_and_grad(std::span<const StepRecord* const> steps, const policy::Net& pol,
                            double eps, double alpha, bool include_rotation,
                            std::span<double> grad) {
  policy::Workspace ws;
  ws.resize(pol);
  std::vector<double> obs_d;
  std::vector<double> d_head(pol.config().head_dim, 0.0);
  LossAccum acc;
  const double inv_b = steps.empty() ? 0.0 : 1.0 / static_cast<double>(steps.size());
  const policy::LogProbOptions opts{include_rotation};
  long long i = 0;
  for (const StepRecord* s : steps)
    policy_step(pol, *s, eps, alpha, opts, inv_b, ws, obs_d, d_head, grad, acc, i++);
  return acc.loss;
}

double value_loss_and_grad(std::span<const StepRecord* const> steps, const policy::Net& val,
                           double vf_coeff, std::span<double> grad) {
  policy::Workspace ws;
  ws.resize(val);
  std::vector<double> obs_d;
  std::vector<double> d_head(1, 0.0);
  double loss = 0.0;
  const double inv_b = steps.empty() ? 0.0 : 1.0 / static_cast<double>(steps.size());
  for (const StepRecord* s : steps)
    value_step(val, *s, vf_coeff, inv_b, ws, obs_d, d_head, grad, loss);
  return loss;
}

namespace {

struct ThreadCtx {
  policy::Workspace ws;
  std::vector<double> grad;
  std::vector<double> obs_d;
  std::vector<double> d_head;
  LossAccum acc;
  double value_loss = 0.0;
};

// Runs fn(ctx, step_ptr, local_index) over a contiguous slice per thread and
// accumulates the per-thread gradients in slice order, which keeps the
// result deterministic for a fixed thread count.
template <typename Fn>
void parallel_steps(std::vector<ThreadCtx>& ctxs, std::span<const StepRecord* const> chunk,
                    int n_threads, Fn fn) {
  const std::size_t per = (chunk.size() + n_threads - 1) / n_threads;
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(n_threads);
  for (int tid = 0; tid < n_threads; ++tid) {
    const std::size_t lo = std::min(chunk.size(), tid * per);
    const std::size_t hi = std::min(chunk.size(), lo + per);
    if (lo >= hi) break;
    threads.emplace_back([&, tid, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(ctxs[tid], chunk[i], static_cast<long long>(i));
      } catch (...) {
        errors[tid] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

UpdateMetrics update(const RolloutBatch& batch, policy::Net& pol, policy::Net& val,
                     optim::Adam& adam_policy, optim::Adam& adam_value, const TrainerConfig& cfg,
                     std::uint64_t seed, int batch_index) {
  if (batch.trajectories.empty()) throw std::invalid_argument("update: empty batch");
  const auto steps = flatten(batch);
  const int n_threads = cfg.resolved_threads();
  const policy::LogProbOptions opts{cfg.include_rotation_logprob};

  std::vector<ThreadCtx> pol_ctx(n_threads), val_ctx(n_threads);
  for (auto& c : pol_ctx) {
    c.ws.resize(pol);
    c.grad.assign(pol.n_params(), 0.0);
    c.d_head.assign(pol.config().head_dim, 0.0);
  }
  for (auto& c : val_ctx) {
    c.ws.resize(val);
    c.grad.assign(val.n_params(), 0.0);
    c.d_head.assign(1, 0.0);
  }
  std::vector<double> grad_total(std::max(pol.n_params(), val.n_params()), 0.0);

  LossAccum total_acc;
  double total_value_loss = 0.0;
  long long value_count = 0;

  auto optimizer_step = [&](policy::Net& net, optim::Adam& adam, std::size_t n_params) {
    const double norm = optim::clip_global_norm({grad_total.data(), n_params}, cfg.grad_clip);
    if (!std::isfinite(norm))
      throw std::runtime_error("update: non-finite gradient norm in batch " +
                               std::to_string(batch_index));
    adam.step({net.params().data(), n_params}, {grad_total.data(), n_params});
  };

  std::vector<const StepRecord*> order(steps.begin(), steps.end());
  for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
    // Policy epoch.
    Rng shuffle_p(derive_seed(seed, {kStreamShufflePolicy, static_cast<std::uint64_t>(batch_index),
                                     static_cast<std::uint64_t>(epoch)}));
    shuffle_p.shuffle(order);
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.policy_minibatch) {
      const std::size_t hi = std::min(order.size(), lo + cfg.policy_minibatch);
      std::span<const StepRecord* const> chunk(order.data() + lo, hi - lo);
      const double inv_b = 1.0 / static_cast<double>(chunk.size());
      for (auto& c : pol_ctx) {
        std::memset(c.grad.data(), 0, sizeof(double) * c.grad.size());
        c.acc = LossAccum{};
      }
      parallel_steps(pol_ctx, chunk, n_threads,
                     [&](ThreadCtx& c, const StepRecord* s, long long idx) {
                       policy_step(pol, *s, cfg.clip_eps, cfg.temperature, opts, inv_b, c.ws,
                                   c.obs_d, c.d_head, c.grad, c.acc, idx);
                     });
      std::memset(grad_total.data(), 0, sizeof(double) * pol.n_params());
      for (auto& c : pol_ctx) {
        kern::ops().axpy(grad_total.data(), 1.0, c.grad.data(), pol.n_params());
        total_acc.loss += c.acc.loss;
        total_acc.sum_ratio += c.acc.sum_ratio;
        total_acc.sum_neg_logp += c.acc.sum_neg_logp;
        total_acc.clipped += c.acc.clipped;
        total_acc.count += c.acc.count;
      }
      optimizer_step(pol, adam_policy, pol.n_params());
    }

    // Baseline epoch.
    Rng shuffle_v(derive_seed(seed, {kStreamShuffleValue, static_cast<std::uint64_t>(batch_index),
                                     static_cast<std::uint64_t>(epoch)}));
    shuffle_v.shuffle(order);
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.baseline_minibatch) {
      const std::size_t hi = std::min(order.size(), lo + cfg.baseline_minibatch);
      std::span<const StepRecord* const> chunk(order.data() + lo, hi - lo);
      const double inv_b = 1.0 / static_cast<double>(chunk.size());
      for (auto& c : val_ctx) {
        std::memset(c.grad.data(), 0, sizeof(double) * c.grad.size());
        c.value_loss = 0.0;
      }
      parallel_steps(val_ctx, chunk, n_threads,
                     [&](ThreadCtx& c, const StepRecord* s, long long) {
                       value_step(val, *s, cfg.vf_coeff, inv_b, c.ws, c.obs_d, c.d_head, c.grad,
                                  c.value_loss);
                     });
      std::memset(grad_total.data(), 0, sizeof(double) * val.n_params());
      for (auto& c : val_ctx) {
        kern::ops().axpy(grad_total.data(), 1.0, c.grad.data(), val.n_params());
        total_value_loss += c.value_loss;
      }
      value_count += 1;
      optimizer_step(val, adam_value, val.n_params());
    }
  }

  UpdateMetrics m;
  const double minibatches_p =
      static_cast<double>(cfg.epochs_per_batch) *
      ((order.size() + cfg.policy_minibatch - 1) / cfg.policy_minibatch);
  m.policy_loss = total_acc.loss / std::max(1.0, minibatches_p);
  m.value_loss = total_value_loss / std::max<long long>(1, value_count);
  m.clip_fraction =
      total_acc.count > 0 ? static_cast<double>(total_acc.clipped) / total_acc.count : 0.0;
  m.mean_ratio = total_acc.count > 0 ? total_acc.sum_ratio / total_acc.count : 0.0;
  m.mean_entropy = total_acc.count > 0 ? total_acc.sum_neg_logp / total_acc.count : 0.0;
  return m;
}

double curriculum_delta(double current_max_success_rate) {
  if (current_max_success_rate < 0.0 || current_max_success_rate > 1.0)
    throw std::invalid_argument("curriculum_delta: success rate outside [0,1]");
  // 0.1 + (0.4 - 0.1) * (1 - rate), evaluated as a lerp so both endpoints
  // are exact.
  return std::lerp(0.4, 0.1, current_max_success_rate);
}

namespace {

constexpr char kStateMagic[8] = {'M', 'A', 'T', 'T', 'R', 'S', 'T', '\0'};

struct TrainerState {
  std::uint64_t seed = 0;
  int next_batch = 0;
  long long total_steps = 0;
  double max_success_rate = 0.0;
};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("trainer state: truncated file");
  return v;
}

void write_vec(std::ostream& out, const std::vector<double>& v) {
  write_pod<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double) * v.size()));
}

std::vector<double> read_vec(std::istream& in) {
  const auto n = read_pod<std::uint64_t>(in);
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * n));
  if (!in) throw std::runtime_error("trainer state: truncated vector");
  return v;
}

void save_trainer_state(const std::string& path, const TrainerState& st, const policy::Net& pol,
                        const policy::Net& val, const optim::Adam& ap, const optim::Adam& av) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trainer state: " + path);
  out.write(kStateMagic, sizeof(kStateMagic));
  write_pod<std::uint32_t>(out, 1);
  write_pod<std::uint64_t>(out, st.seed);
  write_pod<std::int32_t>(out, st.next_batch);
  write_pod<std::int64_t>(out, st.total_steps);
  write_pod<double>(out, st.max_success_rate);
  policy::save_net(pol, out);
  policy::save_net(val, out);
  write_pod<std::int64_t>(out, ap.t);
  write_vec(out, ap.m);
  write_vec(out, ap.v);
  write_pod<std::int64_t>(out, av.t);
  write_vec(out, av.m);
  write_vec(out, av.v);
}

TrainerState load_trainer_state(const std::string& path, policy::Net& pol, policy::Net& val,
                                optim::Adam& ap, optim::Adam& av) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trainer state: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kStateMagic, sizeof(kStateMagic)) != 0)
    throw std::runtime_error("trainer state: bad magic");
  if (read_pod<std::uint32_t>(in) != 1) throw std::runtime_error("trainer state: bad version");
  TrainerState st;
  st.seed = read_pod<std::uint64_t>(in);
  st.next_batch = read_pod<std::int32_t>(in);
  st.total_steps = read_pod<std::int64_t>(in);
  st.max_success_rate = read_pod<double>(in);
  pol = policy::load_net(in);
  val = policy::load_net(in);
  ap.t = read_pod<std::int64_t>(in);
  ap.m = read_vec(in);
  ap.v = read_vec(in);
  av.t = read_pod<std::int64_t>(in);
  av.m = read_vec(in);
  av.v = read_vec(in);
  return st;
}

std::string format_metrics_row(int batch, long long steps, double success, double max_rate,
                               double delta, const UpdateMetrics& m) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%d,%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", batch,
                steps, success, max_rate, delta, m.policy_loss, m.value_loss, m.clip_fraction,
                m.mean_entropy);
  return buf;
}

}  // namespace

TrainResult train(const TrainerConfig& cfg, const sim::EnvConfig& env_cfg, std::uint64_t seed,
                  const std::string& out_dir, const std::optional<std::string>& resume_state) {
  cfg.validate();
  env_cfg.hand.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const obs::ObsDims dims = dims_for(env_cfg);
  policy::Net pol = policy::Net::make_policy(dims, env_cfg.hand.n_fingers, cfg.hidden,
                                             cfg.xyz_time_pool);
  policy::Net val = policy::Net::make_value(dims, cfg.hidden, cfg.xyz_time_pool);
  optim::Adam adam_p, adam_v;
  adam_p.lr = cfg.lr;
  adam_v.lr = cfg.lr;

  TrainerState st;
  st.seed = seed;
  if (resume_state) {
    st = load_trainer_state(*resume_state, pol, val, adam_p, adam_v);
    if (st.seed != seed && seed != 0) st.seed = seed;
  } else {
    Rng init_p(derive_seed(seed, {kStreamInit, 0}));
    Rng init_v(derive_seed(seed, {kStreamInit, 1}));
    pol.init(init_p);
    val.init(init_v);
    adam_p.reset(pol.n_params());
    adam_v.reset(val.n_params());
  }

  const std::string metrics_path = out_dir + "/metrics.csv";
  std::ofstream metrics(metrics_path, resume_state ? std::ios::app : std::ios::trunc);
  if (!metrics) throw std::runtime_error("cannot write metrics: " + metrics_path);
  if (!resume_state) {
    metrics << "batch,steps,success_rate,max_success_rate,delta_finger,policy_loss,value_loss,"
               "clip_fraction,mean_entropy\n";
    metrics.flush();
  }

  const std::string policy_path = out_dir + "/policy_latest.ckpt";
  const std::string value_path = out_dir + "/value_latest.ckpt";
  const std::string state_path = out_dir + "/trainer_state.bin";
  auto persist = [&](const TrainerState& state) {
    policy::save_net_file(pol, policy_path);
    policy::save_net_file(val, value_path);
    save_trainer_state(state_path, state, pol, val, adam_p, adam_v);
  };
  persist(st);

  TrainResult result;
  result.policy_checkpoint = policy_path;
  result.metrics_csv = metrics_path;

  for (int b = st.next_batch; b < cfg.total_batches; ++b) {
    const double delta = curriculum_delta(st.max_success_rate);
    RolloutBatch batch = collect_rollouts(pol, val, env_cfg, cfg, delta, st.seed, b);
    st.total_steps += batch.total_steps;
    fill_advantages(batch, cfg.gamma, cfg.gae_lambda, cfg.normalize_advantages);
    const UpdateMetrics m = update(batch, pol, val, adam_p, adam_v, cfg, st.seed, b);

    st.max_success_rate = std::max(st.max_success_rate, batch.success_rate);
    metrics << format_metrics_row(b, st.total_steps, batch.success_rate, st.max_success_rate,
                                  delta, m)
            << "\n";
    metrics.flush();

    st.next_batch = b + 1;
    persist(st);
    if (cfg.checkpoint_every > 0 && (b + 1) % cfg.checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof(name), "/policy_b%04d.ckpt", b);
      policy::save_net_file(pol, out_dir + name);
    }

    result.batches_run = b + 1 - (resume_state ? 0 : 0);
    result.final_success_rate = batch.success_rate;
    result.max_success_rate = st.max_success_rate;
    result.total_env_steps = st.total_steps;
    if (cfg.stop_at_success_rate >= 0.0 && batch.success_rate >= cfg.stop_at_success_rate) break;
  }
  return result;
}

}  // namespace mat::rl
