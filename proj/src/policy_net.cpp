#include "mat/policy_net.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "mat/kernels.hpp"

namespace mat::policy {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

bool all_zero(const double* x, int n) {
  for (int i = 0; i < n; ++i)
    if (x[i] != 0.0) return false;
  return true;
}

void relu(const double* z, double* a, int n) {
  for (int i = 0; i < n; ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void tanh_act(const double* z, double* a, int n) {
  for (int i = 0; i < n; ++i) a[i] = std::tanh(z[i]);
}

}  // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(sigmoid(z)) = -softplus(-z), stable for large |z|.
double log_sigmoid(double z) {
  const double a = -z;
  return -(std::max(a, 0.0) + std::log1p(std::exp(-std::fabs(a))));
}

Net::Net(NetConfig cfg) : cfg_(std::move(cfg)) {
  const auto& d = cfg_.dims;
  block_w_ = {d.contacts_len(), d.d_contacts_len(), d.joints_len(),
              d.d_joints_len(), d.xyz_len(),        d.d_xyz_len()};
  int off = 0;
  for (int b = 0; b < kNumBranches; ++b) {
    block_off_[b] = off;
    off += block_w_[b];
  }
  for (int b = 0; b < kNumBranches; ++b) {
    const bool pooled = cfg_.xyz_time_pool && (b == 4 || b == 5);
    branch_in_[b] = pooled ? d.cells * 3 : block_w_[b];
  }

  const int h = cfg_.hidden;
  auto add_tensor = [&](int rows, int cols) {
    TensorRef t;
    t.rows = rows;
    t.cols = cols;
    t.w_off = n_params_;
    t.b_off = n_params_ + static_cast<std::size_t>(rows) * cols;
    n_params_ = t.b_off + rows;
    tensors_.push_back(t);
  };

  for (int b = 0; b < kNumBranches; ++b) {
    add_tensor(h, branch_in_[b]);
    add_tensor(h, h);
    add_tensor(h, h);
  }
  add_tensor(h, kNumBranches * h);  // trunk
  add_tensor(h, h);
  add_tensor(h, h);
  add_tensor(cfg_.head_dim, h);  // head

  if (cfg_.has_log_sigma) {
    log_sigma_off_ = n_params_;
    n_params_ += 1;
  }
  params_.assign(n_params_, 0.0);
}

Net Net::make_policy(const obs::ObsDims& dims, int n_fingers, int hidden, bool xyz_time_pool) {
  NetConfig cfg;
  cfg.dims = dims;
  cfg.n_fingers = n_fingers;
  cfg.hidden = hidden;
  cfg.head_dim = n_fingers + 3;
  cfg.has_log_sigma = true;
  cfg.xyz_time_pool = xyz_time_pool;
  return Net(std::move(cfg));
}

Net Net::make_value(const obs::ObsDims& dims, int hidden, bool xyz_time_pool) {
  NetConfig cfg;
  cfg.dims = dims;
  cfg.hidden = hidden;
  cfg.head_dim = 1;
  cfg.has_log_sigma = false;
  cfg.xyz_time_pool = xyz_time_pool;
  return Net(std::move(cfg));
}

void Net::init(Rng& rng) {
  for (const auto& t : tensors_) {
    const double bound = std::sqrt(6.0 / (t.cols + t.rows));
    double* w = params_.data() + t.w_off;
    const std::size_t n = static_cast<std::size_t>(t.rows) * t.cols;
    for (std::size_t i = 0; i < n; ++i) w[i] = rng.uniform(-bound, bound);
    std::memset(params_.data() + t.b_off, 0, sizeof(double) * t.rows);
  }
  if (cfg_.has_log_sigma) params_[log_sigma_off_] = std::log(0.5);
}

void Workspace::resize(const Net& net) {
  const int h = net.config().hidden;
  for (int b = 0; b < kNumBranches; ++b) {
    auto& br = branch[b];
    br.pooled.assign(net.branch_input_width(b), 0.0);
    br.z1.assign(h, 0.0);
    br.a1.assign(h, 0.0);
    br.z2.assign(h, 0.0);
    br.a2.assign(h, 0.0);
    br.z3.assign(h, 0.0);
    br.feat.assign(h, 0.0);
  }
  cat.assign(kNumBranches * h, 0.0);
  zt1.assign(h, 0.0);
  at1.assign(h, 0.0);
  zt2.assign(h, 0.0);
  at2.assign(h, 0.0);
  zt3.assign(h, 0.0);
  at3.assign(h, 0.0);
  head.assign(net.config().head_dim, 0.0);
  d_hidden_a.assign(h, 0.0);
  d_hidden_b.assign(h, 0.0);
  d_cat.assign(kNumBranches * h, 0.0);
}

void forward(const Net& net, std::span<const double> obs, Workspace& ws) {
  if (static_cast<int>(obs.size()) != net.obs_len())
    throw std::invalid_argument("forward: observation length mismatch");

  const auto& k = kern::ops();
  const auto& p = net.params();
  const int h = net.config().hidden;
  const auto& d = net.config().dims;

  for (int b = 0; b < kNumBranches; ++b) {
    auto& br = ws.branch[b];
    const double* block = obs.data() + net.obs_block_offset(b);
    const int block_w = net.obs_block_width(b);

    if (net.config().xyz_time_pool && (b == 4 || b == 5)) {
      // Mean over history rows, per cell coordinate.
      const int rows = b == 4 ? d.history : d.history - 1;
      const int cols = d.cells * 3;
      double* px = br.pooled.data();
      std::memset(px, 0, sizeof(double) * cols);
      for (int r = 0; r < rows; ++r) k.axpy(px, 1.0, block + static_cast<std::size_t>(r) * cols, cols);
      k.scale(px, 1.0 / rows, cols);
      br.x = px;
      br.x_len = cols;
    } else {
      br.x = block;
      br.x_len = block_w;
    }
    br.x_all_zero = all_zero(br.x, br.x_len);

    const auto& t1 = net.tensors()[b * 3 + 0];
    if (br.x_all_zero) {
      std::memcpy(br.z1.data(), p.data() + t1.b_off, sizeof(double) * h);
    } else {
      k.affine(br.z1.data(), p.data() + t1.w_off, p.data() + t1.b_off, br.x, h, br.x_len);
    }
    relu(br.z1.data(), br.a1.data(), h);

    const auto& t2 = net.tensors()[b * 3 + 1];
    k.affine(br.z2.data(), p.data() + t2.w_off, p.data() + t2.b_off, br.a1.data(), h, h);
    relu(br.z2.data(), br.a2.data(), h);

    const auto& t3 = net.tensors()[b * 3 + 2];
    k.affine(br.z3.data(), p.data() + t3.w_off, p.data() + t3.b_off, br.a2.data(), h, h);
    tanh_act(br.z3.data(), br.feat.data(), h);

    std::memcpy(ws.cat.data() + static_cast<std::size_t>(b) * h, br.feat.data(),
                sizeof(double) * h);
  }

  const std::size_t tb = kNumBranches * 3;
  const auto& tt1 = net.tensors()[tb + 0];
  k.affine(ws.zt1.data(), p.data() + tt1.w_off, p.data() + tt1.b_off, ws.cat.data(), h,
           kNumBranches * h);
  relu(ws.zt1.data(), ws.at1.data(), h);

  const auto& tt2 = net.tensors()[tb + 1];
  k.affine(ws.zt2.data(), p.data() + tt2.w_off, p.data() + tt2.b_off, ws.at1.data(), h, h);
  relu(ws.zt2.data(), ws.at2.data(), h);

  const auto& tt3 = net.tensors()[tb + 2];
  k.affine(ws.zt3.data(), p.data() + tt3.w_off, p.data() + tt3.b_off, ws.at2.data(), h, h);
  relu(ws.zt3.data(), ws.at3.data(), h);

  const auto& th = net.tensors()[tb + 3];
  k.affine(ws.head.data(), p.data() + th.w_off, p.data() + th.b_off, ws.at3.data(),
           net.config().head_dim, h);
}

namespace {

// d_out: gradient at the layer output (pre-activation). Accumulates weight
// and bias gradients and writes the input gradient into d_in.
void linear_backward(const kern::Ops& k, const TensorRef& t, const double* params,
                     const double* x, const double* d_out, double* d_in, double* grad,
                     bool skip_rank1, bool want_d_in) {
  double* gw = grad + t.w_off;
  double* gb = grad + t.b_off;
  if (want_d_in) std::memset(d_in, 0, sizeof(double) * t.cols);
  for (int r = 0; r < t.rows; ++r) {
    const double dr = d_out[r];
    gb[r] += dr;
    if (dr != 0.0) {
      if (!skip_rank1) k.axpy(gw + static_cast<std::size_t>(r) * t.cols, dr, x, t.cols);
      if (want_d_in)
        k.axpy(d_in, dr, params + t.w_off + static_cast<std::size_t>(r) * t.cols, t.cols);
    }
  }
}

void relu_backward(const double* z, double* d, int n) {
  for (int i = 0; i < n; ++i)
    if (z[i] <= 0.0) d[i] = 0.0;
}

}  // namespace

void backward(const Net& net, std::span<const double> obs, const Workspace& ws,
              std::span<const double> d_head, std::span<double> grad) {
  if (static_cast<int>(d_head.size()) != net.config().head_dim)
    throw std::invalid_argument("backward: head gradient length mismatch");
  if (grad.size() != net.n_params()) throw std::invalid_argument("backward: grad size mismatch");
  (void)obs;

  const auto& k = kern::ops();
  const auto& p = net.params();
  const int h = net.config().hidden;
  const std::size_t tb = kNumBranches * 3;

  // Workspace scratch is reused mutably; forward state (activations) is read.
  auto& da = const_cast<Workspace&>(ws).d_hidden_a;
  auto& db = const_cast<Workspace&>(ws).d_hidden_b;
  auto& dcat = const_cast<Workspace&>(ws).d_cat;

  // Head -> trunk.
  linear_backward(k, net.tensors()[tb + 3], p.data(), ws.at3.data(), d_head.data(), da.data(),
                  grad.data(), false, true);
  relu_backward(ws.zt3.data(), da.data(), h);

  linear_backward(k, net.tensors()[tb + 2], p.data(), ws.at2.data(), da.data(), db.data(),
                  grad.data(), false, true);
  relu_backward(ws.zt2.data(), db.data(), h);

  linear_backward(k, net.tensors()[tb + 1], p.data(), ws.at1.data(), db.data(), da.data(),
                  grad.data(), false, true);
  relu_backward(ws.zt1.data(), da.data(), h);

  linear_backward(k, net.tensors()[tb + 0], p.data(), ws.cat.data(), da.data(), dcat.data(),
                  grad.data(), false, true);

  // Branches.
  for (int b = 0; b < kNumBranches; ++b) {
    const auto& br = ws.branch[b];
    double* d3 = da.data();
    const double* dfeat = dcat.data() + static_cast<std::size_t>(b) * h;
    for (int i = 0; i < h; ++i) d3[i] = dfeat[i] * (1.0 - br.feat[i] * br.feat[i]);

    linear_backward(k, net.tensors()[b * 3 + 2], p.data(), br.a2.data(), d3, db.data(),
                    grad.data(), false, true);
    relu_backward(br.z2.data(), db.data(), h);

    linear_backward(k, net.tensors()[b * 3 + 1], p.data(), br.a1.data(), db.data(), da.data(),
                    grad.data(), false, true);
    relu_backward(br.z1.data(), da.data(), h);

    // First layer: input gradient is not needed; skip the weight update
    // entirely for all-zero inputs (it would add zero).
    linear_backward(k, net.tensors()[b * 3 + 0], p.data(), br.x, da.data(), nullptr, grad.data(),
                    br.x_all_zero, false);
  }
}

HeadOut heads_from(const Net& policy_net, const Workspace& ws) {
  const int n = policy_net.config().n_fingers;
  HeadOut out;
  out.finger_logits.assign(ws.head.begin(), ws.head.begin() + n);
  out.reopen_logit = ws.head[n];
  out.lift_logit = ws.head[n + 1];
  out.rot_mean_pre = ws.head[n + 2];
  out.log_sigma = policy_net.log_sigma();
  return out;
}

HeadOut policy_forward(const Net& policy_net, std::span<const double> obs, Workspace& ws) {
  forward(policy_net, obs, ws);
  return heads_from(policy_net, ws);
}

double value_forward(const Net& value_net, std::span<const double> obs, Workspace& ws) {
  forward(value_net, obs, ws);
  const double v = ws.head[0];
  if (!std::isfinite(v)) throw std::runtime_error("value_forward: non-finite value");
  return v;
}

namespace {

double rotation_log_density(const HeadOut& heads, double rotation) {
  const double y = rotation / kPi;
  const double mu = std::tanh(heads.rot_mean_pre);
  const double sigma = std::exp(heads.log_sigma);
  const double zr = (y - mu) / sigma;
  return -0.5 * zr * zr - heads.log_sigma - 0.5 * kLog2Pi - std::log(kPi);
}

}  // namespace

ActionSample sample_action(const HeadOut& heads, Rng& rng) {
  const int n = static_cast<int>(heads.finger_logits.size());
  ActionSample s;
  s.finger_flags.resize(n);
  s.finger_logps.resize(n);
  // Fixed draw order: fingers, reopen, lift, rotation.
  for (int i = 0; i < n; ++i) {
    const double p = sigmoid(heads.finger_logits[i]);
    s.finger_flags[i] = rng.uniform() < p ? 1 : 0;
    s.finger_logps[i] = s.finger_flags[i] ? log_sigmoid(heads.finger_logits[i])
                                          : log_sigmoid(-heads.finger_logits[i]);
  }
  s.reopen = rng.uniform() < sigmoid(heads.reopen_logit) ? 1 : 0;
  s.reopen_logp =
      s.reopen ? log_sigmoid(heads.reopen_logit) : log_sigmoid(-heads.reopen_logit);
  s.lift = rng.uniform() < sigmoid(heads.lift_logit) ? 1 : 0;
  s.lift_logp = s.lift ? log_sigmoid(heads.lift_logit) : log_sigmoid(-heads.lift_logit);

  const double mu = std::tanh(heads.rot_mean_pre);
  const double sigma = std::exp(heads.log_sigma);
  double y = mu + sigma * rng.normal();
  y = std::clamp(y, -1.0, 1.0);
  s.wrist_rotation = kPi * y;
  s.rotation_logp = rotation_log_density(heads, s.wrist_rotation);
  return s;
}

ActionSample deterministic_action(const HeadOut& heads) {
  const int n = static_cast<int>(heads.finger_logits.size());
  ActionSample s;
  s.finger_flags.resize(n);
  s.finger_logps.assign(n, 0.0);
  for (int i = 0; i < n; ++i) s.finger_flags[i] = heads.finger_logits[i] > 0.0 ? 1 : 0;
  s.reopen = heads.reopen_logit > 0.0 ? 1 : 0;
  s.lift = heads.lift_logit > 0.0 ? 1 : 0;
  s.wrist_rotation = kPi * std::tanh(heads.rot_mean_pre);
  return s;
}

double log_prob(const HeadOut& heads, const ResolvedAction& resolved,
                const LogProbOptions& opts) {
  switch (resolved.kind) {
    case ActionKind::HorizonLift:
      return 0.0;
    case ActionKind::Reopen: {
      if (resolved.forced_reopen) return 0.0;
      double lp = log_sigmoid(heads.reopen_logit);
      if (opts.include_rotation) lp += rotation_log_density(heads, resolved.wrist_rotation);
      return lp;
    }
    case ActionKind::Lift:
      return log_sigmoid(-heads.reopen_logit) + log_sigmoid(heads.lift_logit);
    case ActionKind::Fingers: {
      double lp = log_sigmoid(-heads.reopen_logit) + log_sigmoid(-heads.lift_logit);
      for (std::size_t i = 0; i < heads.finger_logits.size(); ++i) {
        const bool on = i < resolved.finger_flags.size() && resolved.finger_flags[i];
        lp += on ? log_sigmoid(heads.finger_logits[i]) : log_sigmoid(-heads.finger_logits[i]);
      }
      return lp;
    }
  }
  return 0.0;
}

HeadGrad log_prob_grad(const HeadOut& heads, const ResolvedAction& resolved,
                       const LogProbOptions& opts) {
  const int n = static_cast<int>(heads.finger_logits.size());
  HeadGrad g;
  g.finger.assign(n, 0.0);

  switch (resolved.kind) {
    case ActionKind::HorizonLift:
      break;
    case ActionKind::Reopen: {
      if (resolved.forced_reopen) break;
      g.reopen = 1.0 - sigmoid(heads.reopen_logit);
      if (opts.include_rotation) {
        const double y = resolved.wrist_rotation / kPi;
        const double mu = std::tanh(heads.rot_mean_pre);
        const double sigma = std::exp(heads.log_sigma);
        const double zr = (y - mu) / sigma;
        g.rot_mean = (zr / sigma) * (1.0 - mu * mu);
        g.log_sigma = zr * zr - 1.0;
      }
      break;
    }
    case ActionKind::Lift:
      g.reopen = -sigmoid(heads.reopen_logit);
      g.lift = 1.0 - sigmoid(heads.lift_logit);
      break;
    case ActionKind::Fingers: {
      g.reopen = -sigmoid(heads.reopen_logit);
      g.lift = -sigmoid(heads.lift_logit);
      for (int i = 0; i < n; ++i) {
        const double flag =
            (i < static_cast<int>(resolved.finger_flags.size()) && resolved.finger_flags[i]) ? 1.0
                                                                                             : 0.0;
        g.finger[i] = flag - sigmoid(heads.finger_logits[i]);
      }
      break;
    }
  }
  return g;
}

void pack_head_grad(const HeadGrad& hg, double coef, std::span<double> d_head) {
  const int n = static_cast<int>(hg.finger.size());
  for (int i = 0; i < n; ++i) d_head[i] = coef * hg.finger[i];
  d_head[n] = coef * hg.reopen;
  d_head[n + 1] = coef * hg.lift;
  d_head[n + 2] = coef * hg.rot_mean;
}

}  // namespace mat::policy
