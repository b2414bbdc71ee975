#pragma once

#include <array>
#include <span>
#include <vector>

#include "mat/actions.hpp"
#include "mat/obs_window.hpp"
#include "mat/rng.hpp"

namespace mat::policy {

// Multi-branch network over the six observation components. Each branch is
// three hidden layers of `hidden` units (rectified-linear, final layer tanh
// so features land in (-1, 1)); branch features are concatenated and passed
// through a three-layer trunk, then a linear head.
//
// The optional xyz time-pool replaces each xyz-history block with its
// per-coordinate mean over the history rows before the first hidden layer.
// It is a fixed structural projection (no free parameters), recorded in the
// checkpoint header, and exists to bound the first-layer parameter count.
struct NetConfig {
  obs::ObsDims dims;
  int n_fingers = 3;
  int hidden = 128;
  int head_dim = 1;
  bool has_log_sigma = false;
  bool xyz_time_pool = false;
};

struct TensorRef {
  std::size_t w_off = 0;
  std::size_t b_off = 0;
  int rows = 0;
  int cols = 0;
};

constexpr int kNumBranches = 6;

class Net {
 public:
  static Net make_policy(const obs::ObsDims& dims, int n_fingers, int hidden = 128,
                         bool xyz_time_pool = false);
  static Net make_value(const obs::ObsDims& dims, int hidden = 128, bool xyz_time_pool = false);

  const NetConfig& config() const { return cfg_; }
  std::size_t n_params() const { return n_params_; }
  std::size_t log_sigma_offset() const { return log_sigma_off_; }
  const std::vector<TensorRef>& tensors() const { return tensors_; }
  int branch_input_width(int b) const { return branch_in_[b]; }
  int obs_block_offset(int b) const { return block_off_[b]; }
  int obs_block_width(int b) const { return block_w_[b]; }
  int obs_len() const { return cfg_.dims.encoded_len(); }

  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  double log_sigma() const { return cfg_.has_log_sigma ? params_[log_sigma_off_] : 0.0; }

  // Symmetric uniform init, biases zero, log sigma_rotation = log 0.5.
  void init(Rng& rng);

 private:
  Net(NetConfig cfg);

  NetConfig cfg_;
  std::vector<TensorRef> tensors_;  // 6 branches x 3 layers, trunk x 3, head
  std::array<int, kNumBranches> branch_in_{};
  std::array<int, kNumBranches> block_off_{};
  std::array<int, kNumBranches> block_w_{};
  std::size_t n_params_ = 0;
  std::size_t log_sigma_off_ = 0;
  std::vector<double> params_;
};

struct BranchScratch {
  const double* x = nullptr;  // layer-1 input (obs slice or pooled buffer)
  int x_len = 0;
  bool x_all_zero = false;
  std::vector<double> pooled;
  std::vector<double> z1, a1, z2, a2, z3, feat;
};

struct Workspace {
  std::array<BranchScratch, kNumBranches> branch;
  std::vector<double> cat;
  std::vector<double> zt1, at1, zt2, at2, zt3, at3;
  std::vector<double> head;
  std::vector<double> d_hidden_a, d_hidden_b, d_cat;

  void resize(const Net& net);
};

// Deterministic forward pass; fills `ws` and returns the head vector in
// ws.head. Throws on observation length mismatch.
void forward(const Net& net, std::span<const double> obs, Workspace& ws);

// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(head outputs),
// reusing the activations cached in `ws` by the matching forward call.
void backward(const Net& net, std::span<const double> obs, const Workspace& ws,
              std::span<const double> d_head, std::span<double> grad);

// Policy head layout: [0, n) finger logits, then reopen logit, lift logit,
// wrist-rotation mean pre-activation.
struct HeadOut {
  std::vector<double> finger_logits;
  double reopen_logit = 0.0;
  double lift_logit = 0.0;
  double rot_mean_pre = 0.0;
  double log_sigma = 0.0;
};

HeadOut heads_from(const Net& policy_net, const Workspace& ws);
HeadOut policy_forward(const Net& policy_net, std::span<const double> obs, Workspace& ws);
double value_forward(const Net& value_net, std::span<const double> obs, Workspace& ws);

ActionSample sample_action(const HeadOut& heads, Rng& rng);
// Mode action: Bernoulli flags thresholded at 0.5, rotation at the mean.
ActionSample deterministic_action(const HeadOut& heads);

struct LogProbOptions {
  // Adds the wrist-rotation Gaussian log-density on chosen reopen steps.
  // Off = the discrete factorization exactly.
  bool include_rotation = true;
};

// Composite log-probability of a resolved action. Horizon-forced lifts and
// stall-forced reopens are environment events and contribute zero.
double log_prob(const HeadOut& heads, const ResolvedAction& resolved,
                const LogProbOptions& opts = {});

struct HeadGrad {
  std::vector<double> finger;
  double reopen = 0.0;
  double lift = 0.0;
  double rot_mean = 0.0;
  double log_sigma = 0.0;
};

HeadGrad log_prob_grad(const HeadOut& heads, const ResolvedAction& resolved,
                       const LogProbOptions& opts = {});

// Packs a HeadGrad into the flat head-output gradient vector (finger logits,
// reopen, lift, rot mean), scaled by `coef`.
void pack_head_grad(const HeadGrad& hg, double coef, std::span<double> d_head);

double sigmoid(double z);
double log_sigmoid(double z);

}  // namespace mat::policy
