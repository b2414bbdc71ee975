#include "mat/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace mat::baselines {

ResolvedAction open_loop_policy(int t, const OpenLoopConfig& cfg, int n_fingers) {
  ResolvedAction a;
  if (t >= cfg.t_close) {
    a.kind = ActionKind::Lift;
    return a;
  }
  a.kind = ActionKind::Fingers;
  a.finger_flags.assign(n_fingers, 1);
  return a;
}

LatchState make_latch_state(int n_fingers) {
  LatchState s;
  s.latched.assign(n_fingers, 0);
  s.stall_count.assign(n_fingers, 0);
  s.last_joint.assign(n_fingers, 0.0);
  s.commanded.assign(n_fingers, 0);
  return s;
}

ResolvedAction tactile_latch_policy(const sim::TactileFrame& frame, LatchState& state,
                                    const sim::HandModel& hand, const LatchConfig& cfg) {
  const int n = hand.n_fingers;

  for (int cell = 0; cell < hand.n_cells(); ++cell) {
    const int finger = sim::cell_finger(hand, cell);
    if (finger >= 0 && frame.binary[cell]) state.latched[finger] = 1;
  }
  // Stall latch: a commanded finger whose joint did not move counts as
  // blocked; after enough stalled steps it latches.
  for (int f = 0; f < n; ++f) {
    if (!state.latched[f] && state.commanded[f]) {
      if (std::fabs(frame.joint_angles[f] - state.last_joint[f]) <= cfg.stall_threshold)
        state.stall_count[f] += 1;
      else
        state.stall_count[f] = 0;
      if (state.stall_count[f] >= cfg.stall_latch_steps) state.latched[f] = 1;
    }
    state.last_joint[f] = frame.joint_angles[f];
  }
  if (!state.all_latched) {
    bool all = true;
    for (int f = 0; f < n; ++f) all = all && state.latched[f];
    state.all_latched = all;
  }

  ResolvedAction a;
  if (state.all_latched && state.steps_since_all_latched >= cfg.k_unison) {
    a.kind = ActionKind::Lift;
    state.commanded.assign(n, 0);
    return a;
  }

  a.kind = ActionKind::Fingers;
  a.finger_flags.assign(n, 0);
  for (int f = 0; f < n; ++f) {
    a.finger_flags[f] = state.all_latched ? 1 : (state.latched[f] ? 0 : 1);
    state.commanded[f] = a.finger_flags[f];
  }
  if (state.all_latched) state.steps_since_all_latched += 1;
  return a;
}

AblationMode ablation_from_string(const std::string& name) {
  if (name.empty() || name == "none") return AblationMode::None;
  if (name == "finger_closing_only") return AblationMode::FingerClosingOnly;
  if (name == "regrasping_only") return AblationMode::RegraspingOnly;
  if (name == "position_only") return AblationMode::PositionOnly;
  if (name == "orientation_only") return AblationMode::OrientationOnly;
  throw std::invalid_argument("unknown ablation mode: " + name);
}

std::string to_string(AblationMode mode) {
  switch (mode) {
    case AblationMode::None: return "none";
    case AblationMode::FingerClosingOnly: return "finger_closing_only";
    case AblationMode::RegraspingOnly: return "regrasping_only";
    case AblationMode::PositionOnly: return "position_only";
    case AblationMode::OrientationOnly: return "orientation_only";
  }
  return "none";
}

ActionSample apply_ablation(ActionSample sample, AblationMode mode) {
  switch (mode) {
    case AblationMode::None:
    case AblationMode::OrientationOnly:
      break;  // orientation-only acts on the environment side
    case AblationMode::FingerClosingOnly:
      sample.reopen = 0;
      break;
    case AblationMode::RegraspingOnly:
      for (auto& f : sample.finger_flags) f = 1;
      break;
    case AblationMode::PositionOnly:
      sample.wrist_rotation = 0.0;
      break;
  }
  return sample;
}

}  // namespace mat::baselines
