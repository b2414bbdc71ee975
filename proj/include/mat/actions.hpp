#pragma once

#include <cstdint>
#include <vector>

namespace mat {

// Factored action: one close/hold bit per finger, reopen and lift bits, and
// the wrist rotation used when reopening. Sampled values carry their
// per-component log-probabilities from sampling time.
struct ActionSample {
  std::vector<std::uint8_t> finger_flags;
  std::uint8_t reopen = 0;
  std::uint8_t lift = 0;
  double wrist_rotation = 0.0;  // radians in [-pi, pi]
  std::vector<double> finger_logps;
  double reopen_logp = 0.0;
  double lift_logp = 0.0;
  double rotation_logp = 0.0;
};

enum class ActionKind { Fingers, Reopen, Lift, HorizonLift };

// Action after the priority rules (reopen beats lift; the final step always
// lifts). forced_reopen marks reopens imposed by the stall rule rather than
// chosen by the policy.
struct ResolvedAction {
  ActionKind kind = ActionKind::Fingers;
  std::vector<std::uint8_t> finger_flags;
  double wrist_rotation = 0.0;
  bool forced_reopen = false;
};

ResolvedAction resolve_action(const ActionSample& sample, bool forced_reopen, bool at_horizon);

inline bool is_terminal(ActionKind k) {
  return k == ActionKind::Lift || k == ActionKind::HorizonLift;
}

}  // namespace mat
