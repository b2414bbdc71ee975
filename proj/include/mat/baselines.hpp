#pragma once

#include <string>

#include "mat/actions.hpp"
#include "mat/world.hpp"

namespace mat::baselines {

// Open-loop reference: close every finger by a fixed large increment until
// t_close, then lift. Never reopens.
struct OpenLoopConfig {
  double delta_finger = 0.4;
  int t_close = 6;
};

ResolvedAction open_loop_policy(int t, const OpenLoopConfig& cfg, int n_fingers);

// Contact-latch controller: each finger stops on its first contact; once all
// fingers are latched they close in unison for k_unison steps, then lift.
// A finger whose joint stalls for stall_latch_steps commanded steps latches
// too (it is blocked or fully closed).
struct LatchConfig {
  double delta_finger = 0.4;
  int k_unison = 3;
  int stall_latch_steps = 5;
  double stall_threshold = 0.05;
};

struct LatchState {
  std::vector<std::uint8_t> latched;  // monotone within an episode
  bool all_latched = false;
  int steps_since_all_latched = 0;
  std::vector<int> stall_count;
  std::vector<double> last_joint;
  std::vector<std::uint8_t> commanded;
};

LatchState make_latch_state(int n_fingers);

ResolvedAction tactile_latch_policy(const sim::TactileFrame& frame, LatchState& state,
                                    const sim::HandModel& hand, const LatchConfig& cfg);

// Policy wrappers that disable one component of the full method.
enum class AblationMode {
  None,
  FingerClosingOnly,  // reopen masked off (stall rule included)
  RegraspingOnly,     // adaptive finger choice replaced by close-all
  PositionOnly,       // wrist rotation zeroed
  OrientationOnly,    // palm position adjustment skipped
};

AblationMode ablation_from_string(const std::string& name);
std::string to_string(AblationMode mode);

// Masks a sampled action according to the ablation mode. Environment-side
// switches (forced reopen, position adjustment) are applied by the harness.
ActionSample apply_ablation(ActionSample sample, AblationMode mode);

}  // namespace mat::baselines
