#include "mat/actions.hpp"

namespace mat {

ResolvedAction resolve_action(const ActionSample& sample, bool forced_reopen, bool at_horizon) {
  ResolvedAction out;
  out.wrist_rotation = sample.wrist_rotation;
  if (at_horizon) {
    out.kind = ActionKind::HorizonLift;
    return out;
  }
  if (sample.reopen || forced_reopen) {
    out.kind = ActionKind::Reopen;
    out.forced_reopen = forced_reopen && !sample.reopen;
    return out;
  }
  if (sample.lift) {
    out.kind = ActionKind::Lift;
    return out;
  }
  out.kind = ActionKind::Fingers;
  out.finger_flags = sample.finger_flags;
  return out;
}

}  // namespace mat
