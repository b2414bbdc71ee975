#pragma once

#include <span>

#include "mat/world.hpp"

namespace mat::regrasp {

using sim::ContactSnapshot;
using sim::HandModel;
using sim::HandState;
using sim::WorldState;

// New palm target from the most recent frame that had at least one active
// cell: x and y are the mean over active links of that link's active-cell
// centroid, z stays at p_old. With no contact anywhere in history the palm
// stays where it is.
Vec3 tactile_centroid_target(std::span<const ContactSnapshot> history, const HandModel& hand,
                             const Vec3& p_old);

// Rolls the wrist (and with it the finger azimuths) by `angle`, wrapping the
// result into [-pi, pi). Throws if |angle| > pi.
HandState apply_wrist_rotation(const HandState& state, double angle);

// True when the palm normal is within `tolerance_deg` of the table plane, in
// which case position adjustment is disabled (rotation stays allowed).
bool side_grasp_guard(const HandState& state, double tolerance_deg = 15.0);

enum class RecoveryPhase { Closing, Reopen, Lifting };

struct CollisionRecoveryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raises the palm in `step_m` increments until no cell penetrates an object
// deeper than `tolerance`. Only acts during the reopen/adjustment phase; a
// no-op for the closing and lifting phases. Throws after `max_iters`
// increments (pathological scene).
WorldState collision_recovery(const HandModel& hand, WorldState world, RecoveryPhase phase,
                              double tolerance, double step_m = 0.001, int max_iters = 1000);

}  // namespace mat::regrasp
