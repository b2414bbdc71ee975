#include "mat/regrasp.hpp"

#include <algorithm>
#include <cmath>

namespace mat::regrasp {

Vec3 tactile_centroid_target(std::span<const ContactSnapshot> history, const HandModel& hand,
                             const Vec3& p_old) {
  // Most recent frame with at least one active cell, scanning the whole
  // episode history.
  const ContactSnapshot* frame = nullptr;
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (!it->active.empty()) {
      frame = &*it;
      break;
    }
  }
  if (!frame) return p_old;

  const int n_links = hand.n_links_with_cells();
  std::vector<double> sx(n_links, 0.0), sy(n_links, 0.0);
  std::vector<int> count(n_links, 0);
  for (const auto& rec : frame->active) {
    sx[rec.link] += rec.world_pos.x;
    sy[rec.link] += rec.world_pos.y;
    count[rec.link] += 1;
  }

  double mx = 0.0, my = 0.0;
  int active_links = 0;
  for (int m = 0; m < n_links; ++m) {
    if (count[m] == 0) continue;
    mx += sx[m] / count[m];
    my += sy[m] / count[m];
    active_links += 1;
  }
  return {mx / active_links, my / active_links, p_old.z};
}

HandState apply_wrist_rotation(const HandState& state, double angle) {
  if (std::fabs(angle) > kPi + 1e-12)
    throw std::invalid_argument("apply_wrist_rotation: angle outside [-pi, pi]");
  HandState out = state;
  out.wrist_roll = wrap_angle(state.wrist_roll + angle);
  return out;
}

bool side_grasp_guard(const HandState& state, double tolerance_deg) {
  const Vec3 n = state.palm_normal;
  const double norm = std::sqrt(n.x * n.x + n.y * n.y + n.z * n.z);
  if (norm == 0.0) return false;
  const double angle_to_plane = std::asin(std::min(1.0, std::fabs(n.z) / norm));
  return angle_to_plane <= tolerance_deg * kPi / 180.0 + 1e-12;
}

namespace {

double max_penetration(const HandModel& hand, const WorldState& world) {
  double depth = 0.0;
  for (int cell = 0; cell < hand.n_cells(); ++cell) {
    const Vec3 p_w = ee_to_world(world.hand, cell_position_ee(hand, world.hand.joint_angles, cell));
    for (const auto& obj : world.objects) {
      depth = std::max(depth, obj.vertical_penetration(p_w));
    }
  }
  return depth;
}

}  // namespace

WorldState collision_recovery(const HandModel& hand, WorldState world, RecoveryPhase phase,
                              double tolerance, double step_m, int max_iters) {
  if (phase != RecoveryPhase::Reopen) return world;

  int iters = 0;
  while (max_penetration(hand, world) > tolerance) {
    if (++iters > max_iters)
      throw CollisionRecoveryError("collision_recovery: iteration bound exceeded");
    world.hand.palm_position.z += step_m;
  }
  return world;
}

}  // namespace mat::regrasp
