#include "mat/hand.hpp"

#include <algorithm>
#include <cmath>

namespace mat::sim {

HandState make_hand_state(const HandModel& hand) {
  HandState hs;
  hs.joint_angles.assign(hand.n_joints(), 0.0);
  hs.pre_grasp_joint_angles.assign(hand.n_joints(), 0.0);
  return hs;
}

Vec3 cell_position_ee(const HandModel& hand, const std::vector<double>& joints, int cell) {
  const int link = cell_link(hand, cell);
  const int k = cell % hand.cells_per_link;

  if (link == hand.palm_link()) {
    // Palm cells: an inner ring of 8 and an outer ring of 16 on the palm disc.
    if (k < 8) {
      const double a = 2.0 * kPi * k / 8.0;
      const double r = 0.45 * hand.palm_radius;
      return {r * std::cos(a), r * std::sin(a), 0.0};
    }
    const double a = 2.0 * kPi * (k - 8) / 16.0;
    const double r = 0.9 * hand.palm_radius;
    return {r * std::cos(a), r * std::sin(a), 0.0};
  }

  const double q = joints[link];
  const double close_frac = std::clamp(q / hand.joint_max, 0.0, 1.0);
  const double reach = hand.finger_base_radius + hand.finger_length - hand.finger_min_radius;
  const double cos_w = std::clamp(1.0 - close_frac * reach / hand.finger_length, -1.0, 1.0);
  const double sin_w = std::sqrt(std::max(0.0, 1.0 - cos_w * cos_w));

  const double u = (k + 0.5) / hand.cells_per_link;
  const double radial = hand.finger_base_radius + u * hand.finger_length * cos_w;
  const double drop = u * hand.finger_length * sin_w;
  const double az = hand.finger_azimuths[link];
  return {radial * std::cos(az), radial * std::sin(az), -drop};
}

Vec3 ee_to_world(const HandState& hs, const Vec3& p) {
  const double c = std::cos(hs.wrist_roll), s = std::sin(hs.wrist_roll);
  return {hs.palm_position.x + c * p.x - s * p.y,
          hs.palm_position.y + s * p.x + c * p.y,
          hs.palm_position.z + p.z};
}

Vec3 world_to_ee(const HandState& hs, const Vec3& p) {
  const double c = std::cos(hs.wrist_roll), s = std::sin(hs.wrist_roll);
  const Vec3 d = p - hs.palm_position;
  return {c * d.x + s * d.y, -s * d.x + c * d.y, d.z};
}

}  // namespace mat::sim
