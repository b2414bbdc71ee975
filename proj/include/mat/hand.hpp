#pragma once

#include <stdexcept>
#include <vector>

#include "mat/geometry.hpp"

namespace mat::sim {

// Kinematic hand description. The default values model a three-fingered hand
// with 24 tactile cells on each finger and on the palm (96 cells total) and
// finger joints travelling from 0 rad (open) to 2.44 rad (closed).
//
// Fingers are radial segments hinged on the palm rim. Closing a joint sweeps
// the segment from pointing radially outward (open) to tucked under the palm
// (closed); the fingertip's radial distance from the palm axis shrinks
// linearly with the joint angle:
//   d(q) = r_open - (r_open - r_min) * q / joint_max,   r_open = base + length
struct HandModel {
  int n_fingers = 3;
  int cells_per_link = 24;
  double joint_min = 0.0;
  double joint_max = 2.44;
  double finger_base_radius = 0.05;   // hinge distance from palm axis [m]
  double finger_length = 0.06;        // sensed distal segment [m]
  double finger_min_radius = 0.02;    // fingertip radial distance when closed [m]
  double palm_radius = 0.04;
  std::vector<double> finger_azimuths = {0.0, 2.0 * kPi / 3.0, 4.0 * kPi / 3.0};

  int n_links_with_cells() const { return n_fingers + 1; }  // fingers + palm
  int n_cells() const { return n_links_with_cells() * cells_per_link; }
  // Reported joint vector: n finger flexion joints followed by fixed
  // spread/coupled joints, 8 entries for the 3-finger default.
  int n_joints() const { return n_fingers + 5; }
  int palm_link() const { return n_fingers; }

  void validate() const {
    if (static_cast<int>(finger_azimuths.size()) != n_fingers)
      throw std::invalid_argument("hand: one azimuth per finger required");
    if (finger_length <= 0.0 || finger_base_radius <= 0.0 || palm_radius <= 0.0)
      throw std::invalid_argument("hand: dimensions must be positive");
    if (joint_max <= joint_min)
      throw std::invalid_argument("hand: joint_max must exceed joint_min");
  }
};

// Pose and articulation of the hand. The end-effector frame is centred at
// the palm, rotated about the world z axis by wrist_roll, with the z axis
// parallel to world z; finger cells hang at negative z in this frame.
struct HandState {
  Vec3 palm_position{};
  double wrist_roll = 0.0;
  Vec3 palm_normal{0.0, 0.0, -1.0};  // approach direction, top-down by default
  std::vector<double> joint_angles;
  std::vector<double> pre_grasp_joint_angles;
  bool lifted = false;
};

HandState make_hand_state(const HandModel& hand);

// Position of a tactile cell in the end-effector frame. Cells 0..23 belong
// to finger 0 and so on; the last 24 cells tile the palm disc.
Vec3 cell_position_ee(const HandModel& hand, const std::vector<double>& joints, int cell);

Vec3 ee_to_world(const HandState& hs, const Vec3& p_ee);
Vec3 world_to_ee(const HandState& hs, const Vec3& p_world);

inline int cell_link(const HandModel& hand, int cell) { return cell / hand.cells_per_link; }

// Finger index for a cell, or -1 for palm cells.
inline int cell_finger(const HandModel& hand, int cell) {
  const int link = cell_link(hand, cell);
  return link < hand.n_fingers ? link : -1;
}

}  // namespace mat::sim
