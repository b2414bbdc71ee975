#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mat/hand.hpp"
#include "mat/scene.hpp"

namespace mat::sim {

// Per-step sensor packet: binary contact per cell, cell positions in the
// end-effector frame (zero vector where there is no contact), and the
// reported joint vector.
struct TactileFrame {
  std::vector<std::uint8_t> binary;
  std::vector<Vec3> positions_ee;
  std::vector<double> joint_angles;
};

// World-frame record of the active cells of one step, kept by the simulator
// for the regrasp geometry and the pick-up test.
struct ContactRecord {
  int cell = 0;
  int link = 0;
  int object = 0;
  Vec3 world_pos{};
};

struct ContactSnapshot {
  std::vector<ContactRecord> active;
};

struct WorldState {
  HandState hand;
  std::vector<SceneObject> objects;
  std::optional<int> grasped_object;
  int t = 0;
  bool done = false;
  std::uint64_t rng_seed = 0;  // seed recorded at reset
};

// Samples every tactile cell against the scene volumes inflated by
// `contact_tolerance`. When `snapshot` is given it receives the world-frame
// contact records of the frame.
TactileFrame compute_contacts(const HandModel& hand, const WorldState& world,
                              double contact_tolerance, ContactSnapshot* snapshot = nullptr);

}  // namespace mat::sim
