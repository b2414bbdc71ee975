#include "mat/world.hpp"

namespace mat::sim {

TactileFrame compute_contacts(const HandModel& hand, const WorldState& world,
                              double contact_tolerance, ContactSnapshot* snapshot) {
  const int n_cells = hand.n_cells();
  TactileFrame frame;
  frame.binary.assign(n_cells, 0);
  frame.positions_ee.assign(n_cells, Vec3{});
  frame.joint_angles = world.hand.joint_angles;
  if (snapshot) snapshot->active.clear();

  for (int cell = 0; cell < n_cells; ++cell) {
    const Vec3 p_ee = cell_position_ee(hand, world.hand.joint_angles, cell);
    const Vec3 p_w = ee_to_world(world.hand, p_ee);
    for (std::size_t k = 0; k < world.objects.size(); ++k) {
      if (world.objects[k].contains(p_w, contact_tolerance)) {
        frame.binary[cell] = 1;
        frame.positions_ee[cell] = p_ee;
        if (snapshot)
          snapshot->active.push_back({cell, cell_link(hand, cell), static_cast<int>(k), p_w});
        break;
      }
    }
  }
  return frame;
}

}  // namespace mat::sim
