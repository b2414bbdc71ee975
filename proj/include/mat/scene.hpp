#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "mat/geometry.hpp"
#include "mat/rng.hpp"

namespace mat::sim {

enum class ShapeKind { Disc, Box };

// A primitive resting on the table plane. Discs are vertical cylinders
// (radius, height), boxes are axis-aligned (half extents, height). position.z
// is the bottom face height: 0 while on the table, raised after a pick-up.
struct SceneObject {
  ShapeKind shape = ShapeKind::Disc;
  Vec3 position{};
  double radius = 0.0;   // disc
  double half_x = 0.0;   // box
  double half_y = 0.0;   // box
  double height = 0.0;
  int id = 0;

  double top() const { return position.z + height; }

  double circumradius() const {
    return shape == ShapeKind::Disc ? radius : std::hypot(half_x, half_y);
  }

  // Point containment against the volume inflated by `margin` on all faces.
  bool contains(const Vec3& p, double margin) const {
    if (p.z < position.z - margin || p.z > top() + margin) return false;
    if (shape == ShapeKind::Disc)
      return planar_dist(p, position) <= radius + margin;
    return std::fabs(p.x - position.x) <= half_x + margin &&
           std::fabs(p.y - position.y) <= half_y + margin;
  }

  // Vertical depth required to clear the top face, 0 when not penetrating.
  double vertical_penetration(const Vec3& p) const {
    if (!contains(p, 0.0) ) return 0.0;
    return top() - p.z;
  }
};

struct Scene {
  std::vector<SceneObject> objects;
  double workspace_radius = 0.30;
  std::string label;  // optional pool tag ("seen", "novel", ...)
};

// Parameter ranges for procedural objects. Seen/novel pools are disjoint
// ranges configured in the harness.
struct ObjectPool {
  double disc_probability = 1.0;
  double disc_radius_lo = 0.03, disc_radius_hi = 0.05;
  double box_half_lo = 0.02, box_half_hi = 0.04;
  double height_lo = 0.03, height_hi = 0.06;
};

enum class SceneMode { Single, Cluttered };

struct ScenePlacementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SceneObject sample_object(Rng& rng, const ObjectPool& pool, int id);

// Places objects without interpenetration inside the workspace disc. Single
// mode yields exactly one object; cluttered mode draws the object count
// uniformly from [clutter_lo, clutter_hi]. Throws ScenePlacementError when a
// bounded number of rejection rounds cannot fit the scene.
Scene sample_scene(Rng& rng, SceneMode mode, const ObjectPool& pool,
                   double workspace_radius = 0.30, int clutter_lo = 2, int clutter_hi = 30);

std::string scene_to_json(const Scene& scene);
Scene scene_from_json(const std::string& text);
std::vector<Scene> scenes_from_json_file(const std::string& path);
void scenes_to_json_file(const std::vector<Scene>& scenes, const std::string& path);

}  // namespace mat::sim
