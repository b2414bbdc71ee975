#include "mat/scene.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mat::sim {

SceneObject sample_object(Rng& rng, const ObjectPool& pool, int id) {
  SceneObject o;
  o.id = id;
  o.height = rng.uniform(pool.height_lo, pool.height_hi);
  if (rng.uniform() < pool.disc_probability) {
    o.shape = ShapeKind::Disc;
    o.radius = rng.uniform(pool.disc_radius_lo, pool.disc_radius_hi);
  } else {
    o.shape = ShapeKind::Box;
    o.half_x = rng.uniform(pool.box_half_lo, pool.box_half_hi);
    o.half_y = rng.uniform(pool.box_half_lo, pool.box_half_hi);
  }
  return o;
}

namespace {

Vec3 random_point_in_disc(Rng& rng, double radius) {
  // Rejection from the bounding square keeps the distribution uniform.
  for (;;) {
    const double x = rng.uniform(-radius, radius);
    const double y = rng.uniform(-radius, radius);
    if (x * x + y * y <= radius * radius) return {x, y, 0.0};
  }
}

bool place_all(Rng& rng, std::vector<SceneObject>& objects, double workspace_radius) {
  constexpr int kAttemptsPerObject = 200;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    bool placed = false;
    for (int a = 0; a < kAttemptsPerObject && !placed; ++a) {
      const double reach = std::max(0.0, workspace_radius - objects[i].circumradius());
      Vec3 pos = random_point_in_disc(rng, reach);
      placed = true;
      for (std::size_t j = 0; j < i; ++j) {
        const double min_gap = objects[i].circumradius() + objects[j].circumradius();
        if (planar_dist(pos, objects[j].position) < min_gap) {
          placed = false;
          break;
        }
      }
      if (placed) objects[i].position = pos;
    }
    if (!placed) return false;
  }
  return true;
}

}  // namespace

Scene sample_scene(Rng& rng, SceneMode mode, const ObjectPool& pool,
                   double workspace_radius, int clutter_lo, int clutter_hi) {
  if (clutter_lo < 1 || clutter_hi < clutter_lo)
    throw std::invalid_argument("sample_scene: bad clutter range");

  constexpr int kSceneAttempts = 20;
  for (int round = 0; round < kSceneAttempts; ++round) {
    Scene scene;
    scene.workspace_radius = workspace_radius;
    const int n = mode == SceneMode::Single ? 1 : rng.uniform_int(clutter_lo, clutter_hi);
    scene.objects.reserve(n);
    for (int i = 0; i < n; ++i) scene.objects.push_back(sample_object(rng, pool, i));
    if (place_all(rng, scene.objects, workspace_radius)) return scene;
  }
  throw ScenePlacementError("sample_scene: could not place objects after bounded retries");
}

namespace {

nlohmann::json object_to_json(const SceneObject& o) {
  nlohmann::json j;
  j["shape"] = o.shape == ShapeKind::Disc ? "disc" : "box";
  if (o.shape == ShapeKind::Disc)
    j["dims_m"] = {o.radius, o.height};
  else
    j["dims_m"] = {o.half_x, o.half_y, o.height};
  j["pos_m"] = {o.position.x, o.position.y, o.position.z};
  return j;
}

SceneObject object_from_json(const nlohmann::json& j, int id) {
  SceneObject o;
  o.id = id;
  const std::string shape = j.at("shape").get<std::string>();
  const auto dims = j.at("dims_m").get<std::vector<double>>();
  if (shape == "disc") {
    o.shape = ShapeKind::Disc;
    if (dims.size() != 2) throw std::invalid_argument("disc dims_m must be [radius, height]");
    o.radius = dims[0];
    o.height = dims[1];
  } else if (shape == "box") {
    o.shape = ShapeKind::Box;
    if (dims.size() != 3) throw std::invalid_argument("box dims_m must be [hx, hy, height]");
    o.half_x = dims[0];
    o.half_y = dims[1];
    o.height = dims[2];
  } else {
    throw std::invalid_argument("unknown shape: " + shape);
  }
  const auto pos = j.at("pos_m").get<std::vector<double>>();
  if (pos.size() != 3) throw std::invalid_argument("pos_m must have 3 entries");
  o.position = {pos[0], pos[1], pos[2]};
  if (o.radius < 0 || o.half_x < 0 || o.half_y < 0 || o.height < 0)
    throw std::invalid_argument("object dimensions must be non-negative");
  return o;
}

nlohmann::json scene_to_json_obj(const Scene& s) {
  nlohmann::json j;
  j["workspace_radius_m"] = s.workspace_radius;
  j["objects"] = nlohmann::json::array();
  for (const auto& o : s.objects) j["objects"].push_back(object_to_json(o));
  if (!s.label.empty()) j["label"] = s.label;
  return j;
}

Scene scene_from_json_obj(const nlohmann::json& j) {
  Scene s;
  s.workspace_radius = j.at("workspace_radius_m").get<double>();
  int id = 0;
  for (const auto& jo : j.at("objects")) s.objects.push_back(object_from_json(jo, id++));
  if (j.contains("label")) s.label = j.at("label").get<std::string>();
  return s;
}

}  // namespace

std::string scene_to_json(const Scene& scene) { return scene_to_json_obj(scene).dump(2); }

Scene scene_from_json(const std::string& text) {
  return scene_from_json_obj(nlohmann::json::parse(text));
}

std::vector<Scene> scenes_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  std::vector<Scene> scenes;
  if (j.is_array()) {
    for (const auto& js : j) scenes.push_back(scene_from_json_obj(js));
  } else {
    scenes.push_back(scene_from_json_obj(j));
  }
  return scenes;
}

void scenes_to_json_file(const std::vector<Scene>& scenes, const std::string& path) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : scenes) j.push_back(scene_to_json_obj(s));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace mat::sim
