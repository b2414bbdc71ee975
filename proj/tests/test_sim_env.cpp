#include <doctest.h>

#include <cmath>
#include <set>

#include "mat/sim_env.hpp"

using namespace mat;
using namespace mat::sim;

namespace {

Scene one_disc(double radius, double height, Vec3 pos = {}) {
  Scene scene;
  SceneObject o;
  o.shape = ShapeKind::Disc;
  o.radius = radius;
  o.height = height;
  o.position = pos;
  scene.objects.push_back(o);
  return scene;
}

ResolvedAction close_all(int n = 3) {
  ResolvedAction a;
  a.kind = ActionKind::Fingers;
  a.finger_flags.assign(n, 1);
  return a;
}

}  // namespace

TEST_CASE("sample_scene: single mode yields one object inside the workspace") {
  Rng rng(7);
  ObjectPool pool;
  const Scene scene = sample_scene(rng, SceneMode::Single, pool);
  REQUIRE(scene.objects.size() == 1);
  CHECK(planar_dist(scene.objects[0].position, Vec3{}) <= scene.workspace_radius);
}

TEST_CASE("sample_scene: cluttered count within [2,30] and no interpenetration") {
  ObjectPool pool;
  for (int seed : {7, 8, 9, 10}) {
    Rng rng(seed);
    const Scene scene = sample_scene(rng, SceneMode::Cluttered, pool);
    CHECK(scene.objects.size() >= 2);
    CHECK(scene.objects.size() <= 30);
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      for (std::size_t j = i + 1; j < scene.objects.size(); ++j) {
        const double gap = planar_dist(scene.objects[i].position, scene.objects[j].position);
        CHECK(gap >= scene.objects[i].circumradius() + scene.objects[j].circumradius() - 1e-12);
      }
    }
  }
}

TEST_CASE("sample_scene: same seed twice gives identical scenes") {
  ObjectPool pool;
  Rng a(7), b(7);
  const Scene s1 = sample_scene(a, SceneMode::Cluttered, pool);
  const Scene s2 = sample_scene(b, SceneMode::Cluttered, pool);
  REQUIRE(s1.objects.size() == s2.objects.size());
  for (std::size_t i = 0; i < s1.objects.size(); ++i) {
    CHECK(s1.objects[i].position == s2.objects[i].position);
    CHECK(s1.objects[i].radius == s2.objects[i].radius);
    CHECK(s1.objects[i].height == s2.objects[i].height);
  }
}

TEST_CASE("reset: zero noise places the hand exactly at the pose") {
  EnvConfig cfg;
  GraspEnv env(cfg);
  const Scene scene = one_disc(0.04, 0.04);
  const InitialPose pose = initial_pose_for(cfg, scene, 0);
  Rng rng(3);
  env.reset(scene, pose, 0.0, rng);
  CHECK(env.world().hand.palm_position == pose.position);
  CHECK(env.world().t == 0);
  // joints start at the pre-grasp angles
  for (int i = 0; i < cfg.hand.n_fingers; ++i)
    CHECK(env.world().hand.joint_angles[i] == cfg.pre_grasp_rad);
}

TEST_CASE("reset: 5 cm noise displaces by exactly 0.05 m, direction uniform") {
  EnvConfig cfg;
  GraspEnv env(cfg);
  const Scene scene = one_disc(0.04, 0.04);
  const InitialPose pose = initial_pose_for(cfg, scene, 0);

  // Chi-square over 8 direction bins, 1000 samples. 7 dof, alpha=0.001
  // critical value 24.32.
  std::vector<int> bins(8, 0);
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    env.reset(scene, pose, 5.0, rng);
    const Vec3 d = env.world().hand.palm_position - pose.position;
    CHECK(std::hypot(d.x, d.y) == doctest::Approx(0.05).epsilon(1e-12));
    const double ang = std::atan2(d.y, d.x);
    int bin = static_cast<int>((ang + kPi) / (2.0 * kPi) * 8.0);
    bins[std::clamp(bin, 0, 7)] += 1;
  }
  double chi2 = 0.0;
  for (int b : bins) chi2 += (b - 125.0) * (b - 125.0) / 125.0;
  CHECK(chi2 < 24.32);

  // Two seeds: same magnitude, generally different directions.
  Rng r1(1), r2(2);
  env.reset(scene, pose, 5.0, r1);
  const Vec3 d1 = env.world().hand.palm_position - pose.position;
  env.reset(scene, pose, 5.0, r2);
  const Vec3 d2 = env.world().hand.palm_position - pose.position;
  CHECK(std::hypot(d1.x, d1.y) == doctest::Approx(std::hypot(d2.x, d2.y)));
  CHECK((std::fabs(d1.x - d2.x) > 1e-9 || std::fabs(d1.y - d2.y) > 1e-9));
}

TEST_CASE("reset: pose outside the workspace is rejected") {
  EnvConfig cfg;
  GraspEnv env(cfg);
  const Scene scene = one_disc(0.04, 0.04);
  InitialPose pose;
  pose.position = {cfg.workspace_radius + 0.01, 0.0, 0.06};
  Rng rng(1);
  CHECK_THROWS_AS(env.reset(scene, pose, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(env.reset(scene, initial_pose_for(cfg, scene, 0), -1.0, rng),
                  std::invalid_argument);
}

TEST_CASE("compute_contacts: open hand far from the object sees nothing") {
  EnvConfig cfg;
  GraspEnv env(cfg);
  Scene scene = one_disc(0.03, 0.03, {0.25, 0.0, 0.0});  // near workspace edge
  InitialPose pose;
  pose.position = {0.0, 0.0, 0.08};
  Rng rng(1);
  const TactileFrame frame = env.reset(scene, pose, 0.0, rng);
  for (int c = 0; c < cfg.hand.n_cells(); ++c) {
    CHECK(frame.binary[c] == 0);
    CHECK(frame.positions_ee[c] == Vec3{});
  }
}

TEST_CASE("compute_contacts: closing onto a centered disc activates finger cells") {
  EnvConfig cfg;
  GraspEnv env(cfg);
  const Scene scene = one_disc(0.04, 0.04);
  Rng rng(1);
  env.reset(scene, initial_pose_for(cfg, scene, 0), 0.0, rng);

  // Independent oracle: the fingertip's radial distance shrinks linearly
  // from base+length to the configured minimum.
  const auto& hand = cfg.hand;
  for (double q : {0.0, 1.0, 2.0, hand.joint_max}) {
    std::vector<double> joints(hand.n_joints(), 0.0);
    joints[0] = q;
    const Vec3 tip = cell_position_ee(hand, joints, hand.cells_per_link - 1);
    const double u_tip = (hand.cells_per_link - 0.5) / hand.cells_per_link;
    const double r_open = hand.finger_base_radius + u_tip * hand.finger_length;
    const double r_closed =
        hand.finger_base_radius +
        u_tip * hand.finger_length *
            (1.0 - (hand.finger_base_radius + hand.finger_length - hand.finger_min_radius) /
                       hand.finger_length);
    const double expected = r_open + (r_closed - r_open) * (q / hand.joint_max);
    CHECK(std::hypot(tip.x, tip.y) == doctest::Approx(expected).epsilon(1e-9));
  }

  // Deep close: every finger must have at least one active cell, and every
  // active cell's world position must lie within the inflated volume.
  auto& w = env.mutable_world();
  for (int i = 0; i < hand.n_fingers; ++i) w.hand.joint_angles[i] = hand.joint_max;
  const TactileFrame frame = compute_contacts(hand, w, cfg.contact_tolerance);
  for (int f = 0; f < hand.n_fingers; ++f) {
    bool any = false;
    for (int c = f * hand.cells_per_link; c < (f + 1) * hand.cells_per_link; ++c)
      any = any || frame.binary[c];
    CHECK(any);
  }
  for (int c = 0; c < hand.n_cells(); ++c) {
    if (!frame.binary[c]) {
      CHECK(frame.positions_ee[c] == Vec3{});
      continue;
    }
    const Vec3 p_w = ee_to_world(w.hand, frame.positions_ee[c]);
    CHECK(scene.objects[0].contains(p_w, cfg.contact_tolerance));
  }
}

TEST_CASE("apply_action: all-zero finger flags only advance time") {
  EnvConfig cfg;
  GraspEnv env(cfg);
  const Scene scene = one_disc(0.04, 0.04);
  Rng rng(1);
  env.reset(scene, initial_pose_for(cfg, scene, 0), 0.0, rng);
  const auto joints_before = env.world().hand.joint_angles;

  ResolvedAction a;
  a.kind = ActionKind::Fingers;
  a.finger_flags.assign(3, 0);
  const StepOutcome out = env.apply_action(a, 0.4);
  CHECK(env.world().t == 1);
  CHECK(out.reward == 0.0);
  CHECK(!out.done);
  CHECK(env.world().hand.joint_angles == joints_before);
}

TEST_CASE("apply_action: joint clamping holds under any action sequence") {
  EnvConfig cfg;
  GraspEnv env(cfg);
  const Scene scene = one_disc(0.04, 0.04);
  Rng rng(10);
  env.reset(scene, initial_pose_for(cfg, scene, 0), 0.0, rng);
  for (int t = 0; t < 40; ++t) {
    ResolvedAction a = close_all();
    for (auto& f : a.finger_flags) f = rng.uniform() < 0.7;
    env.apply_action(a, 0.4);
    for (int j = 0; j < cfg.hand.n_joints(); ++j) {
      CHECK(env.world().hand.joint_angles[j] >= cfg.hand.joint_min);
      CHECK(env.world().hand.joint_angles[j] <= cfg.hand.joint_max);
    }
  }
}

TEST_CASE("apply_action: lift on an antipodal grasp succeeds and terminates") {
  EnvConfig cfg;
  GraspEnv env(cfg);
  const Scene scene = one_disc(0.04, 0.04);
  Rng rng(1);
  env.reset(scene, initial_pose_for(cfg, scene, 0), 0.0, rng);
  // Close two opposing-enough fingers (azimuths 120 degrees apart) onto the disc.
  while (env.world().hand.joint_angles[0] < cfg.hand.joint_max - 1e-9) {
    ResolvedAction a;
    a.kind = ActionKind::Fingers;
    a.finger_flags = {1, 1, 0};
    env.apply_action(a, 0.4);
  }
  REQUIRE(evaluate_lift(cfg, env.world()));

  ResolvedAction lift;
  lift.kind = ActionKind::Lift;
  const double z_before = env.world().hand.palm_position.z;
  const StepOutcome out = env.apply_action(lift, 0.4);
  CHECK(out.done);
  CHECK(out.lift_success);
  CHECK(out.reward == 1.0);
  CHECK(env.world().hand.palm_position.z == doctest::Approx(z_before + cfg.lift_height));
  CHECK(env.world().grasped_object.has_value());
  CHECK_THROWS_AS(env.apply_action(lift, 0.4), std::logic_error);
}

TEST_CASE("evaluate_lift: bearing separation rule") {
  EnvConfig cfg;
  cfg.hand.n_fingers = 2;
  cfg.hand.finger_azimuths = {0.0, kPi};  // antipodal pair
  GraspEnv env(cfg);
  const Scene scene = one_disc(0.04, 0.04);
  Rng rng(1);
  env.reset(scene, initial_pose_for(cfg, scene, 0), 0.0, rng);

  SUBCASE("no contacts at lift means failure") { CHECK(!evaluate_lift(cfg, env.world())); }

  SUBCASE("bearings 0 and 180 degrees succeed") {
    auto& w = env.mutable_world();
    for (int i = 0; i < 2; ++i) w.hand.joint_angles[i] = cfg.hand.joint_max;
    CHECK(evaluate_lift(cfg, env.world()));
  }

  SUBCASE("bearings 0 and 30 degrees fail") {
    EnvConfig narrow = cfg;
    narrow.hand.finger_azimuths = {0.0, kPi / 6.0};
    GraspEnv env2(narrow);
    Rng rng2(1);
    env2.reset(scene, initial_pose_for(narrow, scene, 0), 0.0, rng2);
    auto& w2 = env2.mutable_world();
    for (int i = 0; i < 2; ++i) w2.hand.joint_angles[i] = narrow.hand.joint_max;
    const TactileFrame f = compute_contacts(narrow.hand, w2, narrow.contact_tolerance);
    int active_fingers = 0;
    for (int fi = 0; fi < 2; ++fi) {
      bool any = false;
      for (int c = fi * 24; c < (fi + 1) * 24; ++c) any = any || f.binary[c];
      active_fingers += any;
    }
    REQUIRE(active_fingers == 2);  // both touch, but bearings are too close
    CHECK(!evaluate_lift(narrow, env2.world()));
  }
}

TEST_CASE("step_reward: reopen penalty gate and terminal payout") {
  EnvConfig cfg;
  ResolvedAction reopen;
  reopen.kind = ActionKind::Reopen;

  std::vector<double> joints(cfg.hand.n_joints(), 0.1);
  CHECK(step_reward(cfg, joints, reopen, false) == -0.05);

  joints[1] = 0.3;  // one grip joint past 0.2 rad
  CHECK(step_reward(cfg, joints, reopen, false) == 0.0);

  ResolvedAction fingers;
  fingers.kind = ActionKind::Fingers;
  fingers.finger_flags = {1, 1, 1};
  CHECK(step_reward(cfg, joints, fingers, false) == 0.0);

  ResolvedAction lift;
  lift.kind = ActionKind::Lift;
  CHECK(step_reward(cfg, joints, lift, true) == 1.0);
  CHECK(step_reward(cfg, joints, lift, false) == 0.0);
  ResolvedAction horizon;
  horizon.kind = ActionKind::HorizonLift;
  CHECK(step_reward(cfg, joints, horizon, true) == 1.0);
}

TEST_CASE("forced_reopen_check: stall rule over the last five step pairs") {
  obs::ObsDims dims;
  dims.history = 20;
  dims.cells = 4;
  dims.joints = 3;
  obs::ObservationWindow window(dims, 0.05);

  auto push_to = [&](obs::ObservationWindow& w, std::vector<double> q) {
    TactileFrame f;
    f.binary.assign(dims.cells, 0);
    f.positions_ee.assign(dims.cells, Vec3{});
    f.joint_angles = std::move(q);
    w.push(f);
  };
  auto push_joints = [&](std::vector<double> q) { push_to(window, std::move(q)); };

  // t = 2: insufficient history.
  push_joints({0.0, 0.0, 0.0});
  push_joints({0.0, 0.0, 0.0});
  push_joints({0.0, 0.0, 0.0});
  CHECK(!forced_reopen_check(window, 0.05, 5));

  // Six static frames: stall detected.
  push_joints({0.0, 0.0, 0.0});
  push_joints({0.0, 0.0, 0.0});
  push_joints({0.0, 0.0, 0.0});
  CHECK(forced_reopen_check(window, 0.05, 5));

  // A joint moving 0.06 rad two steps ago breaks the stall.
  push_joints({0.06, 0.0, 0.0});
  push_joints({0.06, 0.0, 0.0});
  CHECK(!forced_reopen_check(window, 0.05, 5));

  // Motion of exactly the threshold does not count as movement.
  obs::ObservationWindow w2(dims, 0.05);
  for (int i = 0; i < 5; ++i) push_to(w2, {0.0, 0.0, 0.0});
  push_to(w2, {0.05, 0.0, 0.0});
  CHECK(forced_reopen_check(w2, 0.05, 5));
}

TEST_CASE("episode determinism: identical inputs give identical step outcomes") {
  EnvConfig cfg;
  ObjectPool pool;
  auto run = [&]() {
    Rng rng(123);
    Scene scene = sample_scene(rng, SceneMode::Single, pool);
    GraspEnv env(cfg);
    env.reset(scene, jittered_initial_pose(cfg, scene, 0, 0.0, rng), 2.5, rng);
    std::vector<double> rewards;
    std::vector<TactileFrame> frames;
    for (int t = 0; t < 12; ++t) {
      ResolvedAction a = close_all();
      if (t == 11) a.kind = ActionKind::HorizonLift;
      const StepOutcome out = env.apply_action(a, 0.3);
      rewards.push_back(out.reward);
      frames.push_back(out.frame);
      if (out.done) break;
    }
    return std::pair{rewards, frames};
  };
  const auto [r1, f1] = run();
  const auto [r2, f2] = run();
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i] == r2[i]);
    CHECK(f1[i].binary == f2[i].binary);
    for (std::size_t c = 0; c < f1[i].positions_ee.size(); ++c)
      CHECK(f1[i].positions_ee[c] == f2[i].positions_ee[c]);
    CHECK(f1[i].joint_angles == f2[i].joint_angles);
  }
}

TEST_CASE("reward support: non-terminal rewards in {-0.05, 0}, terminal in {0, 1}") {
  EnvConfig cfg;
  ObjectPool pool;
  Rng rng(55);
  for (int ep = 0; ep < 20; ++ep) {
    Scene scene = sample_scene(rng, SceneMode::Single, pool);
    GraspEnv env(cfg);
    env.reset(scene, jittered_initial_pose(cfg, scene, 0, 0.0, rng), 2.0, rng);
    for (int t = 0; t < 30; ++t) {
      ResolvedAction a;
      const double u = rng.uniform();
      if (t == 29 || u < 0.1) {
        a.kind = t == 29 ? ActionKind::HorizonLift : ActionKind::Lift;
      } else if (u < 0.3) {
        a.kind = ActionKind::Reopen;
        a.wrist_rotation = rng.uniform(-kPi, kPi);
      } else {
        a = close_all();
        for (auto& f : a.finger_flags) f = rng.uniform() < 0.7;
      }
      const StepOutcome out = env.apply_action(a, 0.2);
      if (out.done) {
        CHECK((out.reward == 0.0 || out.reward == 1.0));
        break;
      }
      CHECK((out.reward == 0.0 || out.reward == -0.05));
    }
  }
}

TEST_CASE("scene JSON round trip") {
  ObjectPool pool;
  pool.disc_probability = 0.5;
  Rng rng(77);
  Scene scene = sample_scene(rng, SceneMode::Cluttered, pool, 0.3, 2, 6);
  scene.label = "seen";
  const std::string text = scene_to_json(scene);
  const Scene back = scene_from_json(text);
  REQUIRE(back.objects.size() == scene.objects.size());
  CHECK(back.workspace_radius == scene.workspace_radius);
  CHECK(back.label == scene.label);
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    CHECK(back.objects[i].shape == scene.objects[i].shape);
    CHECK(back.objects[i].position == scene.objects[i].position);
    CHECK(back.objects[i].height == scene.objects[i].height);
  }
}

TEST_CASE("initial pose generator: hover height and jitter bound") {
  EnvConfig cfg;
  const Scene scene = one_disc(0.035, 0.05, {0.05, -0.02, 0.0});
  const InitialPose pose = initial_pose_for(cfg, scene, 0);
  CHECK(pose.position.z == doctest::Approx(0.05 + cfg.hover_clearance));
  CHECK(pose.position.x == doctest::Approx(0.05));

  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const InitialPose j = jittered_initial_pose(cfg, scene, 0, 0.0, rng);
    CHECK(planar_dist(j.position, pose.position) <= cfg.planner_jitter_cm / 100.0 + 1e-12);
  }
}

TEST_CASE("sample_scene: impossible packing raises the placement error") {
  ObjectPool pool;
  pool.disc_probability = 1.0;
  pool.disc_radius_lo = pool.disc_radius_hi = 0.2;  // objects larger than the workspace
  Rng rng(3);
  CHECK_THROWS_AS(sample_scene(rng, SceneMode::Cluttered, pool, 0.25, 8, 8),
                  ScenePlacementError);
}

TEST_CASE("evaluate_lift: contacts at or above the top face do not count") {
  EnvConfig cfg;
  GraspEnv env(cfg);
  // A broad disc whose top face sits just below the palm plane: every cell
  // of the open hand lands inside the inflated top shell, above the face.
  Scene scene = one_disc(0.2, 0.0975);
  InitialPose pose;
  pose.position = {0.0, 0.0, 0.0975 + cfg.contact_tolerance / 2.0};
  Rng rng(1);
  const TactileFrame frame = env.reset(scene, pose, 0.0, rng);
  int active = 0;
  for (auto b : frame.binary) active += b;
  REQUIRE(active > 0);  // plenty of contact...
  CHECK(!evaluate_lift(cfg, env.world()));  // ...but nothing below the top face
}
