#include <doctest.h>

#include "mat/baselines.hpp"
#include "mat/eval.hpp"
#include "mat/sim_env.hpp"

using namespace mat;
using namespace mat::baselines;

namespace {

sim::TactileFrame empty_frame(const sim::HandModel& hand) {
  sim::TactileFrame f;
  f.binary.assign(hand.n_cells(), 0);
  f.positions_ee.assign(hand.n_cells(), Vec3{});
  f.joint_angles.assign(hand.n_joints(), 0.0);
  return f;
}

}  // namespace

TEST_CASE("open_loop_policy: close-all phase then lift, never reopen") {
  OpenLoopConfig cfg;
  const ResolvedAction a0 = open_loop_policy(0, cfg, 3);
  CHECK(a0.kind == ActionKind::Fingers);
  CHECK(a0.finger_flags == std::vector<std::uint8_t>{1, 1, 1});

  for (int t = 0; t < cfg.t_close; ++t)
    CHECK(open_loop_policy(t, cfg, 3).kind == ActionKind::Fingers);
  CHECK(open_loop_policy(cfg.t_close, cfg, 3).kind == ActionKind::Lift);
  CHECK(open_loop_policy(cfg.t_close + 5, cfg, 3).kind == ActionKind::Lift);
  for (int t = 0; t < 30; ++t) CHECK(open_loop_policy(t, cfg, 3).kind != ActionKind::Reopen);
}

TEST_CASE("tactile_latch_policy: stop on contact, unison close, then lift") {
  sim::HandModel hand;
  LatchConfig cfg;
  LatchState state = make_latch_state(3);

  // No contacts: close everything.
  sim::TactileFrame f = empty_frame(hand);
  ResolvedAction a = tactile_latch_policy(f, state, hand, cfg);
  CHECK(a.kind == ActionKind::Fingers);
  CHECK(a.finger_flags == std::vector<std::uint8_t>{1, 1, 1});

  // Middle finger touches: it stops, the others keep closing.
  f.binary[hand.cells_per_link + 3] = 1;
  a = tactile_latch_policy(f, state, hand, cfg);
  CHECK(a.finger_flags == std::vector<std::uint8_t>{1, 0, 1});

  // All fingers in contact: unison close for k_unison steps, then lift.
  for (int finger = 0; finger < 3; ++finger) f.binary[finger * hand.cells_per_link] = 1;
  int unison_steps = 0;
  for (;;) {
    a = tactile_latch_policy(f, state, hand, cfg);
    if (a.kind == ActionKind::Lift) break;
    CHECK(a.finger_flags == std::vector<std::uint8_t>{1, 1, 1});
    unison_steps += 1;
    REQUIRE(unison_steps <= cfg.k_unison);
  }
  CHECK(unison_steps == cfg.k_unison);
}

TEST_CASE("tactile_latch_policy: latched flags are monotone") {
  sim::HandModel hand;
  LatchConfig cfg;
  LatchState state = make_latch_state(3);
  Rng rng(3);
  std::vector<std::uint8_t> seen(3, 0);
  for (int t = 0; t < 40; ++t) {
    sim::TactileFrame f = empty_frame(hand);
    for (int c = 0; c < hand.n_cells(); ++c) f.binary[c] = rng.uniform() < 0.02;
    for (int j = 0; j < hand.n_joints(); ++j) f.joint_angles[j] = rng.uniform(0.0, 2.44);
    tactile_latch_policy(f, state, hand, cfg);
    for (int i = 0; i < 3; ++i) {
      CHECK(state.latched[i] >= seen[i]);  // never un-latches
      seen[i] = state.latched[i];
    }
  }
}

TEST_CASE("tactile_latch_policy: a stalled commanded finger latches") {
  sim::HandModel hand;
  LatchConfig cfg;
  LatchState state = make_latch_state(3);
  sim::TactileFrame f = empty_frame(hand);
  f.joint_angles.assign(hand.n_joints(), 2.44);  // clamped, never moves again

  for (int t = 0; t <= cfg.stall_latch_steps; ++t) tactile_latch_policy(f, state, hand, cfg);
  CHECK(state.latched == std::vector<std::uint8_t>{1, 1, 1});
}

TEST_CASE("ablation masks suppress exactly their target channel") {
  CHECK_THROWS_AS(ablation_from_string("bogus"), std::invalid_argument);
  CHECK(ablation_from_string("finger_closing_only") == AblationMode::FingerClosingOnly);
  CHECK(ablation_from_string("") == AblationMode::None);

  ActionSample s;
  s.finger_flags = {0, 1, 0};
  s.reopen = 1;
  s.lift = 0;
  s.wrist_rotation = 0.7;

  const ActionSample fc = apply_ablation(s, AblationMode::FingerClosingOnly);
  CHECK(fc.reopen == 0);
  CHECK(fc.finger_flags == s.finger_flags);

  const ActionSample rg = apply_ablation(s, AblationMode::RegraspingOnly);
  CHECK(rg.finger_flags == std::vector<std::uint8_t>{1, 1, 1});
  CHECK(rg.reopen == 1);

  const ActionSample po = apply_ablation(s, AblationMode::PositionOnly);
  CHECK(po.wrist_rotation == 0.0);
  CHECK(po.reopen == 1);

  const ActionSample oo = apply_ablation(s, AblationMode::OrientationOnly);
  CHECK(oo.wrist_rotation == s.wrist_rotation);
}

TEST_CASE("rollout-level ablations: no reopen / frozen roll / frozen palm") {
  sim::EnvConfig env_cfg;
  harness::EvalOptions options;
  options.trials = 1;
  options.horizon = 30;
  options.mat_delta_finger = 0.2;
  options.seed = 5;

  const obs::ObsDims dims{.history = 20,
                          .cells = env_cfg.hand.n_cells(),
                          .joints = env_cfg.hand.n_joints()};
  Rng rng(9);
  policy::Net pol = policy::Net::make_policy(dims, 3, 6);
  pol.init(rng);
  sim::ObjectPool pool;
  Rng scene_rng(31);
  const sim::Scene scene = sim::sample_scene(scene_rng, sim::SceneMode::Single, pool);

  SUBCASE("finger_closing_only never reopens") {
    options.ablation = AblationMode::FingerClosingOnly;
    for (int trial = 0; trial < 5; ++trial) {
      Rng episode_rng(100 + trial);
      const auto r = harness::run_episode(env_cfg, scene, &pol, harness::PolicyKind::Mat,
                                          options, episode_rng);
      CHECK(!r.reopened);
    }
  }

  SUBCASE("position_only keeps the wrist roll constant across reopens") {
    sim::GraspEnv env(env_cfg);
    Rng rng2(7);
    env.reset(scene, sim::initial_pose_for(env_cfg, scene, 0), 0.0, rng2);

    ActionSample s;
    s.finger_flags = {1, 1, 1};
    s.reopen = 1;
    s.wrist_rotation = 1.1;
    const ActionSample masked = apply_ablation(s, AblationMode::PositionOnly);
    const double roll_before = env.world().hand.wrist_roll;
    env.apply_action(resolve_action(masked, false, false), 0.2);
    CHECK(env.world().hand.wrist_roll == roll_before);
  }

  SUBCASE("orientation_only keeps the palm position constant across reopens") {
    sim::EnvConfig no_pos = env_cfg;
    no_pos.enable_position_adjust = false;
    sim::GraspEnv env(no_pos);
    Rng rng2(7);
    env.reset(scene, sim::initial_pose_for(no_pos, scene, 0), 0.0, rng2);

    // Make contact first so a position adjustment would have a target.
    ResolvedAction close;
    close.kind = ActionKind::Fingers;
    close.finger_flags = {1, 1, 1};
    for (int i = 0; i < 6; ++i) env.apply_action(close, 0.4);

    ActionSample s;
    s.reopen = 1;
    s.wrist_rotation = 0.9;
    const Vec3 palm_before = env.world().hand.palm_position;
    env.apply_action(resolve_action(s, false, false), 0.2);
    CHECK(env.world().hand.palm_position.x == palm_before.x);
    CHECK(env.world().hand.palm_position.y == palm_before.y);
    CHECK(env.world().hand.wrist_roll != 0.0);  // rotation still applied
  }
}
