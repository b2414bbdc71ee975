#include "mat/sim_env.hpp"

#include <algorithm>
#include <cmath>

namespace mat::sim {

InitialPose initial_pose_for(const EnvConfig& cfg, const Scene& scene, int target, double roll) {
  const auto& obj = scene.objects.at(target);
  InitialPose pose;
  pose.position = {obj.position.x, obj.position.y, obj.top() + cfg.hover_clearance};
  pose.roll = roll;
  return pose;
}

InitialPose jittered_initial_pose(const EnvConfig& cfg, const Scene& scene, int target,
                                  double roll, Rng& rng) {
  InitialPose pose = initial_pose_for(cfg, scene, target, roll);
  // Area-uniform offset over the jitter disc.
  const double mag = (cfg.planner_jitter_cm / 100.0) * std::sqrt(rng.uniform());
  const double dir = rng.uniform(0.0, 2.0 * kPi);
  pose.position.x += mag * std::cos(dir);
  pose.position.y += mag * std::sin(dir);
  // The planner never commands a pose outside the reachable workspace.
  const double dist = std::hypot(pose.position.x, pose.position.y);
  const double limit = cfg.workspace_radius - 1e-9;
  if (dist > limit) {
    const double scale = limit / dist;
    pose.position.x *= scale;
    pose.position.y *= scale;
  }
  return pose;
}

std::optional<int> find_liftable_object(const EnvConfig& cfg, const WorldState& world) {
  const HandModel& hand = cfg.hand;
  const double min_sep = cfg.grasp_angle_min_deg * kPi / 180.0;

  for (std::size_t k = 0; k < world.objects.size(); ++k) {
    const auto& obj = world.objects[k];
    // Bearings of below-top contacts, grouped per finger.
    std::vector<std::vector<double>> bearings(hand.n_fingers);
    for (int cell = 0; cell < hand.n_cells(); ++cell) {
      const int finger = cell_finger(hand, cell);
      if (finger < 0) continue;
      const Vec3 p_w = ee_to_world(world.hand, cell_position_ee(hand, world.hand.joint_angles, cell));
      if (!obj.contains(p_w, cfg.contact_tolerance)) continue;
      if (p_w.z >= obj.top()) continue;
      bearings[finger].push_back(std::atan2(p_w.y - obj.position.y, p_w.x - obj.position.x));
    }
    for (int f = 0; f < hand.n_fingers; ++f) {
      for (int g = f + 1; g < hand.n_fingers; ++g) {
        for (double a : bearings[f])
          for (double b : bearings[g])
            if (bearing_separation(a, b) >= min_sep) return static_cast<int>(k);
      }
    }
  }
  return std::nullopt;
}

bool evaluate_lift(const EnvConfig& cfg, const WorldState& world) {
  return find_liftable_object(cfg, world).has_value();
}

double step_reward(const EnvConfig& cfg, const std::vector<double>& joints_before,
                   const ResolvedAction& action, bool lift_success) {
  if (is_terminal(action.kind)) return lift_success ? 1.0 : 0.0;
  if (action.kind != ActionKind::Reopen) return 0.0;

  double max_grip = 0.0;
  for (int i = 0; i < cfg.hand.n_fingers; ++i) max_grip = std::max(max_grip, joints_before[i]);
  const bool closed_enough = max_grip > cfg.grip_gate_rad;
  return closed_enough ? 0.0 : -cfg.reopen_penalty;
}

bool forced_reopen_check(const obs::ObservationWindow& window, double threshold,
                         int window_steps) {
  if (window.real_rows() < window_steps + 1) return false;
  const int h = window.dims().history;
  for (int k = h - window_steps - 1; k + 1 < h; ++k) {
    for (int j = 0; j < window.dims().joints; ++j) {
      if (std::fabs(window.joint(k + 1, j) - window.joint(k, j)) > threshold) return false;
    }
  }
  return true;
}

namespace {

HandState initial_hand_state(const EnvConfig& cfg) {
  HandState hs = make_hand_state(cfg.hand);
  for (int i = 0; i < cfg.hand.n_fingers; ++i) hs.pre_grasp_joint_angles[i] = cfg.pre_grasp_rad;
  hs.joint_angles = hs.pre_grasp_joint_angles;
  return hs;
}

}  // namespace

GraspEnv::GraspEnv(EnvConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.hand.validate();
  world_.hand = initial_hand_state(cfg_);
}

TactileFrame GraspEnv::reset(const Scene& scene, const InitialPose& pose, double noise_cm,
                             Rng& rng) {
  if (noise_cm < 0.0) throw std::invalid_argument("reset: noise_cm must be >= 0");
  if (planar_dist(pose.position, Vec3{}) > cfg_.workspace_radius)
    throw std::invalid_argument("reset: initial pose outside workspace");

  world_ = WorldState{};
  world_.hand = initial_hand_state(cfg_);
  world_.objects = scene.objects;

  const double direction = rng.uniform(0.0, 2.0 * kPi);
  const double r = noise_cm / 100.0;
  world_.hand.palm_position = pose.position + Vec3{r * std::cos(direction), r * std::sin(direction), 0.0};
  world_.hand.wrist_roll = wrap_angle(pose.roll);
  world_.hand.palm_normal = pose.palm_normal;

  contact_history_.clear();
  ContactSnapshot snap;
  TactileFrame frame = compute_contacts(cfg_.hand, world_, cfg_.contact_tolerance, &snap);
  contact_history_.push_back(std::move(snap));
  return frame;
}

TactileFrame GraspEnv::current_frame() const {
  return compute_contacts(cfg_.hand, world_, cfg_.contact_tolerance);
}

StepOutcome GraspEnv::apply_action(const ResolvedAction& action, double delta_finger) {
  if (world_.done) throw std::logic_error("apply_action: episode already terminated");

  const std::vector<double> joints_before = world_.hand.joint_angles;
  StepOutcome out;

  switch (action.kind) {
    case ActionKind::Fingers: {
      for (int i = 0; i < cfg_.hand.n_fingers; ++i) {
        if (i < static_cast<int>(action.finger_flags.size()) && action.finger_flags[i]) {
          world_.hand.joint_angles[i] = std::clamp(world_.hand.joint_angles[i] + delta_finger,
                                                   cfg_.hand.joint_min, cfg_.hand.joint_max);
        }
      }
      break;
    }
    case ActionKind::Reopen: {
      out.info.reopen_executed = true;
      world_.hand.joint_angles = world_.hand.pre_grasp_joint_angles;
      if (cfg_.enable_position_adjust &&
          !regrasp::side_grasp_guard(world_.hand, cfg_.side_guard_tol_deg)) {
        const Vec3 target = regrasp::tactile_centroid_target(contact_history_, cfg_.hand,
                                                             world_.hand.palm_position);
        world_.hand.palm_position.x = target.x;
        world_.hand.palm_position.y = target.y;
      }
      if (cfg_.enable_orientation_adjust) {
        world_.hand = regrasp::apply_wrist_rotation(world_.hand, action.wrist_rotation);
      }
      if (cfg_.enable_collision_recovery) {
        world_ = regrasp::collision_recovery(cfg_.hand, std::move(world_),
                                             regrasp::RecoveryPhase::Reopen,
                                             cfg_.contact_tolerance, cfg_.recovery_step,
                                             cfg_.recovery_max_iters);
      }
      break;
    }
    case ActionKind::Lift:
    case ActionKind::HorizonLift: {
      out.info.lift_attempted = true;
      out.info.forced_by_horizon = action.kind == ActionKind::HorizonLift;
      const auto picked = find_liftable_object(cfg_, world_);
      out.lift_success = picked.has_value();
      world_.hand.palm_position.z += cfg_.lift_height;
      if (picked) {
        world_.grasped_object = picked;
        world_.objects[*picked].position.z += cfg_.lift_height;  // rides with the hand
      }
      world_.hand.lifted = true;
      world_.done = true;
      break;
    }
  }

  world_.t += 1;
  ContactSnapshot snap;
  out.frame = compute_contacts(cfg_.hand, world_, cfg_.contact_tolerance, &snap);
  contact_history_.push_back(std::move(snap));
  out.done = world_.done;
  out.reward = step_reward(cfg_, joints_before, action, out.lift_success);
  return out;
}

}  // namespace mat::sim
