#pragma once

#include "mat/actions.hpp"
#include "mat/obs_window.hpp"
#include "mat/regrasp.hpp"
#include "mat/world.hpp"

namespace mat::sim {

struct EnvConfig {
  HandModel hand;
  double contact_tolerance = 0.005;
  double hover_clearance = 0.02;      // palm height above the target's top face
  double grasp_angle_min_deg = 100.0; // bearing separation for a stable pick-up
  double lift_height = 0.25;
  double workspace_radius = 0.30;
  double joint_move_threshold = 0.05; // stall rule / joint delta threshold
  int stall_window = 5;
  double reopen_penalty = 0.05;
  double grip_gate_rad = 0.2;
  double pre_grasp_rad = 0.0;         // flexion angle restored by a reopen
  double planner_jitter_cm = 5.0;     // coarseness of the synthetic pose generator
  bool enable_forced_reopen = true;
  bool enable_collision_recovery = true;
  double recovery_step = 0.001;
  int recovery_max_iters = 1000;
  double side_guard_tol_deg = 15.0;
  // Ablation switches for the reopen maneuver.
  bool enable_position_adjust = true;
  bool enable_orientation_adjust = true;
};

struct InitialPose {
  Vec3 position{};
  double roll = 0.0;
  Vec3 palm_normal{0.0, 0.0, -1.0};
};

struct StepOutcome {
  TactileFrame frame;
  double reward = 0.0;
  bool done = false;
  bool lift_success = false;
  struct Info {
    bool lift_attempted = false;
    bool reopen_executed = false;
    bool forced_by_horizon = false;
  } info;
};

// Grasp pose above `target`, standing in for an upstream grasp planner:
// centred on the object, palm a hover clearance above its top face.
InitialPose initial_pose_for(const EnvConfig& cfg, const Scene& scene, int target, double roll = 0.0);

// The same pose displaced by the generator's own coarseness: a planar offset
// drawn uniformly from the disc of radius planner_jitter_cm. Calibration
// noise (reset's noise_cm) is applied on top of this.
InitialPose jittered_initial_pose(const EnvConfig& cfg, const Scene& scene, int target,
                                  double roll, Rng& rng);

// Index of an object held stably enough to pick up: some object must have
// contacts from two distinct fingers, below its top face, whose bearings
// around its vertical axis are at least grasp_angle_min apart.
std::optional<int> find_liftable_object(const EnvConfig& cfg, const WorldState& world);
bool evaluate_lift(const EnvConfig& cfg, const WorldState& world);

// Reward: terminal steps pay the pick-up indicator; a reopen step is fined
// `reopen_penalty` unless some flexion joint had closed past `grip_gate_rad`
// at decision time; everything else is 0.
double step_reward(const EnvConfig& cfg, const std::vector<double>& joints_before,
                   const ResolvedAction& action, bool lift_success);

// Stall detector: true when every joint moved at most `threshold` between
// each of the last `window` adjacent frame pairs. Needs window+1 real frames;
// earlier in the episode the check is disabled (false).
bool forced_reopen_check(const obs::ObservationWindow& window, double threshold = 0.05,
                         int window_steps = 5);

// Deterministic single-attempt grasping episode world. One instance per
// worker; all randomness comes through the Rng arguments.
class GraspEnv {
 public:
  explicit GraspEnv(EnvConfig cfg);

  // Places the hand at `pose` displaced by noise_cm/100 metres in a uniformly
  // random planar direction, joints at the pre-grasp angles, t = 0.
  TactileFrame reset(const Scene& scene, const InitialPose& pose, double noise_cm, Rng& rng);

  StepOutcome apply_action(const ResolvedAction& action, double delta_finger);

  const EnvConfig& config() const { return cfg_; }
  const WorldState& world() const { return world_; }
  WorldState& mutable_world() { return world_; }
  const std::vector<ContactSnapshot>& contact_history() const { return contact_history_; }
  TactileFrame current_frame() const;

 private:
  EnvConfig cfg_;
  WorldState world_;
  std::vector<ContactSnapshot> contact_history_;
};

}  // namespace mat::sim
