#pragma once

#include <utility>
#include <vector>

#include "navrl/rng.hpp"
#include "navrl/sim/goal.hpp"
#include "navrl/sim/kinematics.hpp"
#include "navrl/sim/raycast.hpp"

namespace navrl::env {

using sim::Pose;
using sim::StageSpec;
using sim::Vec2;

struct EnvConfig {
  int n_beams = 10;
  double d_max = 3.5;        // lidar range, m
  double d_goal = 0.4;       // success radius, m
  double d_collision = 0.2;  // collision radius, m
  double r_success = 100.0;
  double r_fail = -10.0;
  double dt = 0.15;          // control period, s (6.67 Hz)
  double v_lin_max = 0.22;   // m/s
  double v_ang_max = 2.0;    // rad/s
  bool realtime = false;
  bool randomize_heading = false;
  double lidar_noise_std = 0.0;
  void validate() const;
};

// [d_1..d_N, delta, alpha, prev_v_lin, prev_v_ang]; prev action components are
// the normalized commands from the previous step.
struct Observation {
  std::vector<double> distances;
  double delta = 0.0;
  double alpha = 0.0;
  double prev_v_lin = 0.0;
  double prev_v_ang = 0.0;

  int dim() const { return static_cast<int>(distances.size()) + 4; }
  std::vector<double> flatten() const;
};

enum class Outcome { running, success, collision, timeout };

const char* outcome_name(Outcome o);

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  Outcome outcome = Outcome::running;
};

// Success-first terminal logic shared by step() and the tests.
struct RewardResult {
  double reward;
  bool done;
  Outcome outcome;
};
RewardResult compute_reward(double delta, double min_dist, int t, int t_max,
                            const EnvConfig& cfg);

class NavEnv {
 public:
  NavEnv(StageSpec stage, EnvConfig cfg);

  Observation reset(uint64_t seed);
  StepResult step(std::pair<double, double> action);  // throws if done

  // Normalized action -> (v_lin, v_ang) in physical units, inputs clamped to
  // the box first (clamps are counted as a diagnostic).
  std::pair<double, double> denormalize_action(std::pair<double, double> a);

  Observation observe() const;  // observation at the current state

  const Pose& pose() const { return pose_; }
  Vec2 goal() const { return goal_; }
  int t() const { return t_; }
  int t_max() const { return stage_.t_max; }
  bool done() const { return done_; }
  int64_t clamp_events() const { return clamp_events_; }
  const StageSpec& stage() const { return stage_; }
  const EnvConfig& config() const { return cfg_; }
  int obs_dim() const { return cfg_.n_beams + 4; }

 private:
  sim::LidarScan scan_now();

  StageSpec stage_;
  EnvConfig cfg_;
  Rng rng_{0};
  Pose pose_;
  Vec2 goal_;
  int t_ = 0;
  bool done_ = true;  // reset() required before step()
  std::pair<double, double> prev_action_{0.0, 0.0};
  int64_t clamp_events_ = 0;
};

}  // namespace navrl::env
