#include "navrl/env/nav_env.hpp"

#include <algorithm>
#include <chrono>
#include <thread>

namespace navrl::env {

void EnvConfig::validate() const {
  if (n_beams < 1) fail_config("env: n_beams must be >= 1");
  if (!(0.0 < d_collision && d_collision < d_goal && d_goal < d_max))
    fail_config("env: need 0 < d_collision < d_goal < d_max");
  if (dt <= 0.0) fail_config("env: dt must be positive");
  if (v_lin_max <= 0.0 || v_ang_max <= 0.0)
    fail_config("env: velocity limits must be positive");
  if (lidar_noise_std < 0.0) fail_config("env: lidar_noise_std must be >= 0");
}

std::vector<double> Observation::flatten() const {
  std::vector<double> out;
  out.reserve(dim());
  out.insert(out.end(), distances.begin(), distances.end());
  out.push_back(delta);
  out.push_back(alpha);
  out.push_back(prev_v_lin);
  out.push_back(prev_v_ang);
  return out;
}

const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::running: return "running";
    case Outcome::success: return "success";
    case Outcome::collision: return "collision";
    default: return "timeout";
  }
}

RewardResult compute_reward(double delta, double min_dist, int t, int t_max,
                            const EnvConfig& cfg) {
  if (delta < cfg.d_goal) return {cfg.r_success, true, Outcome::success};
  if (min_dist < cfg.d_collision) return {cfg.r_fail, true, Outcome::collision};
  if (t >= t_max) return {cfg.r_fail, true, Outcome::timeout};
  return {0.0, false, Outcome::running};
}

NavEnv::NavEnv(StageSpec stage, EnvConfig cfg)
    : stage_(std::move(stage)), cfg_(cfg) {
  cfg_.validate();
  stage_.validate();
}

sim::LidarScan NavEnv::scan_now() {
  sim::LidarScan scan = sim::raycast(stage_, pose_, cfg_.n_beams, cfg_.d_max);
  if (cfg_.lidar_noise_std > 0.0) {
    for (double& d : scan.distances)
      d = clamp(d + rng_.normal(0.0, cfg_.lidar_noise_std), 1e-3, cfg_.d_max);
  }
  return scan;
}

Observation NavEnv::observe() const {
  // const view of the current state; noise (if any) was applied when the scan
  // was taken during reset/step, so recompute without the rng.
  Observation obs;
  obs.distances = sim::raycast(stage_, pose_, cfg_.n_beams, cfg_.d_max).distances;
  Vec2 to_goal = goal_ - pose_.pos();
  obs.delta = to_goal.norm();
  obs.alpha = wrap_angle(std::atan2(to_goal.y, to_goal.x) - pose_.theta);
  obs.prev_v_lin = prev_action_.first;
  obs.prev_v_ang = prev_action_.second;
  return obs;
}

Observation NavEnv::reset(uint64_t seed) {
  rng_ = Rng(Rng::mix(seed, 0x6e61765f656e76ull));
  pose_ = stage_.spawn;
  if (cfg_.randomize_heading) pose_.theta = wrap_angle(rng_.uniform(-kPi, kPi));
  goal_ = sim::sample_goal(stage_, rng_, pose_.pos(), 2.0 * cfg_.d_goal);
  t_ = 0;
  done_ = false;
  prev_action_ = {0.0, 0.0};

  Observation obs;
  obs.distances = scan_now().distances;
  Vec2 to_goal = goal_ - pose_.pos();
  obs.delta = to_goal.norm();
  obs.alpha = wrap_angle(std::atan2(to_goal.y, to_goal.x) - pose_.theta);
  obs.prev_v_lin = 0.0;
  obs.prev_v_ang = 0.0;
  return obs;
}

std::pair<double, double> NavEnv::denormalize_action(
    std::pair<double, double> a) {
  double a0 = clamp(a.first, 0.0, 1.0);
  double a1 = clamp(a.second, -1.0, 1.0);
  if (a0 != a.first || a1 != a.second) ++clamp_events_;
  return {a0 * cfg_.v_lin_max, a1 * cfg_.v_ang_max};
}

StepResult NavEnv::step(std::pair<double, double> action) {
  check(!done_, "env: step() on a finished episode; call reset() first");
  auto t0 = std::chrono::steady_clock::now();

  double a0 = clamp(action.first, 0.0, 1.0);
  double a1 = clamp(action.second, -1.0, 1.0);
  if (a0 != action.first || a1 != action.second) ++clamp_events_;
  double v_lin = a0 * cfg_.v_lin_max;
  double v_ang = a1 * cfg_.v_ang_max;

  pose_ = sim::step_kinematics(pose_, v_lin, v_ang, cfg_.dt);
  t_ += 1;

  StepResult res;
  res.obs.distances = scan_now().distances;
  Vec2 to_goal = goal_ - pose_.pos();
  res.obs.delta = to_goal.norm();
  res.obs.alpha = wrap_angle(std::atan2(to_goal.y, to_goal.x) - pose_.theta);
  res.obs.prev_v_lin = a0;
  res.obs.prev_v_ang = a1;
  prev_action_ = {a0, a1};

  double min_d = *std::min_element(res.obs.distances.begin(),
                                   res.obs.distances.end());
  RewardResult rr = compute_reward(res.obs.delta, min_d, t_, stage_.t_max, cfg_);
  res.reward = rr.reward;
  res.done = rr.done;
  res.outcome = rr.outcome;
  done_ = rr.done;

  if (cfg_.realtime) {
    auto elapsed = std::chrono::steady_clock::now() - t0;
    auto period = std::chrono::duration<double>(cfg_.dt);
    if (elapsed < period)
      std::this_thread::sleep_for(period - elapsed);
  }
  return res;
}

}  // namespace navrl::env
