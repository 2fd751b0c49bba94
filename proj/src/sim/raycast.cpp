#include "navrl/sim/raycast.hpp"

#include <algorithm>

namespace navrl::sim {

double LidarScan::min() const {
  return *std::min_element(distances.begin(), distances.end());
}

double cast_ray(const StageSpec& stage, Vec2 origin, double dir_angle,
                double max_range) {
  Vec2 dir{std::cos(dir_angle), std::sin(dir_angle)};
  double t = kNoHit;
  for (const auto& w : stage.walls)
    t = std::min(t, ray_segment(origin, dir, w));
  for (const auto& c : stage.circles)
    t = std::min(t, ray_circle(origin, dir, c));
  return std::min(t, max_range);
}

LidarScan raycast(const StageSpec& stage, const Pose& pose, int n_beams,
                  double max_range) {
  check(n_beams >= 1, "raycast: need at least one beam");
  check(max_range > 0.0, "raycast: max_range must be positive");
  LidarScan scan;
  scan.distances.resize(n_beams);
  for (int i = 0; i < n_beams; ++i) {
    double ang = pose.theta + 2.0 * kPi * i / n_beams;
    scan.distances[i] = cast_ray(stage, pose.pos(), ang, max_range);
  }
  return scan;
}

}  // namespace navrl::sim
