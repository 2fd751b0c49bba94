#pragma once

#include <vector>

#include "navrl/sim/stage.hpp"

namespace navrl::sim {

struct LidarScan {
  std::vector<double> distances;  // each in (0, max_range]
  double min() const;
};

// N beams at absolute angles pose.theta + i * 2*pi / N, i = 0..N-1. Beams that
// hit nothing within max_range report exactly max_range.
LidarScan raycast(const StageSpec& stage, const Pose& pose, int n_beams,
                  double max_range);

// Single-ray version; dir_angle is absolute.
double cast_ray(const StageSpec& stage, Vec2 origin, double dir_angle,
                double max_range);

}  // namespace navrl::sim
