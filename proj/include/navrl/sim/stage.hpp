#pragma once

#include <string>
#include <vector>

#include "navrl/sim/geometry.hpp"

namespace navrl::sim {

// Arena description loaded from a stage file. All lengths in meters.
struct StageSpec {
  std::string name;
  Rect bounds;
  std::vector<Segment> walls;
  std::vector<Circle> circles;
  Pose spawn;
  std::vector<Rect> goal_region;
  double goal_clearance = 0.3;
  int t_max = 300;

  // Minimum distance from a point to any wall or circle boundary.
  double obstacle_clearance(Vec2 p) const;
  void validate() const;  // throws ConfigError with the offending field
};

StageSpec parse_stage(const std::string& text, const std::string& origin);
StageSpec load_stage_file(const std::string& path);

}  // namespace navrl::sim
