#pragma once

#include "navrl/rng.hpp"
#include "navrl/sim/stage.hpp"

namespace navrl::sim {

// Rejection-samples a goal inside the stage's goal region: area-weighted rect
// choice, then uniform within the rect, rejected while closer than
// goal_clearance to any obstacle or closer than min_robot_dist to robot_pos.
// Throws after 10,000 rejections (over-constrained region).
Vec2 sample_goal(const StageSpec& stage, Rng& rng, Vec2 robot_pos,
                 double min_robot_dist);

}  // namespace navrl::sim
