#include "navrl/sim/goal.hpp"

namespace navrl::sim {

Vec2 sample_goal(const StageSpec& stage, Rng& rng, Vec2 robot_pos,
                 double min_robot_dist) {
  const auto& rects = stage.goal_region;
  std::vector<double> cum;
  double total = 0.0;
  for (const Rect& r : rects) {
    total += r.area();
    cum.push_back(total);
  }
  for (int attempt = 0; attempt < 10000; ++attempt) {
    size_t k = 0;
    if (total > 0.0) {
      double u = rng.u01() * total;
      while (k + 1 < cum.size() && u >= cum[k]) ++k;
    } else {
      k = static_cast<size_t>(rng.below(rects.size()));
    }
    const Rect& r = rects[k];
    Vec2 p{rng.uniform(r.xmin, r.xmax), rng.uniform(r.ymin, r.ymax)};
    if (stage.obstacle_clearance(p) < stage.goal_clearance) continue;
    if ((p - robot_pos).norm() < min_robot_dist) continue;
    return p;
  }
  fail("goal sampling: no valid goal after 10000 attempts in stage '" +
       stage.name + "' (over-constrained goal region)");
}

}  // namespace navrl::sim
