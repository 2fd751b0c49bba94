#include "navrl/sim/kinematics.hpp"

namespace navrl::sim {

Pose step_kinematics(const Pose& p, double v_lin, double v_ang, double dt) {
  Pose n;
  if (std::fabs(v_ang) < 1e-9) {
    n.x = p.x + v_lin * std::cos(p.theta) * dt;
    n.y = p.y + v_lin * std::sin(p.theta) * dt;
    n.theta = wrap_angle(p.theta + v_ang * dt);
    return n;
  }
  double r = v_lin / v_ang;
  double th1 = p.theta + v_ang * dt;
  n.x = p.x + r * (std::sin(th1) - std::sin(p.theta));
  n.y = p.y - r * (std::cos(th1) - std::cos(p.theta));
  n.theta = wrap_angle(th1);
  return n;
}

}  // namespace navrl::sim
