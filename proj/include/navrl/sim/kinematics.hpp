#pragma once

#include "navrl/sim/geometry.hpp"

namespace navrl::sim {

// Exact unicycle integration over dt: a circular arc for |v_ang| above a tiny
// threshold, a straight line otherwise. Heading wraps to (-pi, pi].
Pose step_kinematics(const Pose& p, double v_lin, double v_ang, double dt);

}  // namespace navrl::sim
