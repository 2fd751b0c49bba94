#pragma once

#include <utility>

#include "navrl/diff/graph.hpp"

namespace navrl::nets {

using diff::Tensor;
using diff::Var;

// Action box: component 0 is linear velocity command in [0,1], component 1 is
// angular in [-1,1]. Policies produce pre-tanh values u; the squash maps
// tanh(u0) from [-1,1] onto [0,1] and passes tanh(u1) through.

inline std::pair<double, double> squash_action(double u0, double u1) {
  return {0.5 * (std::tanh(u0) + 1.0), std::tanh(u1)};
}

// [m,2] pre-tanh -> [m,2] box actions.
Var squash_actions(const Var& u);
Tensor squash_actions_plain(const Tensor& u);

// Row log-density of the squashed action under a diagonal Gaussian on u with
// mean mu and log-std ls, including the tanh and box-affine Jacobians.
// u may be a reparameterized sample node (SAC) or a constant (REINFORCE).
Var tanh_gauss_logp(const Var& mu, const Var& ls, const Var& u);

// Analytic entropy of the pre-squash Gaussian, per row: sum(ls) + d/2 log(2*pi*e).
Var gauss_entropy_rows(const Var& ls);

// sigma = min_std + (max_std - min_std) * sigmoid(raw); returns log sigma.
Var bounded_log_std(const Var& raw, double min_std, double max_std);

}  // namespace navrl::nets
