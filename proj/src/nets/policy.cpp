#include "navrl/nets/policy.hpp"

#include <cmath>

#include "navrl/common.hpp"

namespace navrl::nets {

using namespace diff;

Var squash_actions(const Var& u) {
  check(u.cols() == 2, "squash: expected 2 action dims");
  Var t = tanh_op(u);
  Var lin = scale(add_scalar(slice_cols(t, 0, 1), 1.0), 0.5);
  Var ang = slice_cols(t, 1, 1);
  return concat_cols({lin, ang});
}

Tensor squash_actions_plain(const Tensor& u) {
  check(u.cols == 2, "squash: expected 2 action dims");
  Tensor a(u.rows, 2);
  for (int r = 0; r < u.rows; ++r) {
    auto [lin, ang] = squash_action(u.at(r, 0), u.at(r, 1));
    a.at(r, 0) = static_cast<real>(lin);
    a.at(r, 1) = static_cast<real>(ang);
  }
  return a;
}

Var tanh_gauss_logp(const Var& mu, const Var& ls, const Var& u) {
  // Base Gaussian density at u, elementwise:
  //   -ls - 0.5*log(2*pi) - 0.5*((u - mu) * exp(-ls))^2
  Var z = mul(sub(u, mu), exp_op(neg(ls)));
  Var base = sub(scale(square(z), -0.5),
                 add_scalar(ls, 0.5 * std::log(2.0 * kPi)));
  // log(1 - tanh(u)^2) = 2*(log 2 - u - softplus(-2u)), numerically stable.
  Var corr = scale(add_scalar(add(u, softplus(scale(u, -2.0))),
                              -std::log(2.0)),
                   -2.0);
  // Box affine on dim 0 contributes a constant log|d a0/d t0| = log 0.5.
  return add_scalar(sum_cols(sub(base, corr)), std::log(2.0));
}

Var gauss_entropy_rows(const Var& ls) {
  double c = 0.5 * std::log(2.0 * kPi * std::exp(1.0));
  return add_scalar(sum_cols(ls), ls.cols() * c);
}

Var bounded_log_std(const Var& raw, double min_std, double max_std) {
  check(0.0 < min_std && min_std < max_std, "bounded_log_std: bad bounds");
  return log_op(add_scalar(scale(sigmoid(raw), max_std - min_std), min_std));
}

}  // namespace navrl::nets
