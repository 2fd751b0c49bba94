#pragma once

#include <vector>

#include "navrl/diff/tensor.hpp"

namespace navrl::agent {

using diff::Tensor;

// R_t = r_t + gamma * c_t * ((1 - lambda) * v_{t+1} + lambda * R_{t+1}),
// bootstrapped with R_H = v_H. rewards and continues have H entries, values
// H+1; every entry is [n,1]. Returns H entries of targets for v_0..v_{H-1}.
std::vector<Tensor> lambda_returns(const std::vector<Tensor>& rewards,
                                   const std::vector<Tensor>& values,
                                   const std::vector<Tensor>& continues,
                                   double gamma, double lambda);

// Linear-interpolation percentile of an unsorted sample, q in [0,1].
double percentile(std::vector<double> xs, double q);

// Running 5th/95th percentile range of imagined returns; advantages divide by
// scale() which never drops below 1, so normalization only shrinks.
struct ReturnNorm {
  double p_lo = 0.05, p_hi = 0.95;
  double decay = 0.99;
  double lo = 0.0, hi = 0.0;
  bool initialized = false;

  void update(const std::vector<double>& returns);
  double scale() const { return std::max(hi - lo, 1.0); }
};

}  // namespace navrl::agent
