#pragma once

#include <vector>

#include "navrl/diff/tensor.hpp"

namespace navrl::diff {

// Uniform bin grid in symlog space for discrete-regression heads. Raw targets
// are symlog-transformed, clamped into the grid, and spread over the two
// neighboring bins; predictions decode as symexp of the expected bin center.
struct BinGrid {
  int n = 0;
  double lo = 0.0, hi = 0.0;       // grid bounds in symlog space
  std::vector<double> centers;     // symlog space, ascending

  static BinGrid make(int n_bins, double raw_lo, double raw_hi);

  double width() const { return centers[1] - centers[0]; }

  // [m,1] raw targets -> [m,n] two-hot probability rows.
  Tensor twohot(const Tensor& raw_col) const;

  // [m,n] logits -> [m,1] raw-space expectations (softmax, expectation,
  // symexp). Plain math, used at inference; training goes through
  // cross_entropy_rows on the logits.
  Tensor decode(const Tensor& logits) const;

  Tensor centers_col() const;  // [n,1]
};

}  // namespace navrl::diff
