#include "navrl/diff/regression.hpp"

#include <algorithm>
#include <cmath>

namespace navrl::diff {

BinGrid BinGrid::make(int n_bins, double raw_lo, double raw_hi) {
  check(n_bins >= 2, "bin grid: need at least 2 bins");
  check(raw_lo < raw_hi, "bin grid: lo >= hi");
  BinGrid g;
  g.n = n_bins;
  g.lo = symlog(raw_lo);
  g.hi = symlog(raw_hi);
  g.centers.resize(n_bins);
  for (int i = 0; i < n_bins; ++i)
    g.centers[i] = g.lo + (g.hi - g.lo) * i / (n_bins - 1);
  return g;
}

Tensor BinGrid::twohot(const Tensor& raw_col) const {
  check(raw_col.cols == 1, "twohot: expected column vector");
  Tensor t(raw_col.rows, n);
  for (int r = 0; r < raw_col.rows; ++r) {
    double x = symlog(static_cast<double>(raw_col.v[r]));
    x = std::min(std::max(x, lo), hi);
    double pos = (x - lo) / (hi - lo) * (n - 1);
    int k = std::min(static_cast<int>(pos), n - 2);
    double w = pos - k;
    t.at(r, k) = static_cast<real>(1.0 - w);
    t.at(r, k + 1) += static_cast<real>(w);
  }
  return t;
}

Tensor BinGrid::decode(const Tensor& logits) const {
  check(logits.cols == n, "bin decode: logits width mismatch");
  Tensor out(logits.rows, 1);
  for (int r = 0; r < logits.rows; ++r) {
    double mx = -1e300;
    for (int c = 0; c < n; ++c)
      mx = std::max(mx, static_cast<double>(logits.at(r, c)));
    double z = 0.0, e = 0.0;
    for (int c = 0; c < n; ++c) {
      double p = std::exp(static_cast<double>(logits.at(r, c)) - mx);
      z += p;
      e += p * centers[c];
    }
    out.v[r] = static_cast<real>(symexp(e / z));
  }
  return out;
}

Tensor BinGrid::centers_col() const {
  Tensor c(n, 1);
  for (int i = 0; i < n; ++i) c.v[i] = static_cast<real>(centers[i]);
  return c;
}

}  // namespace navrl::diff
