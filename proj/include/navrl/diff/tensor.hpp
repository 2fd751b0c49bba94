#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "navrl/common.hpp"

namespace navrl::diff {

// Dense row-major matrix. Everything in the stack is rank <= 2: vectors are
// 1 x n rows, sequences are std::vector<Tensor>. shape() reports [rows, cols].
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<real> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, real(0)) {
    check(r >= 0 && c >= 0, "tensor: negative dimension");
  }

  static Tensor zeros(int r, int c) { return Tensor(r, c); }

  static Tensor full(int r, int c, real x) {
    Tensor t(r, c);
    for (auto& e : t.v) e = x;
    return t;
  }

  static Tensor scalar(real x) { return full(1, 1, x); }

  static Tensor row(const std::vector<real>& xs) {
    Tensor t(1, static_cast<int>(xs.size()));
    t.v = xs;
    return t;
  }

  static Tensor col(const std::vector<real>& xs) {
    Tensor t(static_cast<int>(xs.size()), 1);
    t.v = xs;
    return t;
  }

  int numel() const { return rows * cols; }
  std::vector<int> shape() const { return {rows, cols}; }

  real& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  real at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }

  std::string shape_str() const {
    return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
  }

  bool all_finite() const {
    for (real x : v)
      if (!std::isfinite(static_cast<double>(x))) return false;
    return true;
  }
};

}  // namespace navrl::diff
