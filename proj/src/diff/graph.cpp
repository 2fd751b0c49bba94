#include "navrl/diff/graph.hpp"

#include <algorithm>
#include <cmath>

#include "navrl/diff/gemm.hpp"

namespace navrl::diff {

namespace {

[[noreturn]] void op_fail(const char* op, const std::string& detail) {
  fail(std::string(op) + ": " + detail);
}

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) op_fail(op, detail);
}

void same_graph(const Var& a, const Var& b, const char* op) {
  require(a.defined() && b.defined(), op, "undefined operand");
  require(a.graph() == b.graph(), op, "operands from different graphs");
}

Graph& gof(const Var& a, const char* op) {
  require(a.defined(), op, "undefined operand");
  return *a.graph();
}

// Broadcast mode of b relative to a.
enum class BMode { same, scalar, brow, bcol };

BMode bmode(const Tensor& a, const Tensor& b, const char* op) {
  if (a.same_shape(b)) return BMode::same;
  if (b.rows == 1 && b.cols == 1) return BMode::scalar;
  if (b.rows == 1 && b.cols == a.cols) return BMode::brow;
  if (b.cols == 1 && b.rows == a.rows) return BMode::bcol;
  op_fail(op, "shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

real bval(const Tensor& b, BMode m, int r, int c) {
  switch (m) {
    case BMode::same: return b.at(r, c);
    case BMode::scalar: return b.v[0];
    case BMode::brow: return b.v[c];
    default: return b.v[r];
  }
}

real& bref(Tensor& b, BMode m, int r, int c) {
  switch (m) {
    case BMode::same: return b.at(r, c);
    case BMode::scalar: return b.v[0];
    case BMode::brow: return b.v[c];
    default: return b.v[r];
  }
}

double sigmoid_d(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

// Elementwise unary op helper: fwd computes the value, dfn the local
// derivative from (x, y).
template <class F, class D>
Var unary(const Var& a, const char* op, F&& fwd, D&& dfn) {
  Graph& g = gof(a, op);
  const Tensor& x = a.val();
  Tensor y(x.rows, x.cols);
  for (int i = 0; i < x.numel(); ++i)
    y.v[i] = static_cast<real>(fwd(static_cast<double>(x.v[i])));
  int aid = a.id();
  Graph::BackFn back;
  if (g.node_requires_grad(aid)) {
    back = [aid, dfn](Graph& gg, int self) {
      const Tensor& grad_out = gg.grad_buf(self);
      const Tensor& x2 = gg.node_val(aid);
      const Tensor& y2 = gg.node_val(self);
      Tensor& ga = gg.grad_buf(aid);
      for (int i = 0; i < x2.numel(); ++i)
        ga.v[i] += grad_out.v[i] *
                   static_cast<real>(dfn(static_cast<double>(x2.v[i]),
                                         static_cast<double>(y2.v[i])));
    };
  }
  return g.make(std::move(y), g.node_requires_grad(aid), std::move(back));
}

}  // namespace

const Tensor& Var::val() const {
  check(defined(), "var: undefined");
  return g_->node_val(id_);
}

const Tensor& Var::grad() const {
  check(defined(), "var: undefined");
  return g_->grad_buf(id_);
}

Var Graph::make(Tensor val, bool requires_grad, BackFn back) {
  Node n;
  n.val = std::move(val);
  n.requires_grad = requires_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Graph::hooked_leaf(Tensor t, std::function<void(const Tensor&)> sink) {
  Var v = make(std::move(t), true, {});
  int id = v.id();
  nodes_[id].back = [id, sink = std::move(sink)](Graph& g, int self) {
    (void)self;
    sink(g.nodes_[id].grad);
  };
  return v;
}

Tensor& Graph::grad_buf(int id) {
  Node& n = nodes_[id];
  if (n.grad.v.empty()) n.grad = Tensor(n.val.rows, n.val.cols);
  return n.grad;
}

void Graph::backward(const Var& loss) {
  check(loss.defined() && loss.graph() == this, "backward: loss not in graph");
  const Tensor& lv = node_val(loss.id());
  if (lv.rows != 1 || lv.cols != 1)
    fail("backward: loss must be scalar, got " + lv.shape_str());
  check(!backward_done_, "backward: already run on this graph");
  backward_done_ = true;
  grad_buf(loss.id()).v[0] = real(1);
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.back && n.requires_grad && !n.grad.v.empty()) n.back(*this, id);
  }
}

void Graph::clear() {
  nodes_.clear();
  backward_done_ = false;
}

// ---- matmul ----

Var matmul(const Var& a, const Var& b) {
  same_graph(a, b, "matmul");
  Graph& g = *a.graph();
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  require(A.cols == B.rows, "matmul",
          "inner dims " + A.shape_str() + " x " + B.shape_str());
  Tensor C(A.rows, B.cols);
  detail::gemm(false, false, A.rows, B.cols, A.cols, 1.0, A.v.data(), A.cols,
               B.v.data(), B.cols, 0.0, C.v.data(), C.cols);
  int aid = a.id(), bid = b.id();
  bool rg = g.node_requires_grad(aid) || g.node_requires_grad(bid);
  Graph::BackFn back;
  if (rg) {
    back = [aid, bid](Graph& gg, int self) {
      const Tensor& go = gg.grad_buf(self);
      const Tensor& A2 = gg.node_val(aid);
      const Tensor& B2 = gg.node_val(bid);
      if (gg.node_requires_grad(aid)) {
        Tensor& ga = gg.grad_buf(aid);
        // ga += go * B^T
        detail::gemm(false, true, A2.rows, A2.cols, B2.cols, 1.0, go.v.data(),
                     go.cols, B2.v.data(), B2.cols, 1.0, ga.v.data(), ga.cols);
      }
      if (gg.node_requires_grad(bid)) {
        Tensor& gb = gg.grad_buf(bid);
        // gb += A^T * go
        detail::gemm(true, false, B2.rows, B2.cols, A2.rows, 1.0, A2.v.data(),
                     A2.cols, go.v.data(), go.cols, 1.0, gb.v.data(), gb.cols);
      }
    };
  }
  return g.make(std::move(C), rg, std::move(back));
}

// ---- add / sub / mul with broadcasting ----

namespace {

enum class BinKind { add, sub, mul };

Var binary_bcast(const Var& a, const Var& b, BinKind kind, const char* op) {
  same_graph(a, b, op);
  Graph& g = *a.graph();
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  BMode m = bmode(A, B, op);
  Tensor Y(A.rows, A.cols);
  for (int r = 0; r < A.rows; ++r)
    for (int c = 0; c < A.cols; ++c) {
      real av = A.at(r, c), bv = bval(B, m, r, c);
      Y.at(r, c) = kind == BinKind::add   ? av + bv
                   : kind == BinKind::sub ? av - bv
                                          : av * bv;
    }
  int aid = a.id(), bid = b.id();
  bool rg = g.node_requires_grad(aid) || g.node_requires_grad(bid);
  Graph::BackFn back;
  if (rg) {
    back = [aid, bid, m, kind](Graph& gg, int self) {
      const Tensor& go = gg.grad_buf(self);
      const Tensor& A2 = gg.node_val(aid);
      const Tensor& B2 = gg.node_val(bid);
      if (gg.node_requires_grad(aid)) {
        Tensor& ga = gg.grad_buf(aid);
        if (kind == BinKind::mul) {
          for (int r = 0; r < A2.rows; ++r)
            for (int c = 0; c < A2.cols; ++c)
              ga.at(r, c) += go.at(r, c) * bval(B2, m, r, c);
        } else {
          for (int i = 0; i < A2.numel(); ++i) ga.v[i] += go.v[i];
        }
      }
      if (gg.node_requires_grad(bid)) {
        Tensor& gb = gg.grad_buf(bid);
        double s = kind == BinKind::sub ? -1.0 : 1.0;
        for (int r = 0; r < A2.rows; ++r)
          for (int c = 0; c < A2.cols; ++c) {
            real contrib = go.at(r, c);
            if (kind == BinKind::mul) contrib *= A2.at(r, c);
            bref(gb, m, r, c) += static_cast<real>(s) * contrib;
          }
      }
    };
  }
  return g.make(std::move(Y), rg, std::move(back));
}

}  // namespace

Var add(const Var& a, const Var& b) { return binary_bcast(a, b, BinKind::add, "add"); }
Var sub(const Var& a, const Var& b) { return binary_bcast(a, b, BinKind::sub, "sub"); }
Var mul(const Var& a, const Var& b) { return binary_bcast(a, b, BinKind::mul, "mul"); }

Var scale(const Var& a, double c) {
  return unary(a, "scale", [c](double x) { return c * x; },
               [c](double, double) { return c; });
}

Var add_scalar(const Var& a, double c) {
  return unary(a, "add_scalar", [c](double x) { return x + c; },
               [](double, double) { return 1.0; });
}

Var neg(const Var& a) { return scale(a, -1.0); }

// ---- elementwise nonlinearities ----

Var relu(const Var& a) {
  return unary(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh_op(const Var& a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& a) {
  return unary(a, "sigmoid", [](double x) { return sigmoid_d(x); },
               [](double, double y) { return y * (1.0 - y); });
}

Var silu(const Var& a) {
  return unary(a, "silu", [](double x) { return x * sigmoid_d(x); },
               [](double x, double) {
                 double s = sigmoid_d(x);
                 return s * (1.0 + x * (1.0 - s));
               });
}

Var exp_op(const Var& a) {
  return unary(a, "exp", [](double x) { return std::exp(x); },
               [](double, double y) { return y; });
}

Var log_op(const Var& a) {
  const Tensor& x = a.val();
  for (real e : x.v)
    require(e > real(0), "log", "non-positive input " + std::to_string(e));
  return unary(a, "log", [](double x2) { return std::log(x2); },
               [](double x2, double) { return 1.0 / x2; });
}

Var square(const Var& a) {
  return unary(a, "square", [](double x) { return x * x; },
               [](double x, double) { return 2.0 * x; });
}

Var softplus(const Var& a) {
  return unary(a, "softplus",
               [](double x) {
                 return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
               },
               [](double x, double) { return sigmoid_d(x); });
}

Var clamp_op(const Var& a, double lo, double hi) {
  require(lo <= hi, "clamp", "lo > hi");
  return unary(a, "clamp",
               [lo, hi](double x) { return x < lo ? lo : (x > hi ? hi : x); },
               [lo, hi](double x, double) {
                 return (x >= lo && x <= hi) ? 1.0 : 0.0;
               });
}

Var clamp_min(const Var& a, double lo) {
  return unary(a, "clamp_min", [lo](double x) { return x < lo ? lo : x; },
               [lo](double x, double) { return x >= lo ? 1.0 : 0.0; });
}

Var abs_op(const Var& a) {
  return unary(a, "abs", [](double x) { return std::fabs(x); },
               [](double x, double) { return x >= 0.0 ? 1.0 : -1.0; });
}

Var min_elem(const Var& a, const Var& b) {
  same_graph(a, b, "min_elem");
  Graph& g = *a.graph();
  const Tensor& A = a.val();
  const Tensor& B = b.val();
  require(A.same_shape(B), "min_elem",
          "shape mismatch " + A.shape_str() + " vs " + B.shape_str());
  Tensor Y(A.rows, A.cols);
  for (int i = 0; i < A.numel(); ++i) Y.v[i] = std::min(A.v[i], B.v[i]);
  int aid = a.id(), bid = b.id();
  bool rg = g.node_requires_grad(aid) || g.node_requires_grad(bid);
  Graph::BackFn back;
  if (rg) {
    back = [aid, bid](Graph& gg, int self) {
      const Tensor& go = gg.grad_buf(self);
      const Tensor& A2 = gg.node_val(aid);
      const Tensor& B2 = gg.node_val(bid);
      bool ra = gg.node_requires_grad(aid), rb = gg.node_requires_grad(bid);
      Tensor* ga = ra ? &gg.grad_buf(aid) : nullptr;
      Tensor* gb = rb ? &gg.grad_buf(bid) : nullptr;
      for (int i = 0; i < A2.numel(); ++i) {
        if (A2.v[i] <= B2.v[i]) {
          if (ga) ga->v[i] += go.v[i];
        } else if (gb) {
          gb->v[i] += go.v[i];
        }
      }
    };
  }
  return g.make(std::move(Y), rg, std::move(back));
}

// ---- symlog / symexp ----

Var symlog_op(const Var& a) {
  return unary(a, "symlog", [](double x) { return navrl::symlog(x); },
               [](double x, double) { return 1.0 / (1.0 + std::fabs(x)); });
}

Var symexp_op(const Var& a) {
  return unary(a, "symexp", [](double x) { return navrl::symexp(x); },
               [](double x, double) { return std::exp(std::fabs(x)); });
}

// ---- softmax ----

Var softmax_groups(const Var& a, int k) {
  Graph& g = gof(a, "softmax_groups");
  const Tensor& X = a.val();
  require(k >= 1 && X.cols % k == 0, "softmax_groups",
          "cols " + std::to_string(X.cols) + " not divisible by group " +
              std::to_string(k));
  Tensor Y(X.rows, X.cols);
  for (int r = 0; r < X.rows; ++r) {
    for (int b0 = 0; b0 < X.cols; b0 += k) {
      double mx = -1e300;
      for (int j = 0; j < k; ++j)
        mx = std::max(mx, static_cast<double>(X.at(r, b0 + j)));
      double z = 0.0;
      for (int j = 0; j < k; ++j)
        z += std::exp(static_cast<double>(X.at(r, b0 + j)) - mx);
      for (int j = 0; j < k; ++j)
        Y.at(r, b0 + j) = static_cast<real>(
            std::exp(static_cast<double>(X.at(r, b0 + j)) - mx) / z);
    }
  }
  int aid = a.id();
  bool rg = g.node_requires_grad(aid);
  Graph::BackFn back;
  if (rg) {
    back = [aid, k](Graph& gg, int self) {
      const Tensor& go = gg.grad_buf(self);
      const Tensor& Y2 = gg.node_val(self);
      Tensor& ga = gg.grad_buf(aid);
      for (int r = 0; r < Y2.rows; ++r) {
        for (int b0 = 0; b0 < Y2.cols; b0 += k) {
          double dot = 0.0;
          for (int j = 0; j < k; ++j)
            dot += static_cast<double>(go.at(r, b0 + j)) * Y2.at(r, b0 + j);
          for (int j = 0; j < k; ++j)
            ga.at(r, b0 + j) +=
                Y2.at(r, b0 + j) *
                (go.at(r, b0 + j) - static_cast<real>(dot));
        }
      }
    };
  }
  return g.make(std::move(Y), rg, std::move(back));
}

Var softmax_rows(const Var& a) { return softmax_groups(a, a.val().cols); }

// ---- layer norm ----

Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias,
                    double eps) {
  same_graph(x, gain, "layer_norm");
  same_graph(x, bias, "layer_norm");
  Graph& g = *x.graph();
  const Tensor& X = x.val();
  const Tensor& G = gain.val();
  const Tensor& B = bias.val();
  require(G.rows == 1 && G.cols == X.cols, "layer_norm",
          "gain shape " + G.shape_str() + " vs input " + X.shape_str());
  require(B.rows == 1 && B.cols == X.cols, "layer_norm",
          "bias shape " + B.shape_str() + " vs input " + X.shape_str());
  int n = X.cols;
  Tensor xh(X.rows, n);
  Tensor inv(X.rows, 1);
  Tensor Y(X.rows, n);
  for (int r = 0; r < X.rows; ++r) {
    double mu = 0.0;
    for (int c = 0; c < n; ++c) mu += X.at(r, c);
    mu /= n;
    double var = 0.0;
    for (int c = 0; c < n; ++c) {
      double d = X.at(r, c) - mu;
      var += d * d;
    }
    var /= n;
    double iv = 1.0 / std::sqrt(var + eps);
    inv.v[r] = static_cast<real>(iv);
    for (int c = 0; c < n; ++c) {
      double h = (X.at(r, c) - mu) * iv;
      xh.at(r, c) = static_cast<real>(h);
      Y.at(r, c) = static_cast<real>(h * G.v[c] + B.v[c]);
    }
  }
  int xid = x.id(), gid = gain.id(), bid = bias.id();
  bool rg = g.node_requires_grad(xid) || g.node_requires_grad(gid) ||
            g.node_requires_grad(bid);
  Graph::BackFn back;
  if (rg) {
    back = [xid, gid, bid, xh = std::move(xh), inv = std::move(inv)](
               Graph& gg, int self) {
      const Tensor& go = gg.grad_buf(self);
      const Tensor& G2 = gg.node_val(gid);
      int rows = go.rows, n2 = go.cols;
      if (gg.node_requires_grad(gid)) {
        Tensor& ggain = gg.grad_buf(gid);
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < n2; ++c)
            ggain.v[c] += go.at(r, c) * xh.at(r, c);
      }
      if (gg.node_requires_grad(bid)) {
        Tensor& gbias = gg.grad_buf(bid);
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < n2; ++c) gbias.v[c] += go.at(r, c);
      }
      if (gg.node_requires_grad(xid)) {
        Tensor& gx = gg.grad_buf(xid);
        for (int r = 0; r < rows; ++r) {
          double m1 = 0.0, m2 = 0.0;
          for (int c = 0; c < n2; ++c) {
            double dxh = static_cast<double>(go.at(r, c)) * G2.v[c];
            m1 += dxh;
            m2 += dxh * xh.at(r, c);
          }
          m1 /= n2;
          m2 /= n2;
          for (int c = 0; c < n2; ++c) {
            double dxh = static_cast<double>(go.at(r, c)) * G2.v[c];
            gx.at(r, c) += static_cast<real>(
                inv.v[r] * (dxh - m1 - static_cast<double>(xh.at(r, c)) * m2));
          }
        }
      }
    };
  }
  return g.make(std::move(Y), rg, std::move(back));
}

// ---- concat / slice ----

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  Graph& g = gof(parts[0], "concat_cols");
  int rows = parts[0].val().rows;
  int total = 0;
  bool rg = false;
  for (const Var& p : parts) {
    same_graph(parts[0], p, "concat_cols");
    require(p.val().rows == rows, "concat_cols",
            "row mismatch " + p.val().shape_str());
    total += p.val().cols;
    rg = rg || g.node_requires_grad(p.id());
  }
  Tensor Y(rows, total);
  int off = 0;
  std::vector<int> ids, offs, widths;
  for (const Var& p : parts) {
    const Tensor& P = p.val();
    for (int r = 0; r < rows; ++r)
      std::copy_n(&P.v[static_cast<size_t>(r) * P.cols], P.cols,
                  &Y.v[static_cast<size_t>(r) * total + off]);
    ids.push_back(p.id());
    offs.push_back(off);
    widths.push_back(P.cols);
    off += P.cols;
  }
  Graph::BackFn back;
  if (rg) {
    back = [ids, offs, widths](Graph& gg, int self) {
      const Tensor& go = gg.grad_buf(self);
      for (size_t i = 0; i < ids.size(); ++i) {
        if (!gg.node_requires_grad(ids[i])) continue;
        Tensor& gp = gg.grad_buf(ids[i]);
        for (int r = 0; r < go.rows; ++r)
          for (int c = 0; c < widths[i]; ++c)
            gp.at(r, c) += go.at(r, offs[i] + c);
      }
    };
  }
  return g.make(std::move(Y), rg, std::move(back));
}

Var slice_cols(const Var& a, int start, int len) {
  Graph& g = gof(a, "slice_cols");
  const Tensor& X = a.val();
  require(start >= 0 && len >= 1 && start + len <= X.cols, "slice_cols",
          "range [" + std::to_string(start) + "," + std::to_string(start + len) +
              ") of " + X.shape_str());
  Tensor Y(X.rows, len);
  for (int r = 0; r < X.rows; ++r)
    std::copy_n(&X.v[static_cast<size_t>(r) * X.cols + start], len,
                &Y.v[static_cast<size_t>(r) * len]);
  int aid = a.id();
  bool rg = g.node_requires_grad(aid);
  Graph::BackFn back;
  if (rg) {
    back = [aid, start, len](Graph& gg, int self) {
      const Tensor& go = gg.grad_buf(self);
      Tensor& ga = gg.grad_buf(aid);
      for (int r = 0; r < go.rows; ++r)
        for (int c = 0; c < len; ++c) ga.at(r, start + c) += go.at(r, c);
    };
  }
  return g.make(std::move(Y), rg, std::move(back));
}

// ---- reductions ----

Var sum_all(const Var& a) {
  Graph& g = gof(a, "sum_all");
  const Tensor& X = a.val();
  double s = 0.0;
  for (real e : X.v) s += e;
  int aid = a.id();
  bool rg = g.node_requires_grad(aid);
  Graph::BackFn back;
  if (rg) {
    back = [aid](Graph& gg, int self) {
      real go = gg.grad_buf(self).v[0];
      Tensor& ga = gg.grad_buf(aid);
      for (auto& e : ga.v) e += go;
    };
  }
  return g.make(Tensor::scalar(static_cast<real>(s)), rg, std::move(back));
}

Var mean_all(const Var& a) {
  const Tensor& X = a.val();
  require(X.numel() > 0, "mean_all", "empty tensor");
  return scale(sum_all(a), 1.0 / X.numel());
}

Var sum_cols(const Var& a) {
  Graph& g = gof(a, "sum_cols");
  const Tensor& X = a.val();
  Tensor Y(X.rows, 1);
  for (int r = 0; r < X.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < X.cols; ++c) s += X.at(r, c);
    Y.v[r] = static_cast<real>(s);
  }
  int aid = a.id();
  bool rg = g.node_requires_grad(aid);
  Graph::BackFn back;
  if (rg) {
    back = [aid](Graph& gg, int self) {
      const Tensor& go = gg.grad_buf(self);
      Tensor& ga = gg.grad_buf(aid);
      for (int r = 0; r < ga.rows; ++r)
        for (int c = 0; c < ga.cols; ++c) ga.at(r, c) += go.v[r];
    };
  }
  return g.make(std::move(Y), rg, std::move(back));
}

// ---- stochastic / probabilistic ----

Var gaussian_sample(const Var& mu, const Var& log_sigma, const Tensor& noise) {
  same_graph(mu, log_sigma, "gaussian_sample");
  Graph& g = *mu.graph();
  const Tensor& M = mu.val();
  const Tensor& L = log_sigma.val();
  require(M.same_shape(L) && M.same_shape(noise), "gaussian_sample",
          "shape mismatch " + M.shape_str() + " / " + L.shape_str() + " / " +
              noise.shape_str());
  Tensor Y(M.rows, M.cols);
  Tensor sn(M.rows, M.cols);  // exp(ls) * noise, reused in backward
  for (int i = 0; i < M.numel(); ++i) {
    sn.v[i] = static_cast<real>(std::exp(static_cast<double>(L.v[i])) *
                                noise.v[i]);
    Y.v[i] = M.v[i] + sn.v[i];
  }
  int mid = mu.id(), lid = log_sigma.id();
  bool rg = g.node_requires_grad(mid) || g.node_requires_grad(lid);
  Graph::BackFn back;
  if (rg) {
    back = [mid, lid, sn = std::move(sn)](Graph& gg, int self) {
      const Tensor& go = gg.grad_buf(self);
      if (gg.node_requires_grad(mid)) {
        Tensor& gm = gg.grad_buf(mid);
        for (int i = 0; i < go.numel(); ++i) gm.v[i] += go.v[i];
      }
      if (gg.node_requires_grad(lid)) {
        Tensor& gl = gg.grad_buf(lid);
        for (int i = 0; i < go.numel(); ++i) gl.v[i] += go.v[i] * sn.v[i];
      }
    };
  }
  return g.make(std::move(Y), rg, std::move(back));
}

Var kl_diag_rows(const Var& mu_q, const Var& ls_q, const Var& mu_p,
                 const Var& ls_p) {
  same_graph(mu_q, ls_q, "kl_diag");
  same_graph(mu_q, mu_p, "kl_diag");
  same_graph(mu_q, ls_p, "kl_diag");
  Graph& g = *mu_q.graph();
  const Tensor& MQ = mu_q.val();
  const Tensor& LQ = ls_q.val();
  const Tensor& MP = mu_p.val();
  const Tensor& LP = ls_p.val();
  require(MQ.same_shape(LQ) && MQ.same_shape(MP) && MQ.same_shape(LP),
          "kl_diag", "shape mismatch");
  Tensor Y(MQ.rows, 1);
  for (int r = 0; r < MQ.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < MQ.cols; ++c) {
      double lq = LQ.at(r, c), lp = LP.at(r, c);
      double dm = MQ.at(r, c) - MP.at(r, c);
      double vq = std::exp(2.0 * lq), vp = std::exp(2.0 * lp);
      s += lp - lq + (vq + dm * dm) / (2.0 * vp) - 0.5;
    }
    Y.v[r] = static_cast<real>(s);
  }
  int qm = mu_q.id(), ql = ls_q.id(), pm = mu_p.id(), pl = ls_p.id();
  bool rg = g.node_requires_grad(qm) || g.node_requires_grad(ql) ||
            g.node_requires_grad(pm) || g.node_requires_grad(pl);
  Graph::BackFn back;
  if (rg) {
    back = [qm, ql, pm, pl](Graph& gg, int self) {
      const Tensor& go = gg.grad_buf(self);
      const Tensor& MQ2 = gg.node_val(qm);
      const Tensor& LQ2 = gg.node_val(ql);
      const Tensor& MP2 = gg.node_val(pm);
      const Tensor& LP2 = gg.node_val(pl);
      bool rqm = gg.node_requires_grad(qm), rql = gg.node_requires_grad(ql);
      bool rpm = gg.node_requires_grad(pm), rpl = gg.node_requires_grad(pl);
      Tensor* gqm = rqm ? &gg.grad_buf(qm) : nullptr;
      Tensor* gql = rql ? &gg.grad_buf(ql) : nullptr;
      Tensor* gpm = rpm ? &gg.grad_buf(pm) : nullptr;
      Tensor* gpl = rpl ? &gg.grad_buf(pl) : nullptr;
      for (int r = 0; r < MQ2.rows; ++r) {
        double w = go.v[r];
        for (int c = 0; c < MQ2.cols; ++c) {
          double lq = LQ2.at(r, c), lp = LP2.at(r, c);
          double dm = MQ2.at(r, c) - MP2.at(r, c);
          double vq = std::exp(2.0 * lq), vp = std::exp(2.0 * lp);
          if (gqm) gqm->at(r, c) += static_cast<real>(w * dm / vp);
          if (gql) gql->at(r, c) += static_cast<real>(w * (vq / vp - 1.0));
          if (gpm) gpm->at(r, c) += static_cast<real>(-w * dm / vp);
          if (gpl)
            gpl->at(r, c) +=
                static_cast<real>(w * (1.0 - (vq + dm * dm) / vp));
        }
      }
    };
  }
  return g.make(std::move(Y), rg, std::move(back));
}

Var kl_categorical_rows(const Var& probs_q, const Var& probs_p, int k) {
  // KL = sum q (log q - log p); composed from primitives. Probabilities must
  // be bounded away from zero by the caller (unimix does this).
  const Tensor& Q = probs_q.val();
  require(Q.same_shape(probs_p.val()), "kl_categorical", "shape mismatch");
  require(k >= 1 && Q.cols % k == 0, "kl_categorical", "bad group size");
  Var lq = log_op(probs_q);
  Var lp = log_op(probs_p);
  return sum_cols(mul(probs_q, sub(lq, lp)));
}

Var cross_entropy_rows(const Var& logits, const Tensor& targets) {
  Graph& g = gof(logits, "cross_entropy");
  const Tensor& X = logits.val();
  require(X.same_shape(targets), "cross_entropy",
          "shape mismatch " + X.shape_str() + " vs targets " +
              targets.shape_str());
  int n = X.cols;
  Tensor Y(X.rows, 1);
  Tensor sm(X.rows, n);
  Tensor tsum(X.rows, 1);
  for (int r = 0; r < X.rows; ++r) {
    double mx = -1e300;
    for (int c = 0; c < n; ++c) mx = std::max(mx, static_cast<double>(X.at(r, c)));
    double z = 0.0;
    for (int c = 0; c < n; ++c) z += std::exp(static_cast<double>(X.at(r, c)) - mx);
    double lse = mx + std::log(z);
    double ts = 0.0, dot = 0.0;
    for (int c = 0; c < n; ++c) {
      sm.at(r, c) = static_cast<real>(
          std::exp(static_cast<double>(X.at(r, c)) - mx) / z);
      ts += targets.at(r, c);
      dot += static_cast<double>(targets.at(r, c)) * X.at(r, c);
    }
    tsum.v[r] = static_cast<real>(ts);
    Y.v[r] = static_cast<real>(ts * lse - dot);
  }
  int aid = logits.id();
  bool rg = g.node_requires_grad(aid);
  Graph::BackFn back;
  if (rg) {
    back = [aid, sm = std::move(sm), tsum = std::move(tsum),
            targets](Graph& gg, int self) {
      const Tensor& go = gg.grad_buf(self);
      Tensor& ga = gg.grad_buf(aid);
      for (int r = 0; r < ga.rows; ++r) {
        real w = go.v[r];
        for (int c = 0; c < ga.cols; ++c)
          ga.at(r, c) += w * (sm.at(r, c) * tsum.v[r] - targets.at(r, c));
      }
    };
  }
  return g.make(std::move(Y), rg, std::move(back));
}

Var bce_logits_rows(const Var& logits, const Tensor& targets) {
  Graph& g = gof(logits, "bce_logits");
  const Tensor& X = logits.val();
  require(X.same_shape(targets), "bce_logits",
          "shape mismatch " + X.shape_str() + " vs targets " +
              targets.shape_str());
  Tensor Y(X.rows, 1);
  for (int r = 0; r < X.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < X.cols; ++c) {
      double x = X.at(r, c), t = targets.at(r, c);
      s += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::fabs(x)));
    }
    Y.v[r] = static_cast<real>(s);
  }
  int aid = logits.id();
  bool rg = g.node_requires_grad(aid);
  Graph::BackFn back;
  if (rg) {
    back = [aid, targets](Graph& gg, int self) {
      const Tensor& go = gg.grad_buf(self);
      const Tensor& X2 = gg.node_val(aid);
      Tensor& ga = gg.grad_buf(aid);
      for (int r = 0; r < ga.rows; ++r) {
        real w = go.v[r];
        for (int c = 0; c < ga.cols; ++c)
          ga.at(r, c) += w * static_cast<real>(sigmoid_d(X2.at(r, c)) -
                                               targets.at(r, c));
      }
    };
  }
  return g.make(std::move(Y), rg, std::move(back));
}

Var stop_gradient(const Var& a) {
  Graph& g = gof(a, "stop_gradient");
  return g.constant(a.val());
}

}  // namespace navrl::diff
