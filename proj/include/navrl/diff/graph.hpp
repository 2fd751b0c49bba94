#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "navrl/diff/tensor.hpp"

namespace navrl::diff {

class Graph;

// Lightweight handle into a Graph node. Valid while the graph is alive and not
// cleared.
class Var {
 public:
  Var() = default;
  bool defined() const { return g_ != nullptr; }
  Graph* graph() const { return g_; }
  int id() const { return id_; }
  const Tensor& val() const;
  const Tensor& grad() const;  // zeros if the node never received gradient
  int rows() const { return val().rows; }
  int cols() const { return val().cols; }

 private:
  friend class Graph;
  Var(Graph* g, int id) : g_(g), id_(id) {}
  Graph* g_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. Nodes are appended in creation order; backward() walks the
// tape once in reverse, so every node's gradient is complete before its own
// backward hook fires. One backward per graph lifetime (or per clear()).
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor t) { return make(std::move(t), false, {}); }

  // Differentiable leaf; its gradient is readable via Var::grad() afterwards.
  Var input(Tensor t) { return make(std::move(t), true, {}); }

  // Leaf whose gradient is forwarded to an external sink during backward
  // (parameter stores hook in through this).
  Var hooked_leaf(Tensor t, std::function<void(const Tensor&)> sink);

  void backward(const Var& loss);
  void clear();
  size_t size() const { return nodes_.size(); }

  // Node plumbing for op implementations.
  using BackFn = std::function<void(Graph&, int)>;
  Var make(Tensor val, bool requires_grad, BackFn back);
  const Tensor& node_val(int id) const { return nodes_[id].val; }
  bool grad_touched(int id) const { return !nodes_[id].grad.v.empty(); }
  // Gradient buffer, allocated to zeros on first access. The reference is
  // invalidated by node creation; backward creates no nodes.
  Tensor& grad_buf(int id);
  bool node_requires_grad(int id) const { return nodes_[id].requires_grad; }

 private:
  struct Node {
    Tensor val;
    Tensor grad;
    bool requires_grad = false;
    BackFn back;
  };
  std::vector<Node> nodes_;
  bool backward_done_ = false;

  friend class Var;
};

// ---- ops ----
// All ops validate shapes and graph identity, and name themselves in errors.
// Binary add/sub/mul accept b with the same shape as a, or broadcast shapes
// [1,n], [m,1], [1,1].

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);
Var neg(const Var& a);

Var relu(const Var& a);
Var tanh_op(const Var& a);
Var sigmoid(const Var& a);
Var silu(const Var& a);
Var exp_op(const Var& a);
Var log_op(const Var& a);  // rejects non-positive inputs
Var square(const Var& a);
Var softplus(const Var& a);
Var clamp_op(const Var& a, double lo, double hi);
Var clamp_min(const Var& a, double lo);
Var min_elem(const Var& a, const Var& b);  // same shape; ties route grad to a
Var abs_op(const Var& a);

Var softmax_rows(const Var& a);
// Softmax applied independently to each contiguous block of k columns.
Var softmax_groups(const Var& a, int k);
Var layer_norm_rows(const Var& x, const Var& gain, const Var& bias, double eps);

Var concat_cols(const std::vector<Var>& parts);
Var slice_cols(const Var& a, int start, int len);

Var sum_all(const Var& a);   // [1,1]
Var mean_all(const Var& a);  // [1,1]
Var sum_cols(const Var& a);  // [m,1], sums each row

Var symlog_op(const Var& a);
Var symexp_op(const Var& a);

// mu + exp(log_sigma) * noise, reparameterized. noise is plain data.
Var gaussian_sample(const Var& mu, const Var& log_sigma, const Tensor& noise);

// Row-wise KL(q || p) between diagonal Gaussians parameterized by mean and
// log-sigma; returns [m,1]. Wrap arguments in stop_gradient for the balanced
// variants.
Var kl_diag_rows(const Var& mu_q, const Var& ls_q, const Var& mu_p,
                 const Var& ls_p);

// Row-wise categorical KL(q || p) from probabilities, grouped in blocks of k
// columns; returns [m,1]. Probabilities must be strictly positive (use unimix).
Var kl_categorical_rows(const Var& probs_q, const Var& probs_p, int k);

// Row-wise cross-entropy between logits and fixed target probabilities,
// returns [m,1]. All-zero target rows yield exactly zero (used for padding).
Var cross_entropy_rows(const Var& logits, const Tensor& targets);

// Row-summed binary cross-entropy from logits against fixed targets, [m,1].
Var bce_logits_rows(const Var& logits, const Tensor& targets);

Var stop_gradient(const Var& a);

}  // namespace navrl::diff
