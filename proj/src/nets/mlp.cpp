#include "navrl/nets/mlp.hpp"

#include <cmath>

namespace navrl::nets {

Tensor init_matrix(int rows, int cols, Init kind, Rng& rng) {
  Tensor t(rows, cols);
  double bound = 0.0;
  switch (kind) {
    case Init::fanin_uniform: bound = 1.0 / std::sqrt(rows); break;
    case Init::xavier_uniform: bound = std::sqrt(6.0 / (rows + cols)); break;
    case Init::small_uniform: bound = 3e-3; break;
    case Init::zero: return t;
  }
  for (auto& e : t.v) e = static_cast<real>(rng.uniform(-bound, bound));
  return t;
}

LinearIds add_linear(ParamStore& ps, const std::string& prefix, int in,
                     int out, Init w_init, Init b_init, Rng& rng) {
  LinearIds ids;
  ids.w = ps.add(prefix + "/w", init_matrix(in, out, w_init, rng));
  Tensor b(1, out);
  if (b_init != Init::zero) {
    // Bias bounds follow the weight fan-in, matching the weight scheme.
    double bound = b_init == Init::small_uniform ? 3e-3 : 1.0 / std::sqrt(in);
    for (auto& e : b.v) e = static_cast<real>(rng.uniform(-bound, bound));
  }
  ids.b = ps.add(prefix + "/b", std::move(b));
  return ids;
}

Var linear(Binder& bind, const LinearIds& ids, const Var& x) {
  return diff::add(diff::matmul(x, bind(ids.w)), bind(ids.b));
}

NormIds add_norm(ParamStore& ps, const std::string& prefix, int dim) {
  NormIds ids;
  ids.gain = ps.add(prefix + "/ln_g", Tensor::full(1, dim, real(1)));
  ids.bias = ps.add(prefix + "/ln_b", Tensor(1, dim));
  return ids;
}

MlpIds add_mlp(ParamStore& ps, const std::string& prefix,
               const std::vector<int>& dims, Init hidden_init, Init out_w,
               Init out_b, Rng& rng) {
  check(dims.size() >= 2, "mlp: need input and output dims");
  MlpIds ids;
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    bool last = i + 2 == dims.size();
    ids.layers.push_back(add_linear(
        ps, prefix + "/l" + std::to_string(i), dims[i], dims[i + 1],
        last ? out_w : hidden_init, last ? out_b : hidden_init, rng));
  }
  return ids;
}

Var mlp_relu(Binder& bind, const MlpIds& ids, Var x) {
  for (size_t i = 0; i < ids.layers.size(); ++i) {
    x = linear(bind, ids.layers[i], x);
    if (i + 1 < ids.layers.size()) x = diff::relu(x);
  }
  return x;
}

BlockMlpIds add_block_mlp(ParamStore& ps, const std::string& prefix, int in,
                          int width, int depth, int out, Init out_w,
                          Init out_b, Rng& rng) {
  check(depth >= 1, "block mlp: depth must be >= 1");
  BlockMlpIds ids;
  int d = in;
  for (int i = 0; i < depth; ++i) {
    std::string lp = prefix + "/l" + std::to_string(i);
    ids.layers.push_back(
        add_linear(ps, lp, d, width, Init::xavier_uniform, Init::zero, rng));
    ids.norms.push_back(add_norm(ps, lp, width));
    d = width;
  }
  ids.out = add_linear(ps, prefix + "/out", d, out, out_w, out_b, rng);
  return ids;
}

Var block_mlp(Binder& bind, const BlockMlpIds& ids, Var x, double ln_eps) {
  for (size_t i = 0; i < ids.layers.size(); ++i) {
    x = linear(bind, ids.layers[i], x);
    x = diff::layer_norm_rows(x, bind(ids.norms[i].gain),
                              bind(ids.norms[i].bias), ln_eps);
    x = diff::silu(x);
  }
  return linear(bind, ids.out, x);
}

}  // namespace navrl::nets
