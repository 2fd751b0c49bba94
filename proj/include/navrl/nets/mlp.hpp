#pragma once

#include <string>
#include <vector>

#include "navrl/diff/params.hpp"
#include "navrl/rng.hpp"

namespace navrl::nets {

using diff::Binder;
using diff::ParamStore;
using diff::Tensor;
using diff::Var;

enum class Init {
  fanin_uniform,   // U(+-1/sqrt(fan_in))
  xavier_uniform,  // U(+-sqrt(6/(fan_in+fan_out)))
  small_uniform,   // U(+-3e-3), final layers of DDPG-family nets
  zero,
};

Tensor init_matrix(int rows, int cols, Init kind, Rng& rng);

struct LinearIds {
  int w = -1, b = -1;
};

LinearIds add_linear(ParamStore& ps, const std::string& prefix, int in,
                     int out, Init w_init, Init b_init, Rng& rng);
Var linear(Binder& bind, const LinearIds& ids, const Var& x);

struct NormIds {
  int gain = -1, bias = -1;
};

NormIds add_norm(ParamStore& ps, const std::string& prefix, int dim);

// Plain MLP, ReLU hidden activations, linear output. dims includes input and
// output sizes, e.g. {14, 400, 300, 4}.
struct MlpIds {
  std::vector<LinearIds> layers;
};

MlpIds add_mlp(ParamStore& ps, const std::string& prefix,
               const std::vector<int>& dims, Init hidden_init, Init out_w,
               Init out_b, Rng& rng);
Var mlp_relu(Binder& bind, const MlpIds& ids, Var x);

// Linear -> LayerNorm -> SiLU blocks with a linear output layer, used by the
// world model and dreamer heads.
struct BlockMlpIds {
  std::vector<LinearIds> layers;
  std::vector<NormIds> norms;
  LinearIds out;
};

BlockMlpIds add_block_mlp(ParamStore& ps, const std::string& prefix, int in,
                          int width, int depth, int out, Init out_w,
                          Init out_b, Rng& rng);
Var block_mlp(Binder& bind, const BlockMlpIds& ids, Var x,
              double ln_eps = 1e-5);

}  // namespace navrl::nets
