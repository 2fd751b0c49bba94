#include "navrl/nets/lstm.hpp"

namespace navrl::nets {

LstmIds add_lstm(ParamStore& ps, const std::string& prefix, int input,
                 int hidden, Rng& rng) {
  LstmIds ids;
  ids.input = input;
  ids.hidden = hidden;
  ids.w = ps.add(prefix + "/w", init_matrix(input + hidden, 4 * hidden,
                                            Init::xavier_uniform, rng));
  Tensor b(1, 4 * hidden);
  for (int j = hidden; j < 2 * hidden; ++j) b.v[j] = real(1);
  ids.b = ps.add(prefix + "/b", std::move(b));
  return ids;
}

std::pair<Var, Var> lstm_cell(Binder& bind, const LstmIds& ids, const Var& x,
                              const Var& h, const Var& c) {
  using namespace diff;
  check(x.cols() == ids.input, "lstm: input width " + std::to_string(x.cols()) +
                                   " vs " + std::to_string(ids.input));
  check(h.cols() == ids.hidden && c.cols() == ids.hidden,
        "lstm: state width mismatch");
  int H = ids.hidden;
  Var z = add(matmul(concat_cols({x, h}), bind(ids.w)), bind(ids.b));
  Var gi = sigmoid(slice_cols(z, 0, H));
  Var gf = sigmoid(slice_cols(z, H, H));
  Var gc = tanh_op(slice_cols(z, 2 * H, H));
  Var go = sigmoid(slice_cols(z, 3 * H, H));
  Var c_next = add(mul(gf, c), mul(gi, gc));
  Var h_next = mul(go, tanh_op(c_next));
  return {h_next, c_next};
}

}  // namespace navrl::nets
