#pragma once

#include <string>
#include <utility>

#include "navrl/nets/mlp.hpp"

namespace navrl::nets {

// Single fused-weight LSTM cell. W is [(input+hidden) x 4*hidden], gate order
// [input, forget, cell, output]; forget-gate bias initialized to 1.
struct LstmIds {
  int w = -1, b = -1;
  int input = 0, hidden = 0;
};

LstmIds add_lstm(ParamStore& ps, const std::string& prefix, int input,
                 int hidden, Rng& rng);

// (h', c') from (x, h, c).
std::pair<Var, Var> lstm_cell(Binder& bind, const LstmIds& ids, const Var& x,
                              const Var& h, const Var& c);

}  // namespace navrl::nets
