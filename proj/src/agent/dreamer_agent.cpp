#include "navrl/agent/dreamer_agent.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "navrl/common.hpp"
#include "navrl/nets/policy.hpp"

namespace navrl::agent {

using diff::Binder;
using diff::Graph;
using diff::Var;
using nets::Init;

std::vector<Tensor> lambda_returns(const std::vector<Tensor>& rewards,
                                   const std::vector<Tensor>& values,
                                   const std::vector<Tensor>& continues,
                                   double gamma, double lambda) {
  const size_t H = rewards.size();
  check(H >= 1, "lambda_returns: need at least one step");
  check(continues.size() == H && values.size() == H + 1,
        "lambda_returns: length mismatch (rewards H, continues H, values H+1)");
  const int n = rewards[0].rows;
  for (size_t t = 0; t < H; ++t)
    check(rewards[t].rows == n && rewards[t].cols == 1 &&
              continues[t].rows == n && continues[t].cols == 1 &&
              values[t].rows == n && values[t].cols == 1,
          "lambda_returns: entries must be [n,1]");
  check(values[H].rows == n && values[H].cols == 1,
        "lambda_returns: entries must be [n,1]");

  std::vector<Tensor> out(H);
  Tensor next = values[H];
  for (size_t ti = H; ti-- > 0;) {
    Tensor r(n, 1);
    for (int i = 0; i < n; ++i)
      r.at(i, 0) = rewards[ti].at(i, 0) +
                   gamma * continues[ti].at(i, 0) *
                       ((1.0 - lambda) * values[ti + 1].at(i, 0) +
                        lambda * next.at(i, 0));
    out[ti] = r;
    next = out[ti];
  }
  return out;
}

double percentile(std::vector<double> xs, double q) {
  check(!xs.empty(), "percentile: empty sample");
  check(q >= 0.0 && q <= 1.0, "percentile: q outside [0,1]");
  std::sort(xs.begin(), xs.end());
  double pos = q * (xs.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  double frac = pos - lo;
  if (lo + 1 >= xs.size()) return xs.back();
  return xs[lo] * (1.0 - frac) + xs[lo + 1] * frac;
}

void ReturnNorm::update(const std::vector<double>& returns) {
  check(!returns.empty(), "return norm: empty batch");
  double new_lo = percentile(returns, p_lo);
  double new_hi = percentile(returns, p_hi);
  if (!initialized) {
    lo = new_lo;
    hi = new_hi;
    initialized = true;
  } else {
    lo = decay * lo + (1.0 - decay) * new_lo;
    hi = decay * hi + (1.0 - decay) * new_hi;
  }
}

void AgentConfig::validate() const {
  check(feat_dim > 0, "agent config: feat_dim must be positive");
  check(gamma > 0.0 && gamma <= 1.0, "agent config: gamma must be in (0,1]");
  check(lam >= 0.0 && lam <= 1.0, "agent config: lambda must be in [0,1]");
  check(horizon >= 1, "agent config: horizon must be >= 1");
  check(min_std > 0.0 && max_std >= min_std, "agent config: bad std bounds");
  check(bins >= 2, "agent config: need at least 2 bins");
}

DreamerAgent::DreamerAgent(ParamStore& ps, const AgentConfig& cfg,
                           Rng& init_rng, const std::string& prefix)
    : ps_(&ps), cfg_(cfg) {
  cfg_.validate();
  grid_ = BinGrid::make(cfg.bins, cfg.bin_lo, cfg.bin_hi);
  norm_.p_lo = cfg.p_lo;
  norm_.p_hi = cfg.p_hi;
  norm_.decay = cfg.norm_decay;

  actor_ = nets::add_block_mlp(ps, prefix + "/actor", cfg.feat_dim, cfg.width,
                               cfg.layers, 4, Init::xavier_uniform, Init::zero,
                               init_rng);
  critic_ = nets::add_block_mlp(ps, prefix + "/critic", cfg.feat_dim,
                                cfg.width, cfg.layers, cfg.bins, Init::zero,
                                Init::zero, init_rng);
  critic_ema_ = nets::add_block_mlp(ps, prefix + "/critic_ema", cfg.feat_dim,
                                    cfg.width, cfg.layers, cfg.bins,
                                    Init::zero, Init::zero, init_rng);
  actor_ids_ = ps.ids_with_prefix(prefix + "/actor/");
  critic_ids_ = ps.ids_with_prefix(prefix + "/critic/");
  ema_ids_ = ps.ids_with_prefix(prefix + "/critic_ema/");
  ps.copy_values(ema_ids_, critic_ids_);
}

std::vector<int> DreamerAgent::param_ids() const {
  std::vector<int> ids = actor_ids_;
  ids.insert(ids.end(), critic_ids_.begin(), critic_ids_.end());
  ids.insert(ids.end(), ema_ids_.begin(), ema_ids_.end());
  return ids;
}

std::pair<Var, Var> DreamerAgent::actor_dist(Binder& bind, Var feats) const {
  Var out = nets::block_mlp(bind, actor_, feats);
  Var mu = diff::slice_cols(out, 0, 2);
  Var ls = nets::bounded_log_std(diff::slice_cols(out, 2, 2), cfg_.min_std,
                                 cfg_.max_std);
  return {mu, ls};
}

std::pair<Tensor, Tensor> DreamerAgent::actor_params(const Tensor& feats) const {
  check(feats.cols == cfg_.feat_dim, "actor: feature dim mismatch");
  Graph g;
  Binder bind(g, *ps_, false);
  auto [mu, ls] = actor_dist(bind, g.constant(feats));
  return {mu.val(), ls.val()};
}

Tensor DreamerAgent::sample_pre_tanh(const Tensor& feats, Rng& rng) const {
  auto [mu, ls] = actor_params(feats);
  Tensor u = mu;
  for (size_t i = 0; i < u.v.size(); ++i)
    u.v[i] += std::exp(ls.v[i]) * rng.normal();
  return u;
}

wm::PolicyFn DreamerAgent::policy() const {
  return [this](const Tensor& feats, Rng& rng) {
    return sample_pre_tanh(feats, rng);
  };
}

Tensor DreamerAgent::values(const Tensor& feats) const {
  check(feats.cols == cfg_.feat_dim, "critic: feature dim mismatch");
  Graph g;
  Binder bind(g, *ps_, false);
  Var logits = nets::block_mlp(bind, critic_, g.constant(feats));
  return grid_.decode(logits.val());
}

AgentStats DreamerAgent::update(const wm::ImaginedTrajectory& traj) {
  const int H = traj.horizon, n = traj.n;
  check(H >= 1 && n >= 1, "agent update: empty trajectory");
  check(traj.feat_dim == cfg_.feat_dim, "agent update: feature dim mismatch");
  AgentStats st;

  // Stack all H+1 feature rows, compute pre-update values in one pass.
  Tensor feats_all(n * (H + 1), cfg_.feat_dim);
  for (int t = 0; t <= H; ++t)
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < cfg_.feat_dim; ++c)
        feats_all.at(t * n + i, c) = traj.feats[t].at(i, c);
  Tensor values_all = values(feats_all);

  std::vector<Tensor> vals(H + 1);
  for (int t = 0; t <= H; ++t) {
    vals[t] = Tensor(n, 1);
    for (int i = 0; i < n; ++i) vals[t].at(i, 0) = values_all.at(t * n + i, 0);
  }
  std::vector<Tensor> rets =
      lambda_returns(traj.rewards, vals, traj.continues, cfg_.gamma, cfg_.lam);

  // Trajectory weights: product of predicted continues, first state weight 1.
  std::vector<Tensor> weights(H);
  weights[0] = Tensor::full(n, 1, 1.0);
  for (int t = 1; t < H; ++t) {
    weights[t] = Tensor(n, 1);
    for (int i = 0; i < n; ++i)
      weights[t].at(i, 0) =
          weights[t - 1].at(i, 0) * traj.continues[t - 1].at(i, 0);
  }

  std::vector<double> flat_returns;
  flat_returns.reserve(static_cast<size_t>(n) * H);
  for (int t = 0; t < H; ++t)
    for (int i = 0; i < n; ++i) flat_returns.push_back(rets[t].at(i, 0));
  norm_.update(flat_returns);
  const double scale = norm_.scale();
  st.return_lo = norm_.lo;
  st.return_hi = norm_.hi;
  st.return_scale = scale;

  // Flat [n*H] stacks for the two loss graphs (step-major, like feats_all).
  const int m = n * H;
  Tensor feats_stack(m, cfg_.feat_dim);
  Tensor u_stack(m, 2);
  Tensor ret_stack(m, 1), adv_stack(m, 1), w_stack(m, 1);
  for (int t = 0; t < H; ++t)
    for (int i = 0; i < n; ++i) {
      int r = t * n + i;
      for (int c = 0; c < cfg_.feat_dim; ++c)
        feats_stack.at(r, c) = traj.feats[t].at(i, c);
      u_stack.at(r, 0) = traj.pre_tanh[t].at(i, 0);
      u_stack.at(r, 1) = traj.pre_tanh[t].at(i, 1);
      ret_stack.at(r, 0) = rets[t].at(i, 0);
      adv_stack.at(r, 0) = (rets[t].at(i, 0) - vals[t].at(i, 0)) / scale;
      w_stack.at(r, 0) = weights[t].at(i, 0);
      st.value_mean += vals[t].at(i, 0);
      st.return_mean += rets[t].at(i, 0);
    }
  st.value_mean /= m;
  st.return_mean /= m;

  diff::AdamConfig acfg;
  acfg.eps = cfg_.adam_eps;
  acfg.grad_clip = cfg_.grad_clip;

  {  // Critic: two-hot CE toward lambda-returns + EMA self-regularizer.
    Graph g;
    Binder bind(g, *ps_, true);
    Var feats = g.constant(feats_stack);
    Var logits = nets::block_mlp(bind, critic_, feats);
    Var ce = diff::cross_entropy_rows(logits, grid_.twohot(ret_stack));

    Binder ema_bind(g, *ps_, false);
    Var ema_logits = nets::block_mlp(ema_bind, critic_ema_, feats);
    Tensor ema_probs = diff::softmax_rows(ema_logits).val();
    Var reg = diff::cross_entropy_rows(logits, ema_probs);

    Var per_row = diff::add(ce, diff::scale(reg, cfg_.critic_ema_scale));
    Var loss = diff::scale(diff::sum_all(diff::mul(per_row, g.constant(w_stack))),
                           1.0 / m);
    st.critic_loss = loss.val().at(0, 0);
    if (!std::isfinite(st.critic_loss))
      fail("dreamer critic update: non-finite loss");
    g.backward(loss);
    st.critic_grad_norm = ps_->grad_norm(critic_ids_);
    if (!std::isfinite(st.critic_grad_norm))
      fail("dreamer critic update: non-finite gradient norm");
    acfg.lr = cfg_.critic_lr;
    ps_->adam_step(critic_ids_, acfg);
    ps_->soft_update(ema_ids_, critic_ids_, 1.0 - cfg_.critic_ema_decay);
  }

  {  // Actor: reinforce on normalized advantages plus entropy bonus.
    Graph g;
    Binder bind(g, *ps_, true);
    auto [mu, ls] = actor_dist(bind, g.constant(feats_stack));
    Var logp = nets::tanh_gauss_logp(mu, ls, g.constant(u_stack));
    Var ent = nets::gauss_entropy_rows(ls);
    Var obj = diff::add(diff::mul(logp, g.constant(adv_stack)),
                        diff::scale(ent, cfg_.entropy_scale));
    Var loss = diff::scale(diff::sum_all(diff::mul(obj, g.constant(w_stack))),
                           -1.0 / m);
    st.actor_loss = loss.val().at(0, 0);
    st.entropy = 0.0;
    for (int r = 0; r < m; ++r) st.entropy += ent.val().at(r, 0);
    st.entropy /= m;
    if (!std::isfinite(st.actor_loss))
      fail("dreamer actor update: non-finite loss");
    g.backward(loss);
    st.actor_grad_norm = ps_->grad_norm(actor_ids_);
    if (!std::isfinite(st.actor_grad_norm))
      fail("dreamer actor update: non-finite gradient norm");
    acfg.lr = cfg_.actor_lr;
    ps_->adam_step(actor_ids_, acfg);
  }
  return st;
}

std::pair<double, double> DreamerAgent::act(const wm::WorldModel& model,
                                            const std::vector<double>& obs,
                                            LatentState& state,
                                            std::pair<double, double> prev_action,
                                            bool episode_start, bool explore,
                                            Rng& rng) const {
  check(static_cast<int>(obs.size()) == model.config().obs_dim,
        "act: observation dim mismatch");
  if (episode_start) {
    state = model.initial_state(1);
  } else {
    Tensor a(1, 2);
    a.at(0, 0) = prev_action.first;
    a.at(0, 1) = prev_action.second;
    auto d = model.dynamics_step(state, a);
    state.h = d.h;
    state.c = d.c;
  }
  Tensor o(1, static_cast<int>(obs.size()));
  for (size_t i = 0; i < obs.size(); ++i) o.at(0, static_cast<int>(i)) = obs[i];
  state.z = model.posterior_sample(o, state.h, rng, explore);

  auto [mu, ls] = actor_params(wm::WorldModel::features(state));
  double u0 = mu.at(0, 0), u1 = mu.at(0, 1);
  if (explore) {
    u0 += std::exp(ls.at(0, 0)) * rng.normal();
    u1 += std::exp(ls.at(0, 1)) * rng.normal();
  }
  return nets::squash_action(u0, u1);
}

}  // namespace navrl::agent
