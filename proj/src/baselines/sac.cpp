#include "navrl/baselines/sac.hpp"

#include <cmath>

#include "navrl/common.hpp"
#include "navrl/nets/policy.hpp"

namespace navrl::baselines {

using diff::Binder;
using diff::Graph;
using diff::Var;

SacAgent::SacAgent(ParamStore& ps, const MFConfig& cfg, Rng& init_rng,
                   const std::string& prefix)
    : ps_(&ps), cfg_(cfg) {
  cfg_.validate();
  actor_ = add_actor_net(ps, prefix + "/actor", cfg_, 4, init_rng);
  q1_ = add_critic_net(ps, prefix + "/q1", cfg_, init_rng);
  q2_ = add_critic_net(ps, prefix + "/q2", cfg_, init_rng);
  t1_ = add_critic_net(ps, prefix + "/t1", cfg_, init_rng);
  t2_ = add_critic_net(ps, prefix + "/t2", cfg_, init_rng);
  actor_ids_ = ps.ids_with_prefix(prefix + "/actor/");
  q1_ids_ = ps.ids_with_prefix(prefix + "/q1/");
  q2_ids_ = ps.ids_with_prefix(prefix + "/q2/");
  t1_ids_ = ps.ids_with_prefix(prefix + "/t1/");
  t2_ids_ = ps.ids_with_prefix(prefix + "/t2/");
  critic_ids_ = q1_ids_;
  critic_ids_.insert(critic_ids_.end(), q2_ids_.begin(), q2_ids_.end());
  ps.copy_values(t1_ids_, q1_ids_);
  ps.copy_values(t2_ids_, q2_ids_);
}

std::vector<int> SacAgent::param_ids() const {
  std::vector<int> ids = actor_ids_;
  for (const auto* group : {&critic_ids_, &t1_ids_, &t2_ids_})
    ids.insert(ids.end(), group->begin(), group->end());
  return ids;
}

int64_t SacAgent::parameter_count() const {
  return ps_->count_parameters(param_ids());
}

std::pair<Var, Var> SacAgent::actor_dist(Binder& bind, Var obs) const {
  Var out = nets::mlp_relu(bind, actor_, obs);
  Var mu = diff::slice_cols(out, 0, 2);
  Var ls = diff::clamp_op(diff::slice_cols(out, 2, 2), cfg_.log_std_lo,
                          cfg_.log_std_hi);
  return {mu, ls};
}

std::pair<double, double> SacAgent::q_values(const std::vector<double>& obs,
                                             std::pair<double, double> a) const {
  Graph g;
  Binder bind(g, *ps_, false);
  Var o = g.constant(
      normalize_obs_rows(obs_row(obs), cfg_.n_beams, cfg_.d_max));
  Tensor at(1, 2);
  at.at(0, 0) = a.first;
  at.at(0, 1) = a.second;
  Var av = g.constant(at);
  return {critic_forward(bind, q1_, o, av).val().at(0, 0),
          critic_forward(bind, q2_, o, av).val().at(0, 0)};
}

std::pair<double, double> SacAgent::act(const std::vector<double>& obs,
                                        bool explore, Rng& rng) const {
  check(static_cast<int>(obs.size()) == cfg_.obs_dim,
        "sac act: observation dim mismatch");
  Graph g;
  Binder bind(g, *ps_, false);
  Var o = g.constant(
      normalize_obs_rows(obs_row(obs), cfg_.n_beams, cfg_.d_max));
  auto [mu, ls] = actor_dist(bind, o);
  double u0 = mu.val().at(0, 0), u1 = mu.val().at(0, 1);
  if (explore) {
    u0 += std::exp(ls.val().at(0, 0)) * rng.normal();
    u1 += std::exp(ls.val().at(0, 1)) * rng.normal();
  }
  return nets::squash_action(u0, u1);
}

MFStats SacAgent::update(const TransitionBuffer& buf, Rng& rng) {
  MFStats st;
  if (warmup_pending(buf, cfg_, "sac", warned_)) return st;
  TransitionBatch b = buf.sample(cfg_.batch, rng);
  const int n = b.obs.rows;
  Tensor obs_n = normalize_obs_rows(b.obs, cfg_.n_beams, cfg_.d_max);
  Tensor next_n = normalize_obs_rows(b.next_obs, cfg_.n_beams, cfg_.d_max);

  // Target: y = scale * r + gamma * (1 - done) * (min Q'(s', a') - alpha * logp').
  Tensor y;
  {
    Graph g;
    Binder bind(g, *ps_, false);
    Var next = g.constant(next_n);
    auto [mu, ls] = actor_dist(bind, next);
    Tensor noise(n, 2);
    for (auto& x : noise.v) x = rng.normal();
    Var u = diff::gaussian_sample(mu, ls, noise);
    Var a = nets::squash_actions(u);
    Var logp = nets::tanh_gauss_logp(mu, ls, u);
    Var qmin = diff::min_elem(critic_forward(bind, t1_, next, a),
                              critic_forward(bind, t2_, next, a));
    Var soft = diff::sub(qmin, diff::scale(logp, cfg_.sac_alpha));
    y = td_target(b.rew, b.done, soft.val(), cfg_.gamma,
                  cfg_.sac_reward_scale);
    for (int i = 0; i < n; ++i) st.logp_mean += logp.val().at(i, 0) / n;
  }

  {
    Graph g;
    Binder bind(g, *ps_, true);
    Var obs = g.constant(obs_n);
    Var act = g.constant(b.act);
    Var target = g.constant(y);
    Var d1 = diff::sub(critic_forward(bind, q1_, obs, act), target);
    Var d2 = diff::sub(critic_forward(bind, q2_, obs, act), target);
    Var loss = diff::scale(
        diff::add(diff::sum_all(diff::square(d1)),
                  diff::sum_all(diff::square(d2))),
        1.0 / n);
    st.critic_loss = loss.val().at(0, 0);
    if (!std::isfinite(st.critic_loss)) fail("sac critic update: non-finite loss");
    g.backward(loss);
    diff::AdamConfig acfg;
    acfg.lr = cfg_.sac_lr_critic;
    ps_->adam_step(critic_ids_, acfg);
  }

  {
    Graph g;
    Binder bind(g, *ps_, true);
    Binder frozen(g, *ps_, false);
    Var obs = g.constant(obs_n);
    auto [mu, ls] = actor_dist(bind, obs);
    Tensor noise(n, 2);
    for (auto& x : noise.v) x = rng.normal();
    Var u = diff::gaussian_sample(mu, ls, noise);
    Var a = nets::squash_actions(u);
    Var logp = nets::tanh_gauss_logp(mu, ls, u);
    Var qpi = diff::min_elem(critic_forward(frozen, q1_, obs, a),
                             critic_forward(frozen, q2_, obs, a));
    Var loss = diff::scale(
        diff::sum_all(diff::sub(diff::scale(logp, cfg_.sac_alpha), qpi)),
        1.0 / n);
    st.actor_loss = loss.val().at(0, 0);
    for (int i = 0; i < n; ++i) st.q_mean += qpi.val().at(i, 0) / n;
    if (!std::isfinite(st.actor_loss)) fail("sac actor update: non-finite loss");
    g.backward(loss);
    diff::AdamConfig acfg;
    acfg.lr = cfg_.sac_lr_actor;
    ps_->adam_step(actor_ids_, acfg);
  }

  ps_->soft_update(t1_ids_, q1_ids_, cfg_.sac_tau);
  ps_->soft_update(t2_ids_, q2_ids_, cfg_.sac_tau);
  st.updated = true;
  st.actor_updated = true;
  return st;
}

}  // namespace navrl::baselines
