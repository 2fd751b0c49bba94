#include "navrl/baselines/td3.hpp"

#include <cmath>

#include "navrl/common.hpp"
#include "navrl/nets/policy.hpp"

namespace navrl::baselines {

using diff::Binder;
using diff::Graph;
using diff::Var;

Td3Agent::Td3Agent(ParamStore& ps, const MFConfig& cfg, Rng& init_rng,
                   const std::string& prefix)
    : ps_(&ps), cfg_(cfg) {
  cfg_.validate();
  actor_ = add_actor_net(ps, prefix + "/actor", cfg_, 2, init_rng);
  actor_t_ = add_actor_net(ps, prefix + "/actor_t", cfg_, 2, init_rng);
  q1_ = add_critic_net(ps, prefix + "/q1", cfg_, init_rng);
  q2_ = add_critic_net(ps, prefix + "/q2", cfg_, init_rng);
  t1_ = add_critic_net(ps, prefix + "/t1", cfg_, init_rng);
  t2_ = add_critic_net(ps, prefix + "/t2", cfg_, init_rng);
  actor_ids_ = ps.ids_with_prefix(prefix + "/actor/");
  actor_t_ids_ = ps.ids_with_prefix(prefix + "/actor_t/");
  q1_ids_ = ps.ids_with_prefix(prefix + "/q1/");
  q2_ids_ = ps.ids_with_prefix(prefix + "/q2/");
  t1_ids_ = ps.ids_with_prefix(prefix + "/t1/");
  t2_ids_ = ps.ids_with_prefix(prefix + "/t2/");
  critic_ids_ = q1_ids_;
  critic_ids_.insert(critic_ids_.end(), q2_ids_.begin(), q2_ids_.end());
  ps.copy_values(actor_t_ids_, actor_ids_);
  ps.copy_values(t1_ids_, q1_ids_);
  ps.copy_values(t2_ids_, q2_ids_);
}

std::vector<int> Td3Agent::param_ids() const {
  std::vector<int> ids = actor_ids_;
  for (const auto* group :
       {&actor_t_ids_, &critic_ids_, &t1_ids_, &t2_ids_})
    ids.insert(ids.end(), group->begin(), group->end());
  return ids;
}

int64_t Td3Agent::parameter_count() const {
  return ps_->count_parameters(param_ids());
}

std::pair<double, double> Td3Agent::q_values(const std::vector<double>& obs,
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

std::pair<double, double> Td3Agent::act(const std::vector<double>& obs,
                                        bool explore, Rng& rng) const {
  check(static_cast<int>(obs.size()) == cfg_.obs_dim,
        "td3 act: observation dim mismatch");
  Graph g;
  Binder bind(g, *ps_, false);
  Var o = g.constant(
      normalize_obs_rows(obs_row(obs), cfg_.n_beams, cfg_.d_max));
  Var u = nets::mlp_relu(bind, actor_, o);
  auto a = nets::squash_action(u.val().at(0, 0), u.val().at(0, 1));
  if (explore) {
    a.first += cfg_.td3_expl_noise * rng.normal();
    a.second += cfg_.td3_expl_noise * rng.normal();
    a = clamp_box(a);
  }
  return a;
}

MFStats Td3Agent::update(const TransitionBuffer& buf, Rng& rng) {
  MFStats st;
  st.noise_std = cfg_.td3_expl_noise;
  if (warmup_pending(buf, cfg_, "td3", warned_)) return st;
  TransitionBatch b = buf.sample(cfg_.batch, rng);
  const int n = b.obs.rows;
  Tensor obs_n = normalize_obs_rows(b.obs, cfg_.n_beams, cfg_.d_max);
  Tensor next_n = normalize_obs_rows(b.next_obs, cfg_.n_beams, cfg_.d_max);

  // y = r + gamma * (1 - done) * min(Q'1, Q'2)(s', smooth(squash(mu'(s')))).
  Tensor y;
  {
    Graph g;
    Binder bind(g, *ps_, false);
    Var next = g.constant(next_n);
    Tensor a = nets::squash_actions(nets::mlp_relu(bind, actor_t_, next)).val();
    for (int i = 0; i < n; ++i) {
      double e0 = clamp(cfg_.td3_smoothing_std * rng.normal(),
                        -cfg_.td3_smoothing_clip, cfg_.td3_smoothing_clip);
      double e1 = clamp(cfg_.td3_smoothing_std * rng.normal(),
                        -cfg_.td3_smoothing_clip, cfg_.td3_smoothing_clip);
      a.at(i, 0) = clamp(a.at(i, 0) + e0, 0.0, 1.0);
      a.at(i, 1) = clamp(a.at(i, 1) + e1, -1.0, 1.0);
    }
    Var av = g.constant(a);
    Var qmin = diff::min_elem(critic_forward(bind, t1_, next, av),
                              critic_forward(bind, t2_, next, av));
    y = td_target(b.rew, b.done, qmin.val(), cfg_.gamma);
  }

  {
    Graph g;
    Binder bind(g, *ps_, true);
    Var obs = g.constant(obs_n);
    Var act = g.constant(b.act);
    Var target = g.constant(y);
    Var d1 = diff::sub(critic_forward(bind, q1_, obs, act), target);
    Var d2 = diff::sub(critic_forward(bind, q2_, obs, act), target);
    Var loss = diff::scale(diff::add(diff::sum_all(diff::square(d1)),
                                     diff::sum_all(diff::square(d2))),
                           1.0 / n);
    st.critic_loss = loss.val().at(0, 0);
    if (!std::isfinite(st.critic_loss))
      fail("td3 critic update: non-finite loss");
    g.backward(loss);
    diff::AdamConfig acfg;
    acfg.lr = cfg_.td3_lr_critic;
    ps_->adam_step(critic_ids_, acfg);
  }

  ++update_count_;
  if (update_count_ % cfg_.td3_policy_delay == 0) {
    Graph g;
    Binder bind(g, *ps_, true);
    Binder frozen(g, *ps_, false);
    Var obs = g.constant(obs_n);
    Var a = nets::squash_actions(nets::mlp_relu(bind, actor_, obs));
    Var q = critic_forward(frozen, q1_, obs, a);
    Var loss = diff::scale(diff::sum_all(q), -1.0 / n);
    st.actor_loss = loss.val().at(0, 0);
    for (int i = 0; i < n; ++i) st.q_mean += q.val().at(i, 0) / n;
    if (!std::isfinite(st.actor_loss)) fail("td3 actor update: non-finite loss");
    g.backward(loss);
    diff::AdamConfig acfg;
    acfg.lr = cfg_.td3_lr_actor;
    ps_->adam_step(actor_ids_, acfg);

    ps_->soft_update(actor_t_ids_, actor_ids_, cfg_.td3_tau);
    ps_->soft_update(t1_ids_, q1_ids_, cfg_.td3_tau);
    ps_->soft_update(t2_ids_, q2_ids_, cfg_.td3_tau);
    st.actor_updated = true;
  }
  st.updated = true;
  return st;
}

}  // namespace navrl::baselines
