#include "navrl/baselines/ddpg.hpp"

#include <cmath>

#include "navrl/common.hpp"
#include "navrl/nets/policy.hpp"

namespace navrl::baselines {

using diff::Binder;
using diff::Graph;
using diff::Var;

DdpgAgent::DdpgAgent(ParamStore& ps, const MFConfig& cfg, Rng& init_rng,
                     const std::string& prefix)
    : ps_(&ps), cfg_(cfg) {
  cfg_.validate();
  actor_ = add_actor_net(ps, prefix + "/actor", cfg_, 2, init_rng);
  actor_t_ = add_actor_net(ps, prefix + "/actor_t", cfg_, 2, init_rng);
  critic_ = add_critic_net(ps, prefix + "/critic", cfg_, init_rng);
  critic_t_ = add_critic_net(ps, prefix + "/critic_t", cfg_, init_rng);
  actor_ids_ = ps.ids_with_prefix(prefix + "/actor/");
  actor_t_ids_ = ps.ids_with_prefix(prefix + "/actor_t/");
  critic_ids_ = ps.ids_with_prefix(prefix + "/critic/");
  critic_t_ids_ = ps.ids_with_prefix(prefix + "/critic_t/");
  ps.copy_values(actor_t_ids_, actor_ids_);
  ps.copy_values(critic_t_ids_, critic_ids_);
}

std::vector<int> DdpgAgent::param_ids() const {
  std::vector<int> ids = actor_ids_;
  for (const auto* group : {&actor_t_ids_, &critic_ids_, &critic_t_ids_})
    ids.insert(ids.end(), group->begin(), group->end());
  return ids;
}

int64_t DdpgAgent::parameter_count() const {
  return ps_->count_parameters(param_ids());
}

double DdpgAgent::exploration_std() const {
  double frac = cfg_.ddpg_noise_decay_steps <= 0
                    ? 1.0
                    : std::min(1.0, static_cast<double>(explore_steps_) /
                                        cfg_.ddpg_noise_decay_steps);
  return cfg_.ddpg_noise_start -
         (cfg_.ddpg_noise_start - cfg_.ddpg_noise_end) * frac;
}

double DdpgAgent::q_value(const std::vector<double>& obs,
                          std::pair<double, double> a) const {
  Graph g;
  Binder bind(g, *ps_, false);
  Var o = g.constant(
      normalize_obs_rows(obs_row(obs), cfg_.n_beams, cfg_.d_max));
  Tensor at(1, 2);
  at.at(0, 0) = a.first;
  at.at(0, 1) = a.second;
  return critic_forward(bind, critic_, o, g.constant(at)).val().at(0, 0);
}

std::pair<double, double> DdpgAgent::act(const std::vector<double>& obs,
                                         bool explore, Rng& rng) {
  check(static_cast<int>(obs.size()) == cfg_.obs_dim,
        "ddpg act: observation dim mismatch");
  Graph g;
  Binder bind(g, *ps_, false);
  Var o = g.constant(
      normalize_obs_rows(obs_row(obs), cfg_.n_beams, cfg_.d_max));
  Var u = nets::mlp_relu(bind, actor_, o);
  auto a = nets::squash_action(u.val().at(0, 0), u.val().at(0, 1));
  if (explore) {
    double std = exploration_std();
    ++explore_steps_;
    a.first += std * rng.normal();
    a.second += std * rng.normal();
    a = clamp_box(a);
  }
  return a;
}

MFStats DdpgAgent::update(const TransitionBuffer& buf, Rng& rng) {
  MFStats st;
  st.noise_std = exploration_std();
  if (warmup_pending(buf, cfg_, "ddpg", warned_)) return st;
  TransitionBatch b = buf.sample(cfg_.batch, rng);
  const int n = b.obs.rows;
  Tensor obs_n = normalize_obs_rows(b.obs, cfg_.n_beams, cfg_.d_max);
  Tensor next_n = normalize_obs_rows(b.next_obs, cfg_.n_beams, cfg_.d_max);

  // y = r + gamma * (1 - done) * Q'(s', squash(mu'(s'))).
  Tensor y;
  {
    Graph g;
    Binder bind(g, *ps_, false);
    Var next = g.constant(next_n);
    Var a = nets::squash_actions(nets::mlp_relu(bind, actor_t_, next));
    Var q = critic_forward(bind, critic_t_, next, a);
    y = td_target(b.rew, b.done, q.val(), cfg_.gamma);
  }

  {
    Graph g;
    Binder bind(g, *ps_, true);
    Var d = diff::sub(
        critic_forward(bind, critic_, g.constant(obs_n), g.constant(b.act)),
        g.constant(y));
    Var loss = diff::scale(diff::sum_all(diff::square(d)), 1.0 / n);
    st.critic_loss = loss.val().at(0, 0);
    if (!std::isfinite(st.critic_loss))
      fail("ddpg critic update: non-finite loss");
    g.backward(loss);
    diff::AdamConfig acfg;
    acfg.lr = cfg_.ddpg_lr_critic;
    ps_->adam_step(critic_ids_, acfg);
  }

  {
    Graph g;
    Binder bind(g, *ps_, true);
    Binder frozen(g, *ps_, false);
    Var obs = g.constant(obs_n);
    Var a = nets::squash_actions(nets::mlp_relu(bind, actor_, obs));
    Var q = critic_forward(frozen, critic_, obs, a);
    Var loss = diff::scale(diff::sum_all(q), -1.0 / n);
    st.actor_loss = loss.val().at(0, 0);
    for (int i = 0; i < n; ++i) st.q_mean += q.val().at(i, 0) / n;
    if (!std::isfinite(st.actor_loss))
      fail("ddpg actor update: non-finite loss");
    g.backward(loss);
    diff::AdamConfig acfg;
    acfg.lr = cfg_.ddpg_lr_actor;
    ps_->adam_step(actor_ids_, acfg);
  }

  ps_->soft_update(actor_t_ids_, actor_ids_, cfg_.ddpg_tau);
  ps_->soft_update(critic_t_ids_, critic_ids_, cfg_.ddpg_tau);
  st.updated = true;
  st.actor_updated = true;
  return st;
}

}  // namespace navrl::baselines
