#include "navrl/baselines/common.hpp"

#include <algorithm>
#include <iostream>

#include "navrl/common.hpp"

namespace navrl::baselines {

void MFConfig::validate() const {
  check(obs_dim == n_beams + 4, "mf config: obs_dim must equal n_beams + 4");
  check(d_max > 0, "mf config: d_max must be positive");
  check(gamma > 0 && gamma <= 1, "mf config: gamma must be in (0,1]");
  check(batch >= 1, "mf config: batch must be >= 1");
  check(buffer_capacity >= batch, "mf config: buffer must hold one batch");
  check(warmup >= batch, "mf config: warmup must cover at least one batch");
  check(hidden1 > 0 && hidden2 > 0, "mf config: hidden sizes must be positive");
  check(td3_policy_delay >= 1, "mf config: td3 policy delay must be >= 1");
  check(ddpg_noise_start >= ddpg_noise_end && ddpg_noise_end >= 0,
        "mf config: ddpg noise must decay toward a nonnegative floor");
}

Tensor normalize_obs_rows(Tensor raw, int n_beams, double d_max) {
  check(raw.cols >= n_beams, "normalize_obs: fewer columns than beams");
  for (int r = 0; r < raw.rows; ++r)
    for (int c = 0; c < n_beams; ++c) raw.at(r, c) /= d_max;
  return raw;
}

Tensor obs_row(const std::vector<double>& obs) {
  Tensor t(1, static_cast<int>(obs.size()));
  for (size_t i = 0; i < obs.size(); ++i) t.v[i] = obs[i];
  return t;
}

nets::MlpIds add_actor_net(ParamStore& ps, const std::string& prefix,
                           const MFConfig& cfg, int out, Rng& rng) {
  return nets::add_mlp(ps, prefix, {cfg.obs_dim, cfg.hidden1, cfg.hidden2, out},
                       nets::Init::fanin_uniform, nets::Init::small_uniform,
                       nets::Init::small_uniform, rng);
}

nets::MlpIds add_critic_net(ParamStore& ps, const std::string& prefix,
                            const MFConfig& cfg, Rng& rng) {
  return nets::add_mlp(ps, prefix,
                       {cfg.obs_dim + 2, cfg.hidden1, cfg.hidden2, 1},
                       nets::Init::fanin_uniform, nets::Init::small_uniform,
                       nets::Init::small_uniform, rng);
}

diff::Var critic_forward(diff::Binder& bind, const nets::MlpIds& ids,
                         diff::Var obs, diff::Var act) {
  return nets::mlp_relu(bind, ids, diff::concat_cols({obs, act}));
}

std::pair<double, double> clamp_box(std::pair<double, double> a) {
  return {clamp(a.first, 0.0, 1.0), clamp(a.second, -1.0, 1.0)};
}

Tensor td_target(const Tensor& rew, const Tensor& done, const Tensor& bootstrap,
                 double gamma, double reward_scale) {
  check(rew.same_shape(done) && rew.same_shape(bootstrap) && rew.cols == 1,
        "td_target: inputs must be matching [n,1] columns");
  Tensor y(rew.rows, 1);
  for (int i = 0; i < rew.rows; ++i)
    y.at(i, 0) = reward_scale * rew.at(i, 0) +
                 gamma * (1.0 - done.at(i, 0)) * bootstrap.at(i, 0);
  return y;
}

bool warmup_pending(const TransitionBuffer& buf, const MFConfig& cfg,
                    const char* algo, bool& warned) {
  size_t need = static_cast<size_t>(std::max(cfg.warmup, cfg.batch));
  if (buf.size() >= need) return false;
  if (!warned) {
    std::cerr << algo << ": update skipped, buffer has " << buf.size()
              << " transitions but warmup needs " << need << "\n";
    warned = true;
  }
  return true;
}

}  // namespace navrl::baselines
