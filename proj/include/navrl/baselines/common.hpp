#pragma once

#include <string>
#include <utility>
#include <vector>

#include "navrl/diff/params.hpp"
#include "navrl/nets/mlp.hpp"
#include "navrl/replay/transition_buffer.hpp"

namespace navrl::baselines {

using diff::ParamStore;
using diff::Tensor;
using replay::TransitionBatch;
using replay::TransitionBuffer;

struct MFConfig {
  int obs_dim = 14;
  int n_beams = 10;
  double d_max = 3.5;
  double gamma = 0.99;
  int buffer_capacity = 100000;
  int batch = 128;
  int warmup = 1000;  // env steps collected before updates start
  int hidden1 = 400, hidden2 = 300;
  double log_std_lo = -5.0, log_std_hi = 2.0;  // SAC actor clamp

  double sac_lr_actor = 3e-4, sac_lr_critic = 3e-4, sac_tau = 0.001;
  double sac_reward_scale = 2.0, sac_alpha = 1.0;

  double ddpg_lr_actor = 1e-4, ddpg_lr_critic = 1e-3, ddpg_tau = 0.001;
  double ddpg_noise_start = 0.1, ddpg_noise_end = 0.01;
  int ddpg_noise_decay_steps = 100000;

  double td3_lr_actor = 1e-3, td3_lr_critic = 1e-3, td3_tau = 0.005;
  double td3_smoothing_std = 0.1, td3_smoothing_clip = 0.5;
  int td3_policy_delay = 2;
  double td3_expl_noise = 0.1;

  void validate() const;
};

struct MFStats {
  bool updated = false;
  bool actor_updated = false;  // TD3 delays actor/target updates
  double critic_loss = 0, actor_loss = 0, q_mean = 0;
  double logp_mean = 0;   // SAC next-action log-probability mean
  double noise_std = 0;   // exploration noise currently in effect
};

// Distances (first n_beams columns) divide by d_max; the goal/action
// components pass through unchanged.
Tensor normalize_obs_rows(Tensor raw, int n_beams, double d_max);
Tensor obs_row(const std::vector<double>& obs);

// [400, 300] ReLU nets: fan-in uniform hidden layers, +-3e-3 output layer.
nets::MlpIds add_actor_net(ParamStore& ps, const std::string& prefix,
                           const MFConfig& cfg, int out, Rng& rng);
// Critic consumes [obs, action] in its first layer.
nets::MlpIds add_critic_net(ParamStore& ps, const std::string& prefix,
                            const MFConfig& cfg, Rng& rng);
diff::Var critic_forward(diff::Binder& bind, const nets::MlpIds& ids,
                         diff::Var obs, diff::Var act);

std::pair<double, double> clamp_box(std::pair<double, double> a);

// y_i = reward_scale * r_i + gamma * (1 - done_i) * bootstrap_i. Terminal
// transitions keep only the (scaled) reward.
Tensor td_target(const Tensor& rew, const Tensor& done, const Tensor& bootstrap,
                 double gamma, double reward_scale = 1.0);

// Shared no-op warning for updates requested before the warmup fill.
bool warmup_pending(const TransitionBuffer& buf, const MFConfig& cfg,
                    const char* algo, bool& warned);

}  // namespace navrl::baselines
