#pragma once

#include <string>
#include <utility>
#include <vector>

#include "navrl/agent/lambda_return.hpp"
#include "navrl/diff/params.hpp"
#include "navrl/diff/regression.hpp"
#include "navrl/nets/mlp.hpp"
#include "navrl/wm/world_model.hpp"

namespace navrl::agent {

using diff::BinGrid;
using diff::ParamStore;
using wm::LatentState;

struct AgentConfig {
  int feat_dim = 0;
  int width = 512, layers = 2;
  int horizon = 15;
  double gamma = 0.997;
  double lam = 0.95;
  double entropy_scale = 3e-4;
  double p_lo = 0.05, p_hi = 0.95, norm_decay = 0.99;
  double critic_ema_decay = 0.98, critic_ema_scale = 1.0;
  double actor_lr = 3e-5, critic_lr = 3e-5;
  double adam_eps = 1e-5, grad_clip = 100.0;
  double min_std = 0.1, max_std = 1.0;
  int bins = 41;
  double bin_lo = -15.0, bin_hi = 150.0;
  void validate() const;
};

struct AgentStats {
  double actor_loss = 0, critic_loss = 0, entropy = 0;
  double return_lo = 0, return_hi = 0, return_scale = 1;
  double value_mean = 0, return_mean = 0;
  double actor_grad_norm = 0, critic_grad_norm = 0;
};

// Actor-critic trained purely on imagined rollouts: two-hot critic regressed
// onto lambda-returns with an EMA self-regularizer, reinforce-style actor with
// percentile-normalized advantages and entropy regularization.
class DreamerAgent {
 public:
  DreamerAgent(ParamStore& ps, const AgentConfig& cfg, Rng& init_rng,
               const std::string& prefix = "agent");

  const AgentConfig& config() const { return cfg_; }
  const std::vector<int>& actor_ids() const { return actor_ids_; }
  const std::vector<int>& critic_ids() const { return critic_ids_; }
  std::vector<int> param_ids() const;  // actor + critic + ema
  const ReturnNorm& return_norm() const { return norm_; }

  // Pre-tanh action samples for imagination (plain tensors, no gradients).
  Tensor sample_pre_tanh(const Tensor& feats, Rng& rng) const;
  wm::PolicyFn policy() const;

  // Critic values in raw return space, [n,1].
  Tensor values(const Tensor& feats) const;

  // Actor distribution parameters (mu, log_std), plain, both [n,2].
  std::pair<Tensor, Tensor> actor_params(const Tensor& feats) const;

  AgentStats update(const wm::ImaginedTrajectory& traj);

  // Environment-facing policy: advances the belief state through the world
  // model and returns a normalized action. episode_start resets the state.
  std::pair<double, double> act(const wm::WorldModel& model,
                                const std::vector<double>& obs,
                                LatentState& state,
                                std::pair<double, double> prev_action,
                                bool episode_start, bool explore,
                                Rng& rng) const;

 private:
  std::pair<diff::Var, diff::Var> actor_dist(diff::Binder& bind,
                                             diff::Var feats) const;

  ParamStore* ps_;
  AgentConfig cfg_;
  BinGrid grid_;
  nets::BlockMlpIds actor_, critic_, critic_ema_;
  std::vector<int> actor_ids_, critic_ids_, ema_ids_;
  ReturnNorm norm_;
};

}  // namespace navrl::agent
