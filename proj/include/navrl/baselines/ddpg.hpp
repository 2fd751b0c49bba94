#pragma once

#include "navrl/baselines/common.hpp"

namespace navrl::baselines {

// Deterministic policy gradient: single critic, deterministic tanh actor,
// additive Gaussian exploration noise with a linear decay schedule.
class DdpgAgent {
 public:
  DdpgAgent(ParamStore& ps, const MFConfig& cfg, Rng& init_rng,
            const std::string& prefix = "ddpg");

  // explore=true adds action-space noise and advances the decay schedule.
  std::pair<double, double> act(const std::vector<double>& obs, bool explore,
                                Rng& rng);
  MFStats update(const TransitionBuffer& buf, Rng& rng);
  double q_value(const std::vector<double>& obs,
                 std::pair<double, double> a) const;

  const MFConfig& config() const { return cfg_; }
  double exploration_std() const;
  int64_t explore_steps() const { return explore_steps_; }
  void set_explore_steps(int64_t n) { explore_steps_ = n; }
  std::vector<int> param_ids() const;
  int64_t parameter_count() const;

 private:
  ParamStore* ps_;
  MFConfig cfg_;
  nets::MlpIds actor_, actor_t_, critic_, critic_t_;
  std::vector<int> actor_ids_, actor_t_ids_, critic_ids_, critic_t_ids_;
  int64_t explore_steps_ = 0;
  bool warned_ = false;
};

}  // namespace navrl::baselines
