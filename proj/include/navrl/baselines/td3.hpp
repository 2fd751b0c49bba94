#pragma once

#include "navrl/baselines/common.hpp"

namespace navrl::baselines {

// Twin delayed DDPG: clipped double-Q targets with target-policy smoothing,
// actor and target networks updated every td3_policy_delay critic updates.
class Td3Agent {
 public:
  Td3Agent(ParamStore& ps, const MFConfig& cfg, Rng& init_rng,
           const std::string& prefix = "td3");

  std::pair<double, double> act(const std::vector<double>& obs, bool explore,
                                Rng& rng) const;
  MFStats update(const TransitionBuffer& buf, Rng& rng);

  // Twin critic estimates for a single (obs, action) pair, for diagnostics.
  std::pair<double, double> q_values(const std::vector<double>& obs,
                                     std::pair<double, double> action) const;

  const MFConfig& config() const { return cfg_; }
  int64_t update_count() const { return update_count_; }
  void set_update_count(int64_t n) { update_count_ = n; }
  std::vector<int> param_ids() const;
  int64_t parameter_count() const;

 private:
  ParamStore* ps_;
  MFConfig cfg_;
  nets::MlpIds actor_, actor_t_, q1_, q2_, t1_, t2_;
  std::vector<int> actor_ids_, actor_t_ids_, critic_ids_, q1_ids_, q2_ids_,
      t1_ids_, t2_ids_;
  int64_t update_count_ = 0;
  bool warned_ = false;
};

}  // namespace navrl::baselines
