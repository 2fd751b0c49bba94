#pragma once

#include "navrl/baselines/common.hpp"

namespace navrl::baselines {

// Soft actor-critic with a fixed temperature and reward scaling 2: stochastic
// tanh-Gaussian actor, twin soft Q critics with twin targets.
class SacAgent {
 public:
  SacAgent(ParamStore& ps, const MFConfig& cfg, Rng& init_rng,
           const std::string& prefix = "sac");

  std::pair<double, double> act(const std::vector<double>& obs, bool explore,
                                Rng& rng) const;
  MFStats update(const TransitionBuffer& buf, Rng& rng);
  std::pair<double, double> q_values(const std::vector<double>& obs,
                                     std::pair<double, double> a) const;

  const MFConfig& config() const { return cfg_; }
  std::vector<int> param_ids() const;
  int64_t parameter_count() const;

 private:
  std::pair<diff::Var, diff::Var> actor_dist(diff::Binder& bind,
                                             diff::Var obs) const;

  ParamStore* ps_;
  MFConfig cfg_;
  nets::MlpIds actor_, q1_, q2_, t1_, t2_;
  std::vector<int> actor_ids_, critic_ids_, q1_ids_, q2_ids_, t1_ids_,
      t2_ids_;
  bool warned_ = false;
};

}  // namespace navrl::baselines
