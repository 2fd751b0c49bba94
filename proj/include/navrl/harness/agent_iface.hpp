#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "navrl/agent/dreamer_agent.hpp"
#include "navrl/baselines/common.hpp"
#include "navrl/env/nav_env.hpp"
#include "navrl/harness/checkpoint.hpp"
#include "navrl/harness/run_config.hpp"
#include "navrl/wm/world_model.hpp"

namespace navrl::harness {

// Derived seed streams; every random decision in a run hangs off (seed, tag).
inline constexpr uint64_t kSeedInit = 1;         // weight initialization
inline constexpr uint64_t kSeedTrain = 2;        // rollout + learner draws
inline constexpr uint64_t kSeedTrainEpisode = 3; // per-episode env seeds
inline constexpr uint64_t kSeedEvalEpisode = 4;  // evaluation env seeds

// Uniform face the trainer sees over all four algorithms.
class AgentIface {
 public:
  virtual ~AgentIface() = default;
  virtual const std::string& algo() const = 0;

  // Training-episode boundary: resets policy state and opens a new stored
  // episode. eval_reset only resets policy state (no replay interaction).
  virtual void episode_start(const std::vector<double>& obs0) = 0;
  virtual void eval_reset() = 0;

  virtual std::pair<double, double> act(const std::vector<double>& obs,
                                        bool explore, Rng& rng) = 0;
  virtual void observe(const std::vector<double>& obs,
                       std::pair<double, double> action, double reward,
                       const std::vector<double>& next_obs, bool done) = 0;

  // One learning opportunity per env step; true if a gradient update ran.
  virtual bool train_step(Rng& rng) = 0;

  virtual const std::vector<std::string>& scalar_names() const = 0;
  virtual const std::vector<double>& scalars() const = 0;  // last update
  virtual int64_t updates() const = 0;
  virtual int64_t parameter_count() const = 0;

  virtual void save(const std::string& path,
                    const CheckpointMeta& meta) const = 0;
  virtual void restore(const Checkpoint& ck) = 0;
};

// Component configs after applying rc.overrides. Unknown keys throw
// ConfigError; struct-level validation happens in the component constructors.
struct ResolvedConfigs {
  env::EnvConfig env;
  baselines::MFConfig mf;
  wm::WMConfig wm;
  agent::AgentConfig agent;  // feat_dim derived from wm
  int dreamer_batch = 16;
  int dreamer_seq_len = 64;
  int dreamer_prefill = 1000;      // env steps stored before learning starts
  int dreamer_imag_starts = 256;   // imagination rollouts per update
  int dreamer_buffer_capacity = 100000;
};

ResolvedConfigs resolve_configs(const RunConfig& rc);

std::unique_ptr<AgentIface> make_agent(const RunConfig& rc);

}  // namespace navrl::harness
