#pragma once

#include <cstdint>
#include <string>

#include "navrl/harness/agent_iface.hpp"
#include "navrl/harness/metrics.hpp"
#include "navrl/harness/run_config.hpp"
#include "navrl/sim/stage.hpp"

namespace navrl::harness {

struct TrainResult {
  int episodes_run = 0;
  int64_t env_steps = 0;
  int64_t updates = 0;
  double final_success_ma = 0.0;   // trailing-100 training success rate
  double last_eval_success = -1.0; // -1 if no periodic eval ran
  bool early_stopped = false;
  std::string checkpoint_path;
  std::string metrics_path;
};

struct EvalResult {
  int episodes = 0;
  int successes = 0, collisions = 0, timeouts = 0;
  double success_rate = 0.0;
  double mean_return = 0.0, mean_steps = 0.0;
};

// Runs the episode loop with a per-step learning opportunity, periodic
// deterministic evaluation, metrics CSV, and a final checkpoint.
TrainResult train(const RunConfig& rc);

// Loads rc.init_from, rebuilds the stored architecture, and evaluates with
// exploration disabled. rc.stage == 0 means "the checkpoint's stage".
EvalResult evaluate(const RunConfig& rc);

EvalResult evaluate_agent(AgentIface& agent, const sim::StageSpec& stage,
                          const env::EnvConfig& ecfg, int episodes,
                          uint64_t eval_seed, MetricsWriter* per_episode);

}  // namespace navrl::harness
