#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "navrl/common.hpp"
#include "navrl/harness/trainer.hpp"

namespace {

using navrl::harness::RunConfig;

struct CliArgs {
  std::string algo, init_from, out, config, stages_dir;
  int stage = 0, beams = 0, episodes = 0, eval_episodes = 0, eval_every = 0;
  uint64_t seed = 0;
  double train_ratio = 0.0, early_stop = 0.0;
  bool realtime = false;
  std::vector<std::string> sets;
};

void add_common_flags(CLI::App* cmd, CliArgs& a) {
  cmd->add_option("--algo", a.algo, "dreamer | sac | ddpg | td3");
  cmd->add_option("--stage", a.stage, "arena stage, 1..6");
  cmd->add_option("--beams", a.beams, "lidar beam count (paper: 10 or 360)");
  cmd->add_option("--episodes", a.episodes, "training episodes");
  cmd->add_option("--seed", a.seed, "run seed");
  cmd->add_option("--init-from", a.init_from, "checkpoint to start from");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_flag("--realtime", a.realtime, "pace steps at the 0.15 s period");
  cmd->add_option("--config", a.config, "key=value config file");
  cmd->add_option("--eval-episodes", a.eval_episodes,
                  "episodes per evaluation");
  cmd->add_option("--eval-every", a.eval_every,
                  "evaluate every N training episodes (0 = never)");
  cmd->add_option("--early-stop", a.early_stop,
                  "stop once an evaluation reaches this success rate");
  cmd->add_option("--train-ratio", a.train_ratio,
                  "learner updates per env step (dreamer)");
  cmd->add_option("--stages-dir", a.stages_dir, "directory with stageN.json");
  cmd->add_option("--set", a.sets,
                  "extra key=value override, e.g. --set mf.batch=64");
}

// Base, then config file, then explicitly passed flags.
RunConfig build_config(CLI::App* cmd, const CliArgs& a, RunConfig rc) {
  if (!a.config.empty()) navrl::harness::apply_kv_file(rc, a.config);
  if (cmd->count("--algo")) rc.algo = a.algo;
  if (cmd->count("--stage")) rc.stage = a.stage;
  if (cmd->count("--beams")) rc.n_beams = a.beams;
  if (cmd->count("--episodes")) rc.episodes = a.episodes;
  if (cmd->count("--seed")) rc.seed = a.seed;
  if (cmd->count("--init-from")) rc.init_from = a.init_from;
  if (cmd->count("--out")) rc.out_dir = a.out;
  if (cmd->count("--realtime")) rc.realtime = a.realtime;
  if (cmd->count("--eval-episodes")) rc.eval_episodes = a.eval_episodes;
  if (cmd->count("--eval-every")) rc.eval_every = a.eval_every;
  if (cmd->count("--early-stop")) rc.early_stop_success = a.early_stop;
  if (cmd->count("--train-ratio")) rc.train_ratio = a.train_ratio;
  if (cmd->count("--stages-dir")) rc.stages_dir = a.stages_dir;
  for (const std::string& kv : a.sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      navrl::fail_config("--set expects key=value, got '" + kv + "'");
    rc.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return rc;
}

int run_train(CLI::App* cmd, const CliArgs& a) {
  RunConfig rc = build_config(cmd, a, RunConfig{});
  navrl::harness::TrainResult r = navrl::harness::train(rc);
  std::cout << "trained " << rc.algo << " stage " << rc.stage << " beams "
            << rc.n_beams << ": episodes=" << r.episodes_run
            << " env_steps=" << r.env_steps << " updates=" << r.updates
            << " success_ma=" << r.final_success_ma;
  if (r.last_eval_success >= 0.0)
    std::cout << " last_eval=" << r.last_eval_success;
  if (r.early_stopped) std::cout << " (early stop)";
  std::cout << "\ncheckpoint: " << r.checkpoint_path
            << "\nmetrics: " << r.metrics_path << "\n";
  return 0;
}

int run_eval(CLI::App* cmd, const CliArgs& a) {
  // Unset algo/beams/stage mean "whatever the checkpoint says".
  RunConfig base;
  base.algo.clear();
  base.n_beams = 0;
  base.stage = 0;
  RunConfig rc = build_config(cmd, a, base);
  navrl::harness::EvalResult r = navrl::harness::evaluate(rc);
  std::cout << "evaluated " << r.episodes << " episodes: success_rate="
            << r.success_rate << " successes=" << r.successes
            << " collisions=" << r.collisions << " timeouts=" << r.timeouts
            << " mean_return=" << r.mean_return
            << " mean_steps=" << r.mean_steps << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D lidar navigation: world-model and model-free training"};
  app.require_subcommand(1);
  CliArgs targs, eargs;
  CLI::App* train_cmd = app.add_subcommand("train", "train an agent");
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common_flags(train_cmd, targs);
  add_common_flags(eval_cmd, eargs);

  try {
    app.parse(argc, argv);
    if (train_cmd->parsed()) return run_train(train_cmd, targs);
    return run_eval(eval_cmd, eargs);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const navrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
