#include "navrl/harness/trainer.hpp"

#include <chrono>
#include <deque>
#include <filesystem>

#include "navrl/common.hpp"

namespace navrl::harness {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

CheckpointMeta meta_for(const RunConfig& rc) {
  CheckpointMeta meta;
  meta.algo = rc.algo;
  meta.n_beams = rc.n_beams;
  meta.stage = rc.stage;
  meta.extra = rc.overrides;  // lets eval rebuild identical network shapes
  return meta;
}

}  // namespace

TrainResult train(const RunConfig& rc) {
  rc.validate();
  std::filesystem::create_directories(rc.out_dir);
  ResolvedConfigs res = resolve_configs(rc);
  sim::StageSpec stage = sim::load_stage_file(rc.stage_path());
  std::unique_ptr<AgentIface> agent = make_agent(rc);

  if (!rc.init_from.empty()) {
    Checkpoint ck = load_checkpoint(rc.init_from);
    if (ck.meta.algo != rc.algo)
      fail_config("init_from checkpoint was trained with algo '" +
                  ck.meta.algo + "', this run uses '" + rc.algo + "'");
    if (ck.meta.n_beams != rc.n_beams)
      fail_config("init_from checkpoint uses " +
                  std::to_string(ck.meta.n_beams) + " beams, this run uses " +
                  std::to_string(rc.n_beams));
    agent->restore(ck);
  }

  write_text_file(rc.out_dir + "/config_resolved.txt", rc.to_text());

  std::vector<std::string> cols = {"episode", "steps",      "return",
                                   "outcome", "success_ma", "wall_s"};
  for (const std::string& n : agent->scalar_names()) cols.push_back(n);
  MetricsWriter metrics(rc.out_dir + "/metrics.csv", cols);

  std::unique_ptr<MetricsWriter> eval_csv;
  if (rc.eval_every > 0)
    eval_csv = std::make_unique<MetricsWriter>(
        rc.out_dir + "/eval.csv",
        std::vector<std::string>{"after_episode", "success_rate", "successes",
                                 "collisions", "timeouts", "mean_return",
                                 "mean_steps"});

  env::NavEnv env(stage, res.env);
  Rng train_rng(Rng::mix(rc.seed, kSeedTrain));
  uint64_t episode_stream = Rng::mix(rc.seed, kSeedTrainEpisode);
  std::deque<int> window;
  int window_sum = 0;
  auto t0 = clock_type::now();
  TrainResult out;
  out.metrics_path = metrics.path();
  out.checkpoint_path = rc.out_dir + "/checkpoint.navrl";

  for (int e = 0; e < rc.episodes; ++e) {
    std::vector<double> obs = env.reset(Rng::mix(episode_stream, e)).flatten();
    agent->episode_start(obs);
    double ep_return = 0.0;
    int steps = 0;
    env::Outcome outcome = env::Outcome::running;
    while (!env.done()) {
      std::pair<double, double> a = agent->act(obs, true, train_rng);
      env::StepResult sr = env.step(a);
      std::vector<double> next = sr.obs.flatten();
      agent->observe(obs, a, sr.reward, next, sr.done);
      agent->train_step(train_rng);
      obs = std::move(next);
      ep_return += sr.reward;
      ++steps;
      ++out.env_steps;
      outcome = sr.outcome;
    }

    int succ = outcome == env::Outcome::success ? 1 : 0;
    window.push_back(succ);
    window_sum += succ;
    if (window.size() > 100) {
      window_sum -= window.front();
      window.pop_front();
    }
    double ma = static_cast<double>(window_sum) / window.size();

    std::vector<std::string> row = {
        csv_field(static_cast<int64_t>(e)), csv_field(static_cast<int64_t>(steps)),
        csv_field(ep_return),               env::outcome_name(outcome),
        csv_field(ma),                      csv_field(seconds_since(t0))};
    for (double s : agent->scalars()) row.push_back(csv_field(s));
    metrics.row(row);
    metrics.flush();

    out.episodes_run = e + 1;
    out.final_success_ma = ma;

    if (rc.eval_every > 0 && (e + 1) % rc.eval_every == 0) {
      EvalResult ev =
          evaluate_agent(*agent, stage, res.env, rc.eval_episodes,
                         Rng::mix(rc.seed, kSeedEvalEpisode), nullptr);
      eval_csv->row({csv_field(static_cast<int64_t>(e + 1)),
                     csv_field(ev.success_rate),
                     csv_field(static_cast<int64_t>(ev.successes)),
                     csv_field(static_cast<int64_t>(ev.collisions)),
                     csv_field(static_cast<int64_t>(ev.timeouts)),
                     csv_field(ev.mean_return), csv_field(ev.mean_steps)});
      eval_csv->flush();
      out.last_eval_success = ev.success_rate;
      if (rc.early_stop_success > 0.0 &&
          ev.success_rate >= rc.early_stop_success) {
        out.early_stopped = true;
        break;
      }
    }
  }

  out.updates = agent->updates();
  agent->save(out.checkpoint_path, meta_for(rc));
  return out;
}

EvalResult evaluate_agent(AgentIface& agent, const sim::StageSpec& stage,
                          const env::EnvConfig& ecfg, int episodes,
                          uint64_t eval_seed, MetricsWriter* per_episode) {
  check(episodes >= 1, "evaluate: need at least one episode");
  env::NavEnv env(stage, ecfg);
  Rng rng(Rng::mix(eval_seed, 0x5EED));
  EvalResult r;
  r.episodes = episodes;
  for (int i = 0; i < episodes; ++i) {
    std::vector<double> obs = env.reset(Rng::mix(eval_seed, i)).flatten();
    agent.eval_reset();
    double ep_return = 0.0;
    int steps = 0;
    env::Outcome outcome = env::Outcome::running;
    while (!env.done()) {
      env::StepResult sr = env.step(agent.act(obs, false, rng));
      obs = sr.obs.flatten();
      ep_return += sr.reward;
      ++steps;
      outcome = sr.outcome;
    }
    switch (outcome) {
      case env::Outcome::success: ++r.successes; break;
      case env::Outcome::collision: ++r.collisions; break;
      default: ++r.timeouts; break;
    }
    r.mean_return += ep_return;
    r.mean_steps += steps;
    if (per_episode)
      per_episode->row({csv_field(static_cast<int64_t>(i)),
                        csv_field(static_cast<int64_t>(steps)),
                        csv_field(ep_return), env::outcome_name(outcome),
                        csv_field(static_cast<int64_t>(
                            outcome == env::Outcome::success ? 1 : 0))});
  }
  r.success_rate = static_cast<double>(r.successes) / episodes;
  r.mean_return /= episodes;
  r.mean_steps /= episodes;
  return r;
}

EvalResult evaluate(const RunConfig& rc) {
  if (rc.init_from.empty())
    fail_config("eval requires init_from (a checkpoint path)");
  Checkpoint ck = load_checkpoint(rc.init_from);
  // Empty algo / 0 beams / 0 stage mean "use the checkpoint's"; anything
  // explicit must agree with what the checkpoint was trained with.
  if (!rc.algo.empty() && rc.algo != ck.meta.algo)
    fail_config("checkpoint was trained with algo '" + ck.meta.algo +
                "', not '" + rc.algo + "'");
  if (rc.n_beams != 0 && rc.n_beams != ck.meta.n_beams)
    fail_config("checkpoint uses " + std::to_string(ck.meta.n_beams) +
                " beams, not " + std::to_string(rc.n_beams));

  RunConfig erc = rc;
  erc.algo = ck.meta.algo;
  erc.n_beams = ck.meta.n_beams;
  if (erc.stage == 0) erc.stage = ck.meta.stage;
  erc.overrides = ck.meta.extra;  // architecture the checkpoint was built with
  for (const auto& [k, v] : rc.overrides) erc.overrides[k] = v;
  erc.validate();

  std::filesystem::create_directories(erc.out_dir);
  ResolvedConfigs res = resolve_configs(erc);
  std::unique_ptr<AgentIface> agent = make_agent(erc);
  agent->restore(ck);

  write_text_file(erc.out_dir + "/eval_config_resolved.txt", erc.to_text());
  sim::StageSpec stage = sim::load_stage_file(erc.stage_path());
  MetricsWriter per(erc.out_dir + "/eval_episodes.csv",
                    {"episode", "steps", "return", "outcome", "success"});
  return evaluate_agent(*agent, stage, res.env, erc.eval_episodes,
                        Rng::mix(erc.seed, kSeedEvalEpisode), &per);
}

}  // namespace navrl::harness
