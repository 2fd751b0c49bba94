#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "doctest.h"
#include "navrl/baselines/common.hpp"
#include "navrl/baselines/ddpg.hpp"
#include "navrl/baselines/sac.hpp"
#include "navrl/baselines/td3.hpp"
#include "navrl/env/nav_env.hpp"
#include "navrl/sim/stage.hpp"

using namespace navrl;
using namespace navrl::baselines;

namespace {

MFConfig config_for_beams(int n) {
  MFConfig cfg;
  cfg.n_beams = n;
  cfg.obs_dim = n + 4;
  return cfg;
}

// Closed-form dense arithmetic, independent of the network builder.
int64_t dense(int64_t in, int64_t out) { return in * out + out; }
int64_t actor_params(int obs_dim, int out) {
  return dense(obs_dim, 400) + dense(400, 300) + dense(300, out);
}
int64_t critic_params(int obs_dim) {
  return dense(obs_dim + 2, 400) + dense(400, 300) + dense(300, 1);
}

std::vector<double> random_obs(const MFConfig& cfg, Rng& rng) {
  std::vector<double> obs(cfg.obs_dim);
  for (int i = 0; i < cfg.n_beams; ++i) obs[i] = rng.uniform(0.2, cfg.d_max);
  obs[cfg.n_beams + 0] = rng.uniform(0.0, 4.0);
  obs[cfg.n_beams + 1] = rng.uniform(-3.1, 3.1);
  obs[cfg.n_beams + 2] = rng.uniform(0.0, 1.0);
  obs[cfg.n_beams + 3] = rng.uniform(-1.0, 1.0);
  return obs;
}

// Values exactly representable in float32 so buffer roundtrips are bitwise.
std::vector<double> exact_obs(const MFConfig& cfg) {
  std::vector<double> obs(cfg.obs_dim, 1.0);
  obs[1] = 2.0;
  obs[2] = 0.5;
  obs[cfg.n_beams + 0] = 2.5;
  obs[cfg.n_beams + 1] = -0.5;
  obs[cfg.n_beams + 2] = 0.25;
  obs[cfg.n_beams + 3] = -0.125;
  return obs;
}

Tensor col(std::initializer_list<double> v) {
  Tensor t(static_cast<int>(v.size()), 1);
  int i = 0;
  for (double x : v) t.at(i++, 0) = x;
  return t;
}

std::vector<double> snapshot(const ParamStore& ps, const std::vector<int>& ids) {
  std::vector<double> all;
  for (int id : ids) {
    const Tensor& t = ps.value(id);
    all.insert(all.end(), t.v.begin(), t.v.end());
  }
  return all;
}

bool in_box(std::pair<double, double> a) {
  return a.first >= 0.0 && a.first <= 1.0 && a.second >= -1.0 &&
         a.second <= 1.0;
}

}  // namespace

TEST_CASE("parameter counts match the published totals and scale exactly with beams") {
  Rng rng(1);
  MFConfig c10 = config_for_beams(10);
  MFConfig c360 = config_for_beams(360);
  ParamStore ps;
  SacAgent sac10(ps, c10, rng, "sac10");
  DdpgAgent ddpg10(ps, c10, rng, "ddpg10");
  Td3Agent td310(ps, c10, rng, "td310");
  SacAgent sac360(ps, c360, rng, "sac360");
  DdpgAgent ddpg360(ps, c360, rng, "ddpg360");
  Td3Agent td3360(ps, c360, rng, "td3360");

  // Independent layer arithmetic: actor(4 outputs) + 2 critics + 2 targets;
  // 2 actors + 2 critics; 2 actors + 4 critics.
  CHECK(sac10.parameter_count() == actor_params(14, 4) + 4 * critic_params(14));
  CHECK(ddpg10.parameter_count() ==
        2 * actor_params(14, 2) + 2 * critic_params(14));
  CHECK(td310.parameter_count() ==
        2 * actor_params(14, 2) + 4 * critic_params(14));
  CHECK(sac10.parameter_count() == 637108);
  CHECK(ddpg10.parameter_count() == 508606);
  CHECK(td310.parameter_count() == 763408);

  // Published absolute totals are reproduced within 2% (head conventions
  // differ); TD3 lands exactly.
  auto close = [](int64_t got, int64_t want) {
    return std::abs(static_cast<double>(got - want)) < 0.02 * want;
  };
  CHECK(close(sac10.parameter_count(), 635508));
  CHECK(close(ddpg10.parameter_count(), 514406));
  CHECK(td310.parameter_count() == 763408);
  CHECK(close(sac360.parameter_count(), 1335508));
  CHECK(close(ddpg360.parameter_count(), 1074406));
  CHECK(td3360.parameter_count() == 1603408);

  // The 10 -> 360 growth is structurally forced: 350 extra inputs feed the
  // 400-unit first layer of every observation-consuming network.
  CHECK(sac360.parameter_count() - sac10.parameter_count() == 350 * 400 * 5);
  CHECK(ddpg360.parameter_count() - ddpg10.parameter_count() == 350 * 400 * 4);
  CHECK(td3360.parameter_count() - td310.parameter_count() == 350 * 400 * 6);
  CHECK(sac360.parameter_count() - sac10.parameter_count() == 700000);
  CHECK(ddpg360.parameter_count() - ddpg10.parameter_count() == 560000);
  CHECK(td3360.parameter_count() - td310.parameter_count() == 840000);
}

TEST_CASE("soft updates interpolate between target and source") {
  ParamStore ps;
  Tensor a(1, 2), b(1, 2);
  a.at(0, 0) = 0.0;
  a.at(0, 1) = 4.0;
  b.at(0, 0) = 2.0;
  b.at(0, 1) = 8.0;
  int dst = ps.add("dst", a);
  int src = ps.add("src", b);
  ps.soft_update({dst}, {src}, 0.0);
  CHECK(ps.value(dst).at(0, 0) == 0.0);
  CHECK(ps.value(dst).at(0, 1) == 4.0);
  ps.soft_update({dst}, {src}, 0.5);
  CHECK(ps.value(dst).at(0, 0) == 1.0);
  CHECK(ps.value(dst).at(0, 1) == 6.0);
  ps.soft_update({dst}, {src}, 1.0);
  CHECK(ps.value(dst).at(0, 0) == 2.0);
  CHECK(ps.value(dst).at(0, 1) == 8.0);
}

TEST_CASE("td targets evaluate the textbook examples") {
  // r=1, gamma=0.99, min(2, 3) = 2  ->  y = 2.98.
  Tensor qmin(1, 1);
  qmin.at(0, 0) = std::min(2.0, 3.0);
  Tensor y = td_target(col({1.0}), col({0.0}), qmin, 0.99);
  CHECK(y.at(0, 0) == doctest::Approx(2.98).epsilon(1e-12));

  // Terminal transitions keep only the (scaled) reward.
  y = td_target(col({100.0}), col({1.0}), col({1234.5}), 0.99, 2.0);
  CHECK(y.at(0, 0) == 200.0);
  y = td_target(col({-10.0}), col({1.0}), col({55.0}), 0.99);
  CHECK(y.at(0, 0) == -10.0);

  // Non-terminal with reward scale 2: a stored reward of 100 enters as 200.
  y = td_target(col({100.0}), col({0.0}), col({10.0}), 0.99, 2.0);
  CHECK(y.at(0, 0) == doctest::Approx(200.0 + 9.9).epsilon(1e-12));

  // Rows stay independent in a mixed batch.
  y = td_target(col({1.0, 2.0}), col({0.0, 1.0}), col({5.0, 5.0}), 0.5);
  CHECK(y.at(0, 0) == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(y.at(1, 0) == 2.0);

  CHECK_THROWS(td_target(col({1.0, 2.0}), col({0.0}), col({5.0}), 0.99));
}

TEST_CASE("clipped double-q targets never exceed either twin estimate") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    double q1 = rng.uniform(-50.0, 50.0);
    double q2 = rng.uniform(-50.0, 50.0);
    double r = rng.uniform(-10.0, 10.0);
    Tensor qmin(1, 1);
    qmin.at(0, 0) = std::min(q1, q2);
    double y = td_target(col({r}), col({0.0}), qmin, 0.99).at(0, 0);
    CHECK(y <= r + 0.99 * q1 + 1e-12);
    CHECK(y <= r + 0.99 * q2 + 1e-12);
  }
}

TEST_CASE("actions are deterministic without exploration and stay in the box") {
  MFConfig cfg;
  Rng init(11);
  ParamStore ps;
  SacAgent sac(ps, cfg, init);
  DdpgAgent ddpg(ps, cfg, init);
  Td3Agent td3(ps, cfg, init);
  Rng orng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> obs = random_obs(cfg, orng);
    Rng r1(100 + trial), r2(100 + trial);
    auto s1 = sac.act(obs, false, r1);
    CHECK(s1 == sac.act(obs, false, r2));
    auto d1 = ddpg.act(obs, false, r1);
    CHECK(d1 == ddpg.act(obs, false, r2));
    auto t1 = td3.act(obs, false, r1);
    CHECK(t1 == td3.act(obs, false, r2));
    Rng er(200 + trial);
    for (auto a : {s1, d1, t1, sac.act(obs, true, er), ddpg.act(obs, true, er),
                   td3.act(obs, true, er)})
      CHECK(in_box(a));
  }
  CHECK(ddpg.explore_steps() == 20);  // only explore=true advances the decay

  // Same seed, fresh store: identical weights, identical actions.
  ParamStore psa, psb;
  Rng ia(77), ib(77);
  SacAgent a(psa, cfg, ia);
  SacAgent b(psb, cfg, ib);
  std::vector<double> obs = random_obs(cfg, orng);
  CHECK(a.act(obs, false, ia) == b.act(obs, false, ib));
}

TEST_CASE("ddpg exploration noise decays linearly to the floor") {
  MFConfig cfg;
  Rng rng(5);
  ParamStore ps;
  DdpgAgent ddpg(ps, cfg, rng);
  CHECK(ddpg.exploration_std() == doctest::Approx(0.1).epsilon(1e-12));
  ddpg.set_explore_steps(50000);
  CHECK(ddpg.exploration_std() == doctest::Approx(0.055).epsilon(1e-12));
  ddpg.set_explore_steps(100000);
  CHECK(ddpg.exploration_std() == doctest::Approx(0.01).epsilon(1e-12));
  ddpg.set_explore_steps(400000);
  CHECK(ddpg.exploration_std() == doctest::Approx(0.01).epsilon(1e-12));

  double prev = 1.0;
  for (int s = 0; s <= 120000; s += 5000) {
    ddpg.set_explore_steps(s);
    CHECK(ddpg.exploration_std() <= prev + 1e-15);
    prev = ddpg.exploration_std();
  }

  ddpg.set_explore_steps(0);
  std::vector<double> obs = random_obs(cfg, rng);
  ddpg.act(obs, false, rng);
  CHECK(ddpg.explore_steps() == 0);
  ddpg.act(obs, true, rng);
  CHECK(ddpg.explore_steps() == 1);
}

TEST_CASE("updates before the warmup fill are warned no-ops") {
  MFConfig cfg;
  cfg.batch = 32;
  cfg.warmup = 64;
  Rng rng(9);
  ParamStore ps;
  SacAgent sac(ps, cfg, rng);
  DdpgAgent ddpg(ps, cfg, rng);
  Td3Agent td3(ps, cfg, rng);
  TransitionBuffer buf(cfg.obs_dim, 1000);
  std::vector<double> obs = exact_obs(cfg);
  for (int i = 0; i < 63; ++i) buf.append(obs, {0.5, -0.5}, 1.0, obs, false);

  std::vector<int> all_ids = sac.param_ids();
  for (int id : ddpg.param_ids()) all_ids.push_back(id);
  for (int id : td3.param_ids()) all_ids.push_back(id);
  std::vector<double> before = snapshot(ps, all_ids);

  Rng urng(10);
  CHECK(!sac.update(buf, urng).updated);
  CHECK(!ddpg.update(buf, urng).updated);
  CHECK(!td3.update(buf, urng).updated);
  CHECK(td3.update_count() == 0);
  CHECK(snapshot(ps, all_ids) == before);

  buf.append(obs, {0.5, -0.5}, 1.0, obs, false);  // crosses the threshold
  CHECK(sac.update(buf, urng).updated);
  CHECK(snapshot(ps, all_ids) != before);
}

TEST_CASE("ddpg and td3 losses match hand-evaluated definitions on frozen nets") {
  MFConfig cfg;
  cfg.batch = 1;
  cfg.warmup = 1;
  cfg.ddpg_lr_actor = 0.0;
  cfg.ddpg_lr_critic = 0.0;
  cfg.ddpg_tau = 0.0;
  cfg.td3_lr_actor = 0.0;
  cfg.td3_lr_critic = 0.0;
  cfg.td3_tau = 0.0;
  cfg.td3_policy_delay = 1;
  Rng rng(13);
  ParamStore ps;
  DdpgAgent ddpg(ps, cfg, rng);
  Td3Agent td3(ps, cfg, rng);
  std::vector<double> obs = exact_obs(cfg);
  std::pair<double, double> act{0.5, -0.25};
  TransitionBuffer buf(cfg.obs_dim, 8);
  buf.append(obs, act, -10.0, obs, true);

  Rng urng(14);
  MFStats ds = ddpg.update(buf, urng);
  CHECK(ds.updated);
  double q_stored = ddpg.q_value(obs, act);
  double q_pi = ddpg.q_value(obs, ddpg.act(obs, false, urng));
  // Terminal target is the raw reward; actor loss is -Q(s, mu(s)).
  CHECK(ds.critic_loss ==
        doctest::Approx((q_stored + 10.0) * (q_stored + 10.0)).epsilon(1e-9));
  CHECK(ds.actor_loss == doctest::Approx(-q_pi).epsilon(1e-9));
  CHECK(ds.q_mean == doctest::Approx(q_pi).epsilon(1e-9));

  MFStats ts = td3.update(buf, urng);
  CHECK(ts.updated);
  CHECK(ts.actor_updated);  // delay 1: every update
  auto [q1v, q2v] = td3.q_values(obs, act);
  CHECK(ts.critic_loss == doctest::Approx((q1v + 10.0) * (q1v + 10.0) +
                                          (q2v + 10.0) * (q2v + 10.0))
                              .epsilon(1e-9));
}

TEST_CASE("critics regress terminal rewards to the scaled return") {
  MFConfig cfg;
  cfg.batch = 8;
  cfg.warmup = 8;
  Rng rng(17);
  std::vector<double> obs;
  std::pair<double, double> act{0.5, -0.25};

  // SAC: stored reward 100 with reward scale 2 -> both critics head to 200.
  {
    MFConfig c = cfg;
    c.sac_lr_critic = 3e-3;
    ParamStore ps;
    SacAgent sac(ps, c, rng);
    obs = exact_obs(c);
    TransitionBuffer buf(c.obs_dim, 32);
    for (int i = 0; i < 16; ++i) buf.append(obs, act, 100.0, obs, true);
    auto [i1, i2] = sac.q_values(obs, act);
    CHECK(std::abs(i1) < 1.0);  // small-uniform output head starts near zero
    CHECK(std::abs(i2) < 1.0);
    Rng urng(18);
    for (int i = 0; i < 1500; ++i) sac.update(buf, urng);
    auto [q1v, q2v] = sac.q_values(obs, act);
    CHECK(q1v == doctest::Approx(200.0).epsilon(0.1));
    CHECK(q2v == doctest::Approx(200.0).epsilon(0.1));
  }

  // DDPG: gamma never touches a terminal reward of -10.
  {
    ParamStore ps;
    DdpgAgent ddpg(ps, cfg, rng);
    TransitionBuffer buf(cfg.obs_dim, 32);
    for (int i = 0; i < 16; ++i) buf.append(obs, act, -10.0, obs, true);
    Rng urng(19);
    for (int i = 0; i < 800; ++i) ddpg.update(buf, urng);
    CHECK(ddpg.q_value(obs, act) == doctest::Approx(-10.0).epsilon(0.1));
  }
}

TEST_CASE("td3 delays actor and target updates to every second critic update") {
  MFConfig cfg;
  cfg.batch = 8;
  cfg.warmup = 8;
  Rng rng(21);
  ParamStore ps;
  Td3Agent td3(ps, cfg, rng);
  TransitionBuffer buf(cfg.obs_dim, 64);
  Rng orng(22);
  for (int i = 0; i < 16; ++i)
    buf.append(random_obs(cfg, orng), {orng.u01(), orng.uniform(-1.0, 1.0)},
               orng.uniform(-1.0, 1.0), random_obs(cfg, orng), false);

  std::vector<int> actor_ids = ps.ids_with_prefix("td3/actor/");
  std::vector<int> lagged_ids = ps.ids_with_prefix("td3/actor_t/");
  for (const char* p : {"td3/t1/", "td3/t2/"})
    for (int id : ps.ids_with_prefix(p)) lagged_ids.push_back(id);
  std::vector<int> critic_ids = ps.ids_with_prefix("td3/q1/");
  for (int id : ps.ids_with_prefix("td3/q2/")) critic_ids.push_back(id);
  REQUIRE(!actor_ids.empty());
  REQUIRE(!lagged_ids.empty());
  REQUIRE(!critic_ids.empty());

  std::vector<double> actor0 = snapshot(ps, actor_ids);
  std::vector<double> lagged0 = snapshot(ps, lagged_ids);
  std::vector<double> critic0 = snapshot(ps, critic_ids);

  Rng urng(23);
  MFStats s1 = td3.update(buf, urng);
  CHECK(s1.updated);
  CHECK(!s1.actor_updated);
  CHECK(td3.update_count() == 1);
  CHECK(snapshot(ps, actor_ids) == actor0);    // untouched on odd updates
  CHECK(snapshot(ps, lagged_ids) == lagged0);  // targets wait with the actor
  CHECK(snapshot(ps, critic_ids) != critic0);  // critics always move

  MFStats s2 = td3.update(buf, urng);
  CHECK(s2.updated);
  CHECK(s2.actor_updated);
  CHECK(td3.update_count() == 2);
  CHECK(snapshot(ps, actor_ids) != actor0);
  CHECK(snapshot(ps, lagged_ids) != lagged0);

  td3.set_update_count(7);  // next update is the 8th: actor fires again
  MFStats s3 = td3.update(buf, urng);
  CHECK(s3.actor_updated);
}

TEST_CASE("ddpg actor updates climb a frozen critic surface") {
  MFConfig cfg;
  cfg.batch = 16;
  cfg.warmup = 16;
  cfg.ddpg_lr_critic = 0.0;  // freeze the surface, isolate the actor step
  cfg.ddpg_lr_actor = 1e-3;
  cfg.ddpg_tau = 0.0;
  Rng rng(25);
  ParamStore ps;
  DdpgAgent ddpg(ps, cfg, rng);
  TransitionBuffer buf(cfg.obs_dim, 16);
  Rng orng(26);
  for (int i = 0; i < 16; ++i)
    buf.append(random_obs(cfg, orng), {orng.u01(), orng.uniform(-1.0, 1.0)},
               orng.uniform(-1.0, 1.0), random_obs(cfg, orng), false);

  Rng urng(27);
  MFStats first = ddpg.update(buf, urng);
  MFStats last = first;
  for (int i = 0; i < 150; ++i) last = ddpg.update(buf, urng);
  // Every batch is the full 16-row buffer, so q_mean is comparable across
  // updates and must rise as the actor follows dQ/da.
  CHECK(last.q_mean > first.q_mean);
  CHECK(last.actor_loss < first.actor_loss);
}

TEST_CASE("agents train end to end against the simulator without diverging") {
  sim::StageSpec stage = sim::load_stage_file("stages/stage1.json");
  env::EnvConfig ecfg;
  MFConfig cfg;
  cfg.batch = 16;
  cfg.warmup = 32;
  Rng rng(31);
  ParamStore ps;
  SacAgent sac(ps, cfg, rng);
  DdpgAgent ddpg(ps, cfg, rng);
  Td3Agent td3(ps, cfg, rng);

  auto drive = [&](auto& agent, uint64_t seed) {
    env::NavEnv env(stage, ecfg);
    TransitionBuffer buf(cfg.obs_dim, 4096);
    Rng arng(seed);
    int updates = 0;
    for (int ep = 0; ep < 3; ++ep) {
      std::vector<double> obs = env.reset(seed + ep).flatten();
      for (int t = 0; t < 40 && !env.done(); ++t) {
        auto a = agent.act(obs, true, arng);
        CHECK(in_box(a));
        env::StepResult sr = env.step(a);
        std::vector<double> next = sr.obs.flatten();
        buf.append(obs, a, sr.reward, next, sr.done);
        obs = next;
        MFStats st = agent.update(buf, arng);
        if (st.updated) {
          ++updates;
          CHECK(std::isfinite(st.critic_loss));
          CHECK(std::isfinite(st.actor_loss));
          CHECK(std::isfinite(st.q_mean));
        }
      }
    }
    CHECK(updates > 0);
  };
  drive(sac, 1000);
  drive(ddpg, 2000);
  drive(td3, 3000);
}

TEST_CASE("mf config validation rejects inconsistent settings") {
  MFConfig ok;
  ok.validate();
  CHECK(ok.gamma == 0.99);
  CHECK(ok.buffer_capacity == 100000);
  CHECK(ok.batch == 128);
  CHECK(ok.hidden1 == 400);
  CHECK(ok.hidden2 == 300);
  CHECK(ok.sac_lr_actor == 3e-4);
  CHECK(ok.sac_lr_critic == 3e-4);
  CHECK(ok.sac_reward_scale == 2.0);
  CHECK(ok.sac_tau == 0.001);
  CHECK(ok.ddpg_lr_actor == 1e-4);
  CHECK(ok.ddpg_lr_critic == 1e-3);
  CHECK(ok.ddpg_tau == 0.001);
  CHECK(ok.td3_lr_actor == 1e-3);
  CHECK(ok.td3_lr_critic == 1e-3);
  CHECK(ok.td3_tau == 0.005);
  CHECK(ok.td3_smoothing_std == 0.1);
  CHECK(ok.td3_policy_delay == 2);

  MFConfig bad = ok;
  bad.obs_dim = 15;
  CHECK_THROWS(bad.validate());
  bad = ok;
  bad.warmup = 100;  // below batch
  CHECK_THROWS(bad.validate());
  bad = ok;
  bad.td3_policy_delay = 0;
  CHECK_THROWS(bad.validate());
  bad = ok;
  bad.ddpg_noise_end = 0.5;  // floor above the start
  CHECK_THROWS(bad.validate());
  bad = ok;
  bad.buffer_capacity = 64;  // cannot hold one batch
  CHECK_THROWS(bad.validate());
}
