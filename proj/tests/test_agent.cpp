#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "navrl/agent/dreamer_agent.hpp"
#include "navrl/nets/policy.hpp"

using namespace navrl;
using agent::AgentConfig;
using agent::DreamerAgent;
using agent::lambda_returns;
using agent::percentile;
using agent::ReturnNorm;
using diff::ParamStore;
using diff::Tensor;

namespace {

// Direct recursive evaluation of the return definition.
double recursion_ref(int t, const std::vector<double>& r,
                     const std::vector<double>& v,
                     const std::vector<double>& c, double gamma,
                     double lambda) {
  int H = static_cast<int>(r.size());
  if (t == H) return v[H];
  return r[t] + gamma * c[t] *
                    ((1.0 - lambda) * v[t + 1] +
                     lambda * recursion_ref(t + 1, r, v, c, gamma, lambda));
}

// Independent oracle: lambda-return as the weighted mixture of n-step returns.
double expansion_ref(int t, const std::vector<double>& r,
                     const std::vector<double>& v,
                     const std::vector<double>& c, double gamma,
                     double lambda) {
  int H = static_cast<int>(r.size());
  int N = H - t;
  auto nstep = [&](int n) {
    double disc = 1.0, sum = 0.0;
    for (int k = 0; k < n; ++k) {
      sum += disc * r[t + k];
      disc *= gamma * c[t + k];
    }
    return sum + disc * v[t + n];
  };
  double acc = 0.0;
  for (int n = 1; n <= N - 1; ++n)
    acc += (1.0 - lambda) * std::pow(lambda, n - 1) * nstep(n);
  acc += std::pow(lambda, N - 1) * nstep(N);
  return acc;
}

std::vector<Tensor> wrap_cols(const std::vector<double>& xs) {
  std::vector<Tensor> out;
  for (double x : xs) out.push_back(Tensor::full(1, 1, x));
  return out;
}

AgentConfig small_agent(int feat_dim) {
  AgentConfig cfg;
  cfg.feat_dim = feat_dim;
  cfg.width = 64;
  cfg.layers = 2;
  return cfg;
}

// Synthetic one-step trajectory around constant features; the reward is a
// deterministic function of the squashed sampled action.
wm::ImaginedTrajectory bandit_traj(const DreamerAgent& ag, int n, Rng& rng,
                                   double (*reward)(double, double)) {
  wm::ImaginedTrajectory tr;
  tr.n = n;
  tr.horizon = 1;
  tr.feat_dim = ag.config().feat_dim;
  Tensor feats = Tensor::full(n, tr.feat_dim, 0.5);
  Tensor u = ag.sample_pre_tanh(feats, rng);
  Tensor rew(n, 1);
  for (int i = 0; i < n; ++i) {
    auto a = nets::squash_action(u.at(i, 0), u.at(i, 1));
    rew.at(i, 0) = reward(a.first, a.second);
  }
  tr.feats = {feats, feats};
  tr.pre_tanh = {u};
  tr.rewards = {rew};
  tr.continues = {Tensor::zeros(n, 1)};
  return tr;
}

double logp_of(const DreamerAgent& ag, const Tensor& feats, const Tensor& u) {
  auto [mu, ls] = ag.actor_params(feats);
  diff::Graph g;
  diff::Var lp = nets::tanh_gauss_logp(g.constant(mu), g.constant(ls),
                                       g.constant(u));
  double sum = 0.0;
  for (double x : lp.val().v) sum += x;
  return sum / u.rows;
}

}  // namespace

TEST_CASE("lambda returns match both oracles") {
  // Fixed instance from the recursion definition.
  std::vector<double> r{0, 0, 100}, v{1, 2, 3, 0}, c{1, 1, 0};
  auto out = lambda_returns(wrap_cols(r), wrap_cols(v), wrap_cols(c), 0.99,
                            0.95);
  REQUIRE(out.size() == 3);
  for (int t = 0; t < 3; ++t) {
    CHECK(out[t].at(0, 0) ==
          doctest::Approx(recursion_ref(t, r, v, c, 0.99, 0.95))
              .epsilon(1e-12));
    CHECK(out[t].at(0, 0) ==
          doctest::Approx(expansion_ref(t, r, v, c, 0.99, 0.95))
              .epsilon(1e-10));
  }

  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    int H = 1 + static_cast<int>(rng.below(12));
    double gamma = 0.9 + 0.1 * rng.u01();
    double lambda = rng.u01();
    std::vector<double> rr(H), vv(H + 1), cc(H);
    for (int t = 0; t < H; ++t) {
      rr[t] = 10.0 * rng.u01() - 5.0;
      cc[t] = rng.u01();
    }
    for (int t = 0; t <= H; ++t) vv[t] = 10.0 * rng.u01() - 5.0;
    auto got = lambda_returns(wrap_cols(rr), wrap_cols(vv), wrap_cols(cc),
                              gamma, lambda);
    for (int t = 0; t < H; ++t) {
      double ref = recursion_ref(t, rr, vv, cc, gamma, lambda);
      CHECK(std::abs(got[t].at(0, 0) - ref) < 1e-10);
      CHECK(std::abs(got[t].at(0, 0) -
                     expansion_ref(t, rr, vv, cc, gamma, lambda)) < 1e-9);
    }
  }
}

TEST_CASE("lambda return edge cases and errors") {
  std::vector<double> r{1, 2}, v{5, 6, 7}, c{0.5, 0.5};
  // lambda = 0: one-step targets.
  auto one = lambda_returns(wrap_cols(r), wrap_cols(v), wrap_cols(c), 0.9, 0.0);
  CHECK(one[0].at(0, 0) == doctest::Approx(1 + 0.9 * 0.5 * 6).epsilon(1e-12));
  CHECK(one[1].at(0, 0) == doctest::Approx(2 + 0.9 * 0.5 * 7).epsilon(1e-12));
  // lambda = 1, continues 1: monte-carlo with terminal bootstrap.
  std::vector<double> c1{1, 1};
  auto mc = lambda_returns(wrap_cols(r), wrap_cols(v), wrap_cols(c1), 0.9, 1.0);
  CHECK(mc[0].at(0, 0) ==
        doctest::Approx(1 + 0.9 * (2 + 0.9 * 7)).epsilon(1e-12));

  CHECK_THROWS(lambda_returns(wrap_cols(r), wrap_cols(r), wrap_cols(c), 0.9,
                              0.5));  // values too short
  CHECK_THROWS(lambda_returns({}, wrap_cols(v), {}, 0.9, 0.5));
}

TEST_CASE("percentile and return normalization") {
  CHECK(percentile({3, 1, 2}, 0.0) == 1.0);
  CHECK(percentile({3, 1, 2}, 1.0) == 3.0);
  CHECK(percentile({3, 1, 2}, 0.5) == 2.0);
  CHECK(percentile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(percentile({10}, 0.95) == 10.0);
  CHECK_THROWS(percentile({}, 0.5));

  ReturnNorm nm;
  nm.update({5.0, 5.0, 5.0});  // constant batch: range 0, divisor 1
  CHECK(nm.scale() == 1.0);
  nm = ReturnNorm{};
  nm.update({0.0, 0.2, 0.4, 0.6});  // range < 1: divisor exactly 1
  CHECK(nm.scale() == 1.0);

  // Uniform grid over [0, 200]: the steady-state divisor approaches the
  // sample's 95th minus 5th percentile.
  nm = ReturnNorm{};
  std::vector<double> uniform;
  for (int i = 0; i <= 200; ++i) uniform.push_back(static_cast<double>(i));
  double ref = percentile(uniform, 0.95) - percentile(uniform, 0.05);
  for (int k = 0; k < 600; ++k) nm.update(uniform);
  CHECK(nm.scale() == doctest::Approx(ref).epsilon(1e-6));
  CHECK(nm.scale() >= 170.0);
  CHECK(nm.scale() <= 195.0);
  CHECK(nm.hi >= nm.lo);

  // EMA moves gradually between distributions and scale never amplifies.
  ReturnNorm slow;
  slow.update({0.0, 1000.0});
  double s0 = slow.scale();
  slow.update({0.0, 0.5});
  CHECK(slow.scale() < s0);
  CHECK(slow.scale() >= 1.0);
}

TEST_CASE("critic decode at zero init is the uniform-bin expectation") {
  ParamStore ps;
  Rng rng(3);
  auto cfg = small_agent(16);
  DreamerAgent ag(ps, cfg, rng);
  auto grid = diff::BinGrid::make(cfg.bins, cfg.bin_lo, cfg.bin_hi);
  double mean_center = 0.0;
  for (double cb : grid.centers) mean_center += cb;
  mean_center /= grid.n;
  double expect = symexp(mean_center);

  Tensor feats = Tensor::full(5, 16, 0.3);
  Tensor v = ag.values(feats);
  for (int i = 0; i < 5; ++i)
    CHECK(v.at(i, 0) == doctest::Approx(expect).epsilon(1e-9));

  // One-hot logits decode to (approximately) that bin's raw center.
  Tensor logits = Tensor::zeros(1, grid.n);
  logits.at(0, 7) = 60.0;
  CHECK(grid.decode(logits).at(0, 0) ==
        doctest::Approx(symexp(grid.centers[7])).epsilon(1e-9));
}

TEST_CASE("critic regresses imagined returns toward their fixed point") {
  // Constant features, constant reward 5, continues 1, gamma 0.9: the
  // self-consistent value is 5 / (1 - 0.9) = 50.
  ParamStore ps;
  Rng rng(4);
  auto cfg = small_agent(12);
  cfg.gamma = 0.9;
  cfg.critic_lr = 3e-4;
  cfg.actor_lr = 0.0;
  DreamerAgent ag(ps, cfg, rng);

  const int n = 16, H = 8;
  wm::ImaginedTrajectory tr;
  tr.n = n;
  tr.horizon = H;
  tr.feat_dim = 12;
  Tensor feats = Tensor::full(n, 12, 1.0);
  Rng arng(5);
  for (int t = 0; t <= H; ++t) tr.feats.push_back(feats);
  for (int t = 0; t < H; ++t) {
    tr.pre_tanh.push_back(ag.sample_pre_tanh(feats, arng));
    tr.rewards.push_back(Tensor::full(n, 1, 5.0));
    tr.continues.push_back(Tensor::full(n, 1, 1.0));
  }
  double v0 = ag.values(feats).at(0, 0);
  for (int k = 0; k < 1200; ++k) {
    auto st = ag.update(tr);
    REQUIRE(std::isfinite(st.critic_loss));
  }
  double v1 = ag.values(feats).at(0, 0);
  CHECK(std::abs(v1 - 50.0) < 6.0);
  CHECK(std::abs(v1 - 50.0) < std::abs(v0 - 50.0));
}

TEST_CASE("zero advantage and zero entropy scale give a null actor update") {
  ParamStore ps;
  Rng rng(6);
  auto cfg = small_agent(10);
  cfg.entropy_scale = 0.0;
  DreamerAgent ag(ps, cfg, rng);

  Tensor feats = Tensor::full(8, 10, 0.2);
  double v = ag.values(feats).at(0, 0);
  wm::ImaginedTrajectory tr;
  tr.n = 8;
  tr.horizon = 1;
  tr.feat_dim = 10;
  Rng arng(7);
  tr.feats = {feats, feats};
  tr.pre_tanh = {ag.sample_pre_tanh(feats, arng)};
  tr.rewards = {Tensor::full(8, 1, v)};  // return equals value: advantage 0
  tr.continues = {Tensor::zeros(8, 1)};

  std::vector<Tensor> before;
  for (int id : ag.actor_ids()) before.push_back(ps.value(id));
  auto st = ag.update(tr);
  CHECK(st.actor_grad_norm == 0.0);
  size_t k = 0;
  for (int id : ag.actor_ids()) {
    const Tensor& now = ps.value(id);
    for (size_t i = 0; i < now.v.size(); ++i)
      CHECK(now.v[i] == before[k].v[i]);
    ++k;
  }
}

TEST_CASE("positive advantage pushes probability toward the sampled action") {
  ParamStore ps;
  Rng rng(8);
  auto cfg = small_agent(10);
  cfg.entropy_scale = 0.0;
  // Small enough that the first-order term dominates Adam's sign-like step.
  cfg.actor_lr = 1e-5;
  DreamerAgent ag(ps, cfg, rng);

  Tensor feats = Tensor::full(16, 10, 0.1);
  Rng arng(9);
  Tensor u = ag.sample_pre_tanh(feats, arng);
  wm::ImaginedTrajectory tr;
  tr.n = 16;
  tr.horizon = 1;
  tr.feat_dim = 10;
  tr.feats = {feats, feats};
  tr.pre_tanh = {u};
  tr.rewards = {Tensor::full(16, 1, 50.0)};  // far above the initial value
  tr.continues = {Tensor::zeros(16, 1)};

  double before = logp_of(ag, feats, u);
  ag.update(tr);
  double after = logp_of(ag, feats, u);
  CHECK(after > before);
}

TEST_CASE("bandit reward region attracts the actor mean") {
  ParamStore ps;
  Rng rng(10);
  auto cfg = small_agent(8);
  cfg.actor_lr = 1e-3;
  cfg.critic_lr = 1e-3;
  DreamerAgent ag(ps, cfg, rng);

  auto reward = +[](double, double a1) { return a1 > 0.8 ? 1.0 : 0.0; };
  Rng arng(11);
  for (int k = 0; k < 2000; ++k) {
    auto tr = bandit_traj(ag, 64, arng, reward);
    auto st = ag.update(tr);
    REQUIRE(std::isfinite(st.actor_loss));
    REQUIRE(std::isfinite(st.critic_loss));
  }
  auto [mu, ls] = ag.actor_params(Tensor::full(1, 8, 0.5));
  double mean_a1 = std::tanh(mu.at(0, 1));
  CHECK(mean_a1 > 0.8);
}

TEST_CASE("act is boxed, deterministic without exploration, and resets state") {
  ParamStore ps;
  Rng rng(12);
  wm::WMConfig wcfg;
  wcfg.obs_dim = 14;
  wcfg.enc_width = wcfg.dec_width = wcfg.head_width = 32;
  wcfg.recurrent_dim = 16;
  wcfg.latent_dim = 6;
  wm::WorldModel model(ps, wcfg, rng);
  auto cfg = small_agent(wcfg.feat_dim());
  DreamerAgent ag(ps, cfg, rng);

  std::vector<double> obs(14, 1.0);
  wm::LatentState s1, s2;
  Rng r1(1), r2(2);
  auto a1 = ag.act(model, obs, s1, {0, 0}, true, false, r1);
  auto a2 = ag.act(model, obs, s2, {0, 0}, true, false, r2);
  CHECK(a1.first == a2.first);
  CHECK(a1.second == a2.second);
  for (int c = 0; c < 16; ++c) CHECK(s1.h.at(0, c) == 0.0);  // start state

  // Continuing steps advance h away from zero and stay inside the box.
  auto a3 = ag.act(model, obs, s1, a1, false, false, r1);
  double hmag = 0.0;
  for (int c = 0; c < 16; ++c) hmag += std::abs(s1.h.at(0, c));
  CHECK(hmag > 0.0);
  CHECK(a3.first >= 0.0);

  Rng r3(3);
  wm::LatentState s3;
  bool moved = false;
  std::pair<double, double> prev{0, 0};
  for (int t = 0; t < 50; ++t) {
    auto a = ag.act(model, obs, s3, prev, t == 0, true, r3);
    CHECK(a.first >= 0.0);
    CHECK(a.first <= 1.0);
    CHECK(a.second >= -1.0);
    CHECK(a.second <= 1.0);
    if (a != prev) moved = true;
    prev = a;
  }
  CHECK(moved);
}

TEST_CASE("frozen random world model supports 100 stable updates") {
  ParamStore ps;
  Rng rng(13);
  wm::WMConfig wcfg;
  wcfg.obs_dim = 14;
  wcfg.enc_width = wcfg.dec_width = wcfg.head_width = 32;
  wcfg.recurrent_dim = 16;
  wcfg.latent_dim = 6;
  wm::WorldModel model(ps, wcfg, rng);
  auto cfg = small_agent(wcfg.feat_dim());
  cfg.horizon = 15;
  DreamerAgent ag(ps, cfg, rng);

  // Arbitrary but finite latent starts.
  wm::LatentState starts;
  Rng srng(14);
  starts.h = Tensor::zeros(24, 16);
  starts.c = Tensor::zeros(24, 16);
  starts.z = Tensor::zeros(24, 6);
  for (auto& x : starts.h.v) x = 0.5 * srng.normal();
  for (auto& x : starts.c.v) x = 0.5 * srng.normal();
  for (auto& x : starts.z.v) x = srng.normal();

  std::vector<Tensor> wm_before;
  for (int id : model.param_ids()) wm_before.push_back(ps.value(id));

  Rng irng(15);
  for (int k = 0; k < 100; ++k) {
    auto tr = model.imagine(starts, ag.policy(), cfg.horizon, irng);
    auto st = ag.update(tr);
    REQUIRE(std::isfinite(st.actor_loss));
    REQUIRE(std::isfinite(st.critic_loss));
    REQUIRE(std::isfinite(st.entropy));
    REQUIRE(st.return_scale >= 1.0);
  }
  for (int id : ag.param_ids()) CHECK(ps.value(id).all_finite());

  // Freeze contract: agent training leaves world-model parameters and
  // gradients untouched.
  CHECK_FALSE(ps.any_nonzero_grad(model.param_ids()));
  size_t k = 0;
  for (int id : model.param_ids()) {
    const Tensor& now = ps.value(id);
    for (size_t i = 0; i < now.v.size(); ++i)
      CHECK(now.v[i] == wm_before[k].v[i]);
    ++k;
  }
}

TEST_CASE("config validation") {
  AgentConfig cfg = small_agent(8);
  cfg.gamma = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg = small_agent(8);
  cfg.lam = 1.5;
  CHECK_THROWS(cfg.validate());
  cfg = small_agent(8);
  cfg.horizon = 0;
  CHECK_THROWS(cfg.validate());
  cfg = small_agent(0);
  CHECK_THROWS(cfg.validate());
}
