#include <functional>
#include <map>

#include "navrl/baselines/ddpg.hpp"
#include "navrl/baselines/sac.hpp"
#include "navrl/baselines/td3.hpp"
#include "navrl/common.hpp"
#include "navrl/harness/agent_iface.hpp"

namespace navrl::harness {

namespace {

using SetterMap = std::map<std::string, std::function<void(const std::string&)>>;

void register_keys(SetterMap& reg, ResolvedConfigs& r) {
  auto set_i = [&reg](const std::string& k, int* p) {
    reg[k] = [k, p](const std::string& v) {
      *p = static_cast<int>(parse_int(k, v));
    };
  };
  auto set_d = [&reg](const std::string& k, double* p) {
    reg[k] = [k, p](const std::string& v) { *p = parse_double(k, v); };
  };
  auto set_b = [&reg](const std::string& k, bool* p) {
    reg[k] = [k, p](const std::string& v) { *p = parse_bool(k, v); };
  };

  set_d("env.d_max", &r.env.d_max);
  set_d("env.d_goal", &r.env.d_goal);
  set_d("env.d_collision", &r.env.d_collision);
  set_d("env.r_success", &r.env.r_success);
  set_d("env.r_fail", &r.env.r_fail);
  set_d("env.dt", &r.env.dt);
  set_d("env.v_lin_max", &r.env.v_lin_max);
  set_d("env.v_ang_max", &r.env.v_ang_max);
  set_d("env.lidar_noise_std", &r.env.lidar_noise_std);
  set_b("env.randomize_heading", &r.env.randomize_heading);

  set_d("mf.gamma", &r.mf.gamma);
  set_i("mf.buffer_capacity", &r.mf.buffer_capacity);
  set_i("mf.batch", &r.mf.batch);
  set_i("mf.warmup", &r.mf.warmup);
  set_i("mf.hidden1", &r.mf.hidden1);
  set_i("mf.hidden2", &r.mf.hidden2);
  set_d("mf.log_std_lo", &r.mf.log_std_lo);
  set_d("mf.log_std_hi", &r.mf.log_std_hi);
  set_d("mf.sac_lr_actor", &r.mf.sac_lr_actor);
  set_d("mf.sac_lr_critic", &r.mf.sac_lr_critic);
  set_d("mf.sac_tau", &r.mf.sac_tau);
  set_d("mf.sac_reward_scale", &r.mf.sac_reward_scale);
  set_d("mf.sac_alpha", &r.mf.sac_alpha);
  set_d("mf.ddpg_lr_actor", &r.mf.ddpg_lr_actor);
  set_d("mf.ddpg_lr_critic", &r.mf.ddpg_lr_critic);
  set_d("mf.ddpg_tau", &r.mf.ddpg_tau);
  set_d("mf.ddpg_noise_start", &r.mf.ddpg_noise_start);
  set_d("mf.ddpg_noise_end", &r.mf.ddpg_noise_end);
  set_i("mf.ddpg_noise_decay_steps", &r.mf.ddpg_noise_decay_steps);
  set_d("mf.td3_lr_actor", &r.mf.td3_lr_actor);
  set_d("mf.td3_lr_critic", &r.mf.td3_lr_critic);
  set_d("mf.td3_tau", &r.mf.td3_tau);
  set_d("mf.td3_smoothing_std", &r.mf.td3_smoothing_std);
  set_d("mf.td3_smoothing_clip", &r.mf.td3_smoothing_clip);
  set_i("mf.td3_policy_delay", &r.mf.td3_policy_delay);
  set_d("mf.td3_expl_noise", &r.mf.td3_expl_noise);

  set_i("wm.enc_width", &r.wm.enc_width);
  set_i("wm.enc_layers", &r.wm.enc_layers);
  set_i("wm.dec_width", &r.wm.dec_width);
  set_i("wm.dec_layers", &r.wm.dec_layers);
  set_i("wm.head_width", &r.wm.head_width);
  set_i("wm.head_layers", &r.wm.head_layers);
  set_i("wm.recurrent_dim", &r.wm.recurrent_dim);
  set_i("wm.latent_dim", &r.wm.latent_dim);
  set_i("wm.latent_classes", &r.wm.latent_classes);
  reg["wm.latent"] = [&r](const std::string& v) {
    if (v == "gaussian")
      r.wm.latent = wm::LatentKind::gaussian;
    else if (v == "categorical")
      r.wm.latent = wm::LatentKind::categorical;
    else
      fail_config("config key 'wm.latent': expected gaussian or categorical, "
                  "got '" + v + "'");
  };
  set_b("wm.encoder_uses_h", &r.wm.encoder_uses_h);
  set_d("wm.unimix", &r.wm.unimix);
  set_d("wm.free_nats", &r.wm.free_nats);
  set_d("wm.kl_scale", &r.wm.kl_scale);
  set_d("wm.recon_scale", &r.wm.recon_scale);
  set_d("wm.lr", &r.wm.lr);
  set_d("wm.grad_clip", &r.wm.grad_clip);
  set_i("wm.bins", &r.wm.bins);
  set_d("wm.bin_lo", &r.wm.bin_lo);
  set_d("wm.bin_hi", &r.wm.bin_hi);

  set_i("agent.width", &r.agent.width);
  set_i("agent.layers", &r.agent.layers);
  set_i("agent.horizon", &r.agent.horizon);
  set_d("agent.gamma", &r.agent.gamma);
  set_d("agent.lam", &r.agent.lam);
  set_d("agent.entropy_scale", &r.agent.entropy_scale);
  set_d("agent.p_lo", &r.agent.p_lo);
  set_d("agent.p_hi", &r.agent.p_hi);
  set_d("agent.norm_decay", &r.agent.norm_decay);
  set_d("agent.critic_ema_decay", &r.agent.critic_ema_decay);
  set_d("agent.critic_ema_scale", &r.agent.critic_ema_scale);
  set_d("agent.actor_lr", &r.agent.actor_lr);
  set_d("agent.critic_lr", &r.agent.critic_lr);
  set_d("agent.adam_eps", &r.agent.adam_eps);
  set_d("agent.grad_clip", &r.agent.grad_clip);
  set_d("agent.min_std", &r.agent.min_std);
  set_d("agent.max_std", &r.agent.max_std);
  set_i("agent.bins", &r.agent.bins);
  set_d("agent.bin_lo", &r.agent.bin_lo);
  set_d("agent.bin_hi", &r.agent.bin_hi);

  set_i("dreamer.batch", &r.dreamer_batch);
  set_i("dreamer.seq_len", &r.dreamer_seq_len);
  set_i("dreamer.prefill", &r.dreamer_prefill);
  set_i("dreamer.imag_starts", &r.dreamer_imag_starts);
  set_i("dreamer.buffer_capacity", &r.dreamer_buffer_capacity);
}

template <class A>
class MfWrap : public AgentIface {
 public:
  MfWrap(std::string algo, const RunConfig& rc, const ResolvedConfigs& r)
      : algo_(std::move(algo)),
        buf_(r.mf.obs_dim, static_cast<size_t>(r.mf.buffer_capacity)),
        names_({"critic_loss", "actor_loss", "q_mean"}),
        vals_(names_.size(), 0.0) {
    Rng init(Rng::mix(rc.seed, kSeedInit));
    agent_ = std::make_unique<A>(ps_, r.mf, init, algo_);
  }

  const std::string& algo() const override { return algo_; }
  void episode_start(const std::vector<double>&) override {}
  void eval_reset() override {}

  std::pair<double, double> act(const std::vector<double>& obs, bool explore,
                                Rng& rng) override {
    return agent_->act(obs, explore, rng);
  }

  void observe(const std::vector<double>& obs, std::pair<double, double> a,
               double reward, const std::vector<double>& next,
               bool done) override {
    buf_.append(obs, a, reward, next, done);
  }

  bool train_step(Rng& rng) override {
    baselines::MFStats st = agent_->update(buf_, rng);
    if (st.updated) {
      vals_ = {st.critic_loss, st.actor_loss, st.q_mean};
      ++updates_;
    }
    return st.updated;
  }

  const std::vector<std::string>& scalar_names() const override {
    return names_;
  }
  const std::vector<double>& scalars() const override { return vals_; }
  int64_t updates() const override { return updates_; }
  int64_t parameter_count() const override { return agent_->parameter_count(); }

  void save(const std::string& path, const CheckpointMeta& meta) const override {
    save_checkpoint(path, meta, ps_, agent_->param_ids());
  }
  void restore(const Checkpoint& ck) override { restore_into(ck, ps_); }

 private:
  std::string algo_;
  diff::ParamStore ps_;
  replay::TransitionBuffer buf_;
  std::unique_ptr<A> agent_;
  std::vector<std::string> names_;
  std::vector<double> vals_;
  int64_t updates_ = 0;
};

class DreamerWrap : public AgentIface {
 public:
  DreamerWrap(const RunConfig& rc, const ResolvedConfigs& r)
      : buf_(r.wm.obs_dim, static_cast<size_t>(r.dreamer_buffer_capacity)),
        batch_(r.dreamer_batch),
        seq_len_(r.dreamer_seq_len),
        prefill_(r.dreamer_prefill),
        imag_starts_(r.dreamer_imag_starts),
        train_ratio_(rc.train_ratio),
        names_({"wm_loss", "recon", "kl", "reward_ce", "cont_bce",
                "actor_loss", "critic_loss", "entropy", "return_scale"}),
        vals_(names_.size(), 0.0) {
    check(batch_ >= 1 && seq_len_ >= 2, "dreamer: batch >= 1, seq_len >= 2");
    check(prefill_ >= 1 && imag_starts_ >= 1,
          "dreamer: prefill and imag_starts must be >= 1");
    Rng init(Rng::mix(rc.seed, kSeedInit));
    model_ = std::make_unique<wm::WorldModel>(ps_, r.wm, init, "wm");
    agent::AgentConfig ac = r.agent;
    ac.feat_dim = model_->feat_dim();
    policy_ = std::make_unique<agent::DreamerAgent>(ps_, ac, init, "agent");
    state_ = model_->initial_state(1);
  }

  const std::string& algo() const override { return algo_; }

  void episode_start(const std::vector<double>& obs0) override {
    buf_.begin_episode(obs0);
    eval_reset();
  }

  void eval_reset() override {
    first_ = true;
    prev_action_ = {0.0, 0.0};
  }

  std::pair<double, double> act(const std::vector<double>& obs, bool explore,
                                Rng& rng) override {
    auto a = policy_->act(*model_, obs, state_, prev_action_, first_, explore,
                          rng);
    first_ = false;
    prev_action_ = a;
    return a;
  }

  void observe(const std::vector<double>&, std::pair<double, double> a,
               double reward, const std::vector<double>& next,
               bool done) override {
    buf_.step(a, reward, next, done);
  }

  bool train_step(Rng& rng) override {
    if (!buf_.ready() || buf_.steps() < static_cast<size_t>(prefill_))
      return false;
    acc_ += train_ratio_;
    bool any = false;
    while (acc_ >= 1.0) {
      acc_ -= 1.0;
      run_update(rng);
      any = true;
    }
    return any;
  }

  const std::vector<std::string>& scalar_names() const override {
    return names_;
  }
  const std::vector<double>& scalars() const override { return vals_; }
  int64_t updates() const override { return updates_; }
  int64_t parameter_count() const override {
    return ps_.count_parameters(all_ids());
  }

  void save(const std::string& path, const CheckpointMeta& meta) const override {
    save_checkpoint(path, meta, ps_, all_ids());
  }
  void restore(const Checkpoint& ck) override { restore_into(ck, ps_); }

 private:
  std::vector<int> all_ids() const {
    std::vector<int> ids = model_->param_ids();
    for (int id : policy_->param_ids()) ids.push_back(id);
    return ids;
  }

  void run_update(Rng& rng) {
    replay::SequenceBatch b = buf_.sample(batch_, seq_len_, rng);
    wm::WmUpdateResult wr = model_->update(b, rng);
    wm::LatentState starts =
        pick_starts(wr.posteriors, wr.valid, imag_starts_, rng);
    wm::ImaginedTrajectory traj = model_->imagine(
        starts, policy_->policy(), policy_->config().horizon, rng);
    agent::AgentStats as = policy_->update(traj);
    vals_ = {wr.stats.loss,
             wr.stats.recon,
             wr.stats.kl_dyn + wr.stats.kl_rep,
             wr.stats.reward_ce,
             wr.stats.cont_bce,
             as.actor_loss,
             as.critic_loss,
             as.entropy,
             as.return_scale};
    ++updates_;
  }

  static wm::LatentState pick_starts(const wm::LatentState& post,
                                     const diff::Tensor& valid, int cap,
                                     Rng& rng) {
    std::vector<int> idx;
    for (int i = 0; i < valid.rows; ++i)
      if (valid.at(i, 0) > 0.5) idx.push_back(i);
    check(!idx.empty(), "dreamer: batch contained no valid steps");
    if (static_cast<int>(idx.size()) > cap) {
      for (int i = 0; i < cap; ++i) {  // partial Fisher-Yates
        int j = i + static_cast<int>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
      }
      idx.resize(cap);
    }
    auto gather = [&idx](const diff::Tensor& src) {
      diff::Tensor out(static_cast<int>(idx.size()), src.cols);
      for (size_t r = 0; r < idx.size(); ++r)
        for (int c = 0; c < src.cols; ++c) out.at(static_cast<int>(r), c) = src.at(idx[r], c);
      return out;
    };
    return {gather(post.h), gather(post.c), gather(post.z)};
  }

  std::string algo_ = "dreamer";
  diff::ParamStore ps_;
  replay::EpisodeBuffer buf_;
  std::unique_ptr<wm::WorldModel> model_;
  std::unique_ptr<agent::DreamerAgent> policy_;
  wm::LatentState state_;
  std::pair<double, double> prev_action_{0.0, 0.0};
  bool first_ = true;
  int batch_, seq_len_, prefill_, imag_starts_;
  double train_ratio_;
  double acc_ = 0.0;
  std::vector<std::string> names_;
  std::vector<double> vals_;
  int64_t updates_ = 0;
};

}  // namespace

ResolvedConfigs resolve_configs(const RunConfig& rc) {
  ResolvedConfigs r;
  r.env.n_beams = rc.n_beams;
  r.env.realtime = rc.realtime;
  r.mf.n_beams = rc.n_beams;
  r.mf.obs_dim = rc.n_beams + 4;
  r.wm.obs_dim = rc.n_beams + 4;

  SetterMap reg;
  register_keys(reg, r);
  for (const auto& [key, value] : rc.overrides) {
    auto it = reg.find(key);
    if (it == reg.end()) fail_config("unknown config key '" + key + "'");
    it->second(value);
  }
  r.agent.feat_dim = r.wm.feat_dim();
  return r;
}

std::unique_ptr<AgentIface> make_agent(const RunConfig& rc) {
  ResolvedConfigs r = resolve_configs(rc);
  if (rc.algo == "sac")
    return std::make_unique<MfWrap<baselines::SacAgent>>("sac", rc, r);
  if (rc.algo == "ddpg")
    return std::make_unique<MfWrap<baselines::DdpgAgent>>("ddpg", rc, r);
  if (rc.algo == "td3")
    return std::make_unique<MfWrap<baselines::Td3Agent>>("td3", rc, r);
  if (rc.algo == "dreamer") return std::make_unique<DreamerWrap>(rc, r);
  fail_config("unknown algorithm '" + rc.algo + "'");
}

}  // namespace navrl::harness
