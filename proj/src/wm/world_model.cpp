#include "navrl/wm/world_model.hpp"

#include <cmath>
#include <cstddef>
#include <utility>

#include "navrl/common.hpp"
#include "navrl/nets/policy.hpp"

namespace navrl::wm {

using diff::Binder;
using diff::Graph;
using diff::Var;
using nets::Init;

namespace {

constexpr double kLogStdLo = -5.0, kLogStdHi = 2.0;

Tensor symlog_tensor(const Tensor& t) {
  Tensor out = t;
  for (auto& x : out.v) x = symlog(x);
  return out;
}

double masked_sum(const Tensor& rows, const Tensor& mask) {
  double s = 0.0;
  for (int r = 0; r < rows.rows; ++r) s += rows.at(r, 0) * mask.at(r, 0);
  return s;
}

void copy_rows(Tensor& dst, int dst_row, const Tensor& src) {
  for (int r = 0; r < src.rows; ++r)
    for (int c = 0; c < src.cols; ++c)
      dst.at(dst_row + r, c) = src.at(r, c);
}

}  // namespace

WorldModel::WorldModel(ParamStore& ps, const WMConfig& cfg, Rng& init_rng,
                       const std::string& prefix)
    : ps_(&ps), cfg_(cfg) {
  check(cfg.obs_dim > 0, "world model: obs_dim must be positive");
  check(cfg.latent_dim > 0 && cfg.recurrent_dim > 0,
        "world model: latent and recurrent dims must be positive");
  check(cfg.latent != LatentKind::categorical || cfg.latent_classes > 1,
        "world model: categorical latents need at least 2 classes");
  check(cfg.bins >= 2, "world model: reward grid needs at least 2 bins");
  grid_ = BinGrid::make(cfg.bins, cfg.bin_lo, cfg.bin_hi);

  const int zd = cfg.z_dim();
  const int lat_out = cfg_.latent == LatentKind::gaussian ? 2 * cfg.latent_dim
                                                          : zd;
  const int enc_in = cfg.obs_dim + (cfg.encoder_uses_h ? cfg.recurrent_dim : 0);
  enc_ = nets::add_block_mlp(ps, prefix + "/enc", enc_in, cfg.enc_width,
                             cfg.enc_layers, lat_out, Init::xavier_uniform,
                             Init::zero, init_rng);
  lstm_ = nets::add_lstm(ps, prefix + "/lstm", zd + 2, cfg.recurrent_dim,
                         init_rng);
  prior_ = nets::add_block_mlp(ps, prefix + "/prior", cfg.recurrent_dim,
                               cfg.head_width, cfg.head_layers, lat_out,
                               Init::xavier_uniform, Init::zero, init_rng);
  reward_ = nets::add_block_mlp(ps, prefix + "/reward", cfg.recurrent_dim,
                                cfg.head_width, cfg.head_layers, cfg.bins,
                                Init::zero, Init::zero, init_rng);
  cont_ = nets::add_block_mlp(ps, prefix + "/cont", cfg.recurrent_dim,
                              cfg.head_width, cfg.head_layers, 1,
                              Init::xavier_uniform, Init::zero, init_rng);
  dec_ = nets::add_block_mlp(ps, prefix + "/dec", zd + cfg.recurrent_dim,
                             cfg.dec_width, cfg.dec_layers, cfg.obs_dim,
                             Init::xavier_uniform, Init::zero, init_rng);
  ids_ = ps.ids_with_prefix(prefix + "/");
}

WorldModel::LatentParams WorldModel::latent_params(Var raw) const {
  LatentParams p;
  if (cfg_.latent == LatentKind::gaussian) {
    p.a = diff::slice_cols(raw, 0, cfg_.latent_dim);
    p.b = diff::clamp_op(diff::slice_cols(raw, cfg_.latent_dim, cfg_.latent_dim),
                         kLogStdLo, kLogStdHi);
  } else {
    Var probs = diff::softmax_groups(raw, cfg_.latent_classes);
    p.a = diff::add_scalar(diff::scale(probs, 1.0 - cfg_.unimix),
                           cfg_.unimix / cfg_.latent_classes);
  }
  return p;
}

Var WorldModel::latent_kl(const LatentParams& q, const LatentParams& p,
                          bool stop_q, bool stop_p) const {
  auto sg = [](const Var& v, bool stop) {
    return stop ? diff::stop_gradient(v) : v;
  };
  if (cfg_.latent == LatentKind::gaussian)
    return diff::kl_diag_rows(sg(q.a, stop_q), sg(q.b, stop_q), sg(p.a, stop_p),
                              sg(p.b, stop_p));
  return diff::kl_categorical_rows(sg(q.a, stop_q), sg(p.a, stop_p),
                                   cfg_.latent_classes);
}

Tensor WorldModel::sample_latent_plain(const Tensor& a, const Tensor& b,
                                       Rng& rng, bool sample) const {
  if (cfg_.latent == LatentKind::gaussian) {
    Tensor z = a;
    if (sample)
      for (size_t i = 0; i < z.v.size(); ++i)
        z.v[i] += std::exp(b.v[i]) * rng.normal();
    return z;
  }
  const int k = cfg_.latent_classes;
  Tensor z = Tensor::zeros(a.rows, a.cols);
  for (int r = 0; r < a.rows; ++r) {
    for (int gstart = 0; gstart < a.cols; gstart += k) {
      int pick = 0;
      if (sample) {
        double u = rng.u01(), acc = 0.0;
        pick = k - 1;
        for (int j = 0; j < k; ++j) {
          acc += a.at(r, gstart + j);
          if (u < acc) {
            pick = j;
            break;
          }
        }
      } else {
        for (int j = 1; j < k; ++j)
          if (a.at(r, gstart + j) > a.at(r, gstart + pick)) pick = j;
      }
      z.at(r, gstart + pick) = 1.0;
    }
  }
  return z;
}

Var WorldModel::sample_latent_graph(const LatentParams& p, Graph& g,
                                    Rng& rng) const {
  if (cfg_.latent == LatentKind::gaussian) {
    Tensor noise = Tensor::zeros(p.a.rows(), p.a.cols());
    for (auto& x : noise.v) x = rng.normal();
    return diff::gaussian_sample(p.a, p.b, noise);
  }
  // Straight-through one-hot: value is the sample, gradient flows to probs.
  Tensor onehot = sample_latent_plain(p.a.val(), Tensor(), rng, true);
  return diff::add(diff::sub(g.constant(std::move(onehot)),
                             diff::stop_gradient(p.a)),
                   p.a);
}

WmUpdateResult WorldModel::update(const SequenceBatch& batch, Rng& rng) {
  check(batch.obs_dim == cfg_.obs_dim, "world model update: obs_dim mismatch");
  check(batch.B > 0 && batch.L > 0, "world model update: empty batch");
  const int B = batch.B, L = batch.L;
  const int R = cfg_.recurrent_dim, zd = cfg_.z_dim();

  Graph g;
  Binder bind(g, *ps_, true);
  Var h = g.constant(Tensor::zeros(B, R));
  Var c = g.constant(Tensor::zeros(B, R));
  Var z = g.constant(Tensor::zeros(B, zd));
  Var total = g.constant(Tensor::zeros(1, 1));

  WmUpdateResult out;
  out.posteriors.h = Tensor::zeros(B * L, R);
  out.posteriors.c = Tensor::zeros(B * L, R);
  out.posteriors.z = Tensor::zeros(B * L, zd);
  out.valid = Tensor::zeros(B * L, 1);

  double recon_sum = 0, kl_dyn_sum = 0, kl_rep_sum = 0;
  double rew_sum = 0, cont_sum = 0, mask_sum = 0;

  for (int t = 0; t < L; ++t) {
    if (t > 0) {
      Var x = diff::concat_cols({z, g.constant(batch.action[t - 1])});
      auto hc = nets::lstm_cell(bind, lstm_, x, h, c);
      h = hc.first;
      c = hc.second;
    }
    LatentParams pri = latent_params(nets::block_mlp(bind, prior_, h));
    Var rew_logits = nets::block_mlp(bind, reward_, h);
    Var cont_logits = nets::block_mlp(bind, cont_, h);

    Tensor obs_sym = symlog_tensor(batch.obs[t]);
    Var enc_in = cfg_.encoder_uses_h
                     ? diff::concat_cols({g.constant(obs_sym), h})
                     : g.constant(obs_sym);
    LatentParams post = latent_params(nets::block_mlp(bind, enc_, enc_in));
    z = sample_latent_graph(post, g, rng);

    Var kl_dyn = latent_kl(post, pri, true, false);
    Var kl_rep = latent_kl(post, pri, false, true);
    Var kl_term =
        diff::add(diff::scale(diff::clamp_min(kl_dyn, cfg_.free_nats),
                              0.5 * cfg_.kl_scale),
                  diff::scale(diff::clamp_min(kl_rep, cfg_.free_nats),
                              0.1 * cfg_.kl_scale));

    Var dec_out = nets::block_mlp(bind, dec_, diff::concat_cols({z, h}));
    Var recon =
        diff::sum_cols(diff::square(diff::sub(dec_out, g.constant(obs_sym))));
    Var rew_ce = diff::cross_entropy_rows(rew_logits, grid_.twohot(batch.reward[t]));
    Var cont_bce = diff::bce_logits_rows(cont_logits, batch.cont[t]);

    Var step = diff::add(diff::add(diff::scale(recon, cfg_.recon_scale), kl_term),
                         diff::add(rew_ce, cont_bce));
    total = diff::add(total, diff::sum_all(diff::mul(step, g.constant(batch.mask[t]))));

    const Tensor& m = batch.mask[t];
    recon_sum += masked_sum(recon.val(), m);
    kl_dyn_sum += masked_sum(kl_dyn.val(), m);
    kl_rep_sum += masked_sum(kl_rep.val(), m);
    rew_sum += masked_sum(rew_ce.val(), m);
    cont_sum += masked_sum(cont_bce.val(), m);
    for (int b = 0; b < B; ++b) mask_sum += m.at(b, 0);

    copy_rows(out.posteriors.h, t * B, h.val());
    copy_rows(out.posteriors.c, t * B, c.val());
    copy_rows(out.posteriors.z, t * B, z.val());
    for (int b = 0; b < B; ++b) out.valid.at(t * B + b, 0) = m.at(b, 0);
  }

  check(mask_sum > 0, "world model update: batch has no valid steps");
  Var loss = diff::scale(total, 1.0 / mask_sum);

  WmStats& st = out.stats;
  st.loss = loss.val().at(0, 0);
  st.recon = recon_sum / mask_sum;
  st.kl_dyn = kl_dyn_sum / mask_sum;
  st.kl_rep = kl_rep_sum / mask_sum;
  st.reward_ce = rew_sum / mask_sum;
  st.cont_bce = cont_sum / mask_sum;
  if (!std::isfinite(st.loss))
    fail("world model update: non-finite loss (recon=" +
         std::to_string(st.recon) + " kl_dyn=" + std::to_string(st.kl_dyn) +
         " kl_rep=" + std::to_string(st.kl_rep) + " reward_ce=" +
         std::to_string(st.reward_ce) + " cont_bce=" +
         std::to_string(st.cont_bce) + ")");

  g.backward(loss);
  st.grad_norm = ps_->grad_norm(ids_);
  if (!std::isfinite(st.grad_norm))
    fail("world model update: non-finite gradient norm");
  diff::AdamConfig acfg;
  acfg.lr = cfg_.lr;
  acfg.grad_clip = cfg_.grad_clip;
  ps_->adam_step(ids_, acfg);
  return out;
}

LatentState WorldModel::initial_state(int n) const {
  return {Tensor::zeros(n, cfg_.recurrent_dim),
          Tensor::zeros(n, cfg_.recurrent_dim), Tensor::zeros(n, cfg_.z_dim())};
}

WorldModel::DynOut WorldModel::dynamics_step(const LatentState& s,
                                             const Tensor& action) const {
  check(action.rows == s.rows() && action.cols == 2,
        "world model dynamics_step: action must be [n,2]");
  Graph g;
  Binder bind(g, *ps_, false);
  Var x = diff::concat_cols({g.constant(s.z), g.constant(action)});
  auto hc = nets::lstm_cell(bind, lstm_, x, g.constant(s.h), g.constant(s.c));
  LatentParams pri = latent_params(nets::block_mlp(bind, prior_, hc.first));
  Var rew_logits = nets::block_mlp(bind, reward_, hc.first);
  Var cont_p = diff::sigmoid(nets::block_mlp(bind, cont_, hc.first));

  DynOut out;
  out.h = hc.first.val();
  out.c = hc.second.val();
  out.prior_a = pri.a.val();
  if (pri.b.defined()) out.prior_b = pri.b.val();
  out.reward = grid_.decode(rew_logits.val());
  out.cont = cont_p.val();
  return out;
}

Tensor WorldModel::posterior_sample(const Tensor& obs, const Tensor& h,
                                    Rng& rng, bool sample) const {
  check(obs.cols == cfg_.obs_dim, "world model posterior: obs_dim mismatch");
  check(h.rows == obs.rows && h.cols == cfg_.recurrent_dim,
        "world model posterior: state shape mismatch");
  Graph g;
  Binder bind(g, *ps_, false);
  Var enc_in = cfg_.encoder_uses_h
                   ? diff::concat_cols({g.constant(symlog_tensor(obs)),
                                        g.constant(h)})
                   : g.constant(symlog_tensor(obs));
  LatentParams post = latent_params(nets::block_mlp(bind, enc_, enc_in));
  Tensor b = post.b.defined() ? post.b.val() : Tensor();
  return sample_latent_plain(post.a.val(), b, rng, sample);
}

Tensor WorldModel::prior_sample(const DynOut& d, Rng& rng, bool sample) const {
  return sample_latent_plain(d.prior_a, d.prior_b, rng, sample);
}

Tensor WorldModel::decode(const Tensor& z, const Tensor& h) const {
  Graph g;
  Binder bind(g, *ps_, false);
  Var out = nets::block_mlp(bind, dec_,
                            diff::concat_cols({g.constant(z), g.constant(h)}));
  return out.val();
}

Tensor WorldModel::features(const LatentState& s) {
  Tensor f = Tensor::zeros(s.h.rows, s.h.cols + s.z.cols);
  for (int r = 0; r < f.rows; ++r) {
    for (int c = 0; c < s.h.cols; ++c) f.at(r, c) = s.h.at(r, c);
    for (int c = 0; c < s.z.cols; ++c) f.at(r, s.h.cols + c) = s.z.at(r, c);
  }
  return f;
}

ImaginedTrajectory WorldModel::imagine(const LatentState& starts,
                                       const PolicyFn& policy, int horizon,
                                       Rng& rng) const {
  check(horizon > 0, "world model imagine: horizon must be positive");
  check(starts.rows() > 0, "world model imagine: no start states");
  ImaginedTrajectory tr;
  tr.n = starts.rows();
  tr.horizon = horizon;
  tr.feat_dim = feat_dim();
  tr.feats.reserve(horizon + 1);
  tr.pre_tanh.reserve(horizon);
  tr.rewards.reserve(horizon);
  tr.continues.reserve(horizon);

  LatentState s = starts;
  tr.feats.push_back(features(s));
  for (int tau = 0; tau < horizon; ++tau) {
    Tensor u = policy(tr.feats.back(), rng);
    check(u.rows == tr.n && u.cols == 2,
          "world model imagine: policy must return [n,2] pre-tanh actions");
    DynOut d = dynamics_step(s, nets::squash_actions_plain(u));
    Tensor z = prior_sample(d, rng, true);
    tr.pre_tanh.push_back(std::move(u));
    tr.rewards.push_back(d.reward);
    tr.continues.push_back(d.cont);
    s = LatentState{std::move(d.h), std::move(d.c), std::move(z)};
    tr.feats.push_back(features(s));
  }
  return tr;
}

}  // namespace navrl::wm
