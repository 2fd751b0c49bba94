#pragma once

#include <functional>
#include <string>
#include <vector>

#include "navrl/diff/params.hpp"
#include "navrl/diff/regression.hpp"
#include "navrl/nets/lstm.hpp"
#include "navrl/nets/mlp.hpp"
#include "navrl/replay/episode_buffer.hpp"

namespace navrl::wm {

using diff::AdamConfig;
using diff::BinGrid;
using diff::ParamStore;
using diff::Tensor;
using replay::SequenceBatch;

enum class LatentKind { gaussian, categorical };

struct WMConfig {
  int obs_dim = 14;
  int enc_width = 512, enc_layers = 2;
  int dec_width = 512, dec_layers = 2;
  int head_width = 512, head_layers = 1;
  int recurrent_dim = 256;
  int latent_dim = 32;        // gaussian dims, or categorical group count
  int latent_classes = 32;    // categorical only
  LatentKind latent = LatentKind::gaussian;
  bool encoder_uses_h = true; // false = observation-only VAE encoder
  double unimix = 0.01;       // categorical only

  double free_nats = 1.0;
  double kl_scale = 1.0;
  double recon_scale = 1.0;
  double lr = 1e-4;
  double grad_clip = 100.0;

  int bins = 41;
  double bin_lo = -15.0, bin_hi = 150.0;  // raw reward envelope of the grid

  int z_dim() const {
    return latent == LatentKind::gaussian ? latent_dim
                                          : latent_dim * latent_classes;
  }
  int feat_dim() const { return recurrent_dim + z_dim(); }
};

// Stacked latent states, one row per sequence element.
struct LatentState {
  Tensor h, c, z;
  int rows() const { return h.rows; }
};

struct WmStats {
  double loss = 0, recon = 0, kl_dyn = 0, kl_rep = 0;
  double reward_ce = 0, cont_bce = 0, grad_norm = 0;
};

struct WmUpdateResult {
  WmStats stats;
  LatentState posteriors;  // [B*L] rows, row t*B+b is step t of sequence b
  Tensor valid;            // [B*L, 1] mask of real (non-padded) steps
};

struct ImaginedTrajectory {
  int n = 0, horizon = 0, feat_dim = 0;
  std::vector<Tensor> feats;     // H+1 x [n, feat]
  std::vector<Tensor> pre_tanh;  // H x [n, 2], actor samples before squashing
  std::vector<Tensor> rewards;   // H x [n, 1], raw-space predictions at tau+1
  std::vector<Tensor> continues; // H x [n, 1], continue probabilities at tau+1
};

// Pre-tanh action sampler used during imagination; receives features [n,feat].
using PolicyFn = std::function<Tensor(const Tensor& feats, Rng& rng)>;

// MLP-VAE + LSTM latent dynamics with reward, continue, and decoder heads.
// Training runs teacher-forced over replayed windows; imagination rolls the
// prior forward with the model frozen (plain tensors, no gradient flow).
class WorldModel {
 public:
  WorldModel(ParamStore& ps, const WMConfig& cfg, Rng& init_rng,
             const std::string& prefix = "wm");

  const WMConfig& config() const { return cfg_; }
  const std::vector<int>& param_ids() const { return ids_; }
  const BinGrid& reward_grid() const { return grid_; }
  int feat_dim() const { return cfg_.feat_dim(); }

  WmUpdateResult update(const SequenceBatch& batch, Rng& rng);

  LatentState initial_state(int n) const;

  struct DynOut {
    Tensor h, c;             // advanced deterministic state
    Tensor prior_a, prior_b; // gaussian: mu / log-sigma; categorical: probs / -
    Tensor reward;           // decoded raw-space reward [n,1]
    Tensor cont;             // continue probability [n,1]
  };
  // One deterministic-dynamics step under frozen parameters (plain tensors).
  DynOut dynamics_step(const LatentState& s, const Tensor& action) const;

  // Posterior latent for an observation given the deterministic state.
  Tensor posterior_sample(const Tensor& obs, const Tensor& h, Rng& rng,
                          bool sample) const;
  Tensor prior_sample(const DynOut& d, Rng& rng, bool sample) const;

  // Decoder output in symlog space (plain), for evaluation and tests.
  Tensor decode(const Tensor& z, const Tensor& h) const;

  static Tensor features(const LatentState& s);

  ImaginedTrajectory imagine(const LatentState& starts, const PolicyFn& policy,
                             int horizon, Rng& rng) const;

 private:
  struct LatentParams {
    diff::Var a, b;  // gaussian: mu / log-sigma; categorical: probs / unused
  };
  LatentParams latent_params(diff::Var raw) const;
  diff::Var latent_kl(const LatentParams& q, const LatentParams& p,
                      bool stop_q, bool stop_p) const;
  Tensor sample_latent_plain(const Tensor& a, const Tensor& b, Rng& rng,
                             bool sample) const;
  diff::Var sample_latent_graph(const LatentParams& p, diff::Graph& g,
                                Rng& rng) const;

  ParamStore* ps_;
  WMConfig cfg_;
  BinGrid grid_;
  nets::BlockMlpIds enc_, dec_, prior_, reward_, cont_;
  nets::LstmIds lstm_;
  std::vector<int> ids_;
};

}  // namespace navrl::wm
