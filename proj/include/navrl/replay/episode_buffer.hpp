#pragma once

#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

#include "navrl/diff/tensor.hpp"
#include "navrl/rng.hpp"

namespace navrl::replay {

using diff::Tensor;

// Time-major batch of fixed-length windows. Step t of sequence b holds
// (obs_t, action_t, reward_t, cont_t): action_t is the action taken FROM
// obs_t, reward_t is the reward received WITH obs_t (so reward_0 = 0), and
// cont_t is 0 exactly at terminal observations. mask marks real steps vs
// padding.
struct SequenceBatch {
  int B = 0, L = 0, obs_dim = 0;
  std::vector<Tensor> obs;     // L x [B, obs_dim]
  std::vector<Tensor> action;  // L x [B, 2]
  std::vector<Tensor> reward;  // L x [B, 1]
  std::vector<Tensor> cont;    // L x [B, 1]
  std::vector<Tensor> mask;    // L x [B, 1]
};

// Whole-episode store with a step-count capacity; evicts oldest episodes
// first. Episodes are appended through begin_episode()/step() as the env runs;
// an episode becomes sampleable once its terminal step arrives.
class EpisodeBuffer {
 public:
  EpisodeBuffer(int obs_dim, size_t capacity_steps);

  void begin_episode(const std::vector<double>& obs0);
  void step(std::pair<double, double> action, double reward,
            const std::vector<double>& next_obs, bool done);

  size_t episodes() const { return episodes_.size(); }
  size_t steps() const { return total_steps_; }
  bool ready() const { return !episodes_.empty(); }
  int obs_dim() const { return obs_dim_; }

  // B windows of length L: episode chosen length-weighted, start uniform;
  // windows reaching past the episode end are zero-padded with mask 0.
  SequenceBatch sample(int B, int L, Rng& rng) const;

  std::vector<uint8_t> bytes() const;

 private:
  struct Episode {
    std::vector<float> obs;   // len * obs_dim
    std::vector<float> act;   // len * 2
    std::vector<float> rew;   // len
    std::vector<uint8_t> cont;
    int len = 0;
  };

  int obs_dim_;
  size_t capacity_steps_;
  size_t total_steps_ = 0;
  std::deque<Episode> episodes_;
  Episode current_;
  bool in_episode_ = false;
};

}  // namespace navrl::replay
