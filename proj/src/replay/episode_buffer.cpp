#include "navrl/replay/episode_buffer.hpp"

namespace navrl::replay {

EpisodeBuffer::EpisodeBuffer(int obs_dim, size_t capacity_steps)
    : obs_dim_(obs_dim), capacity_steps_(capacity_steps) {
  check(obs_dim >= 1, "episode buffer: obs_dim must be >= 1");
  check(capacity_steps >= 1, "episode buffer: capacity must be >= 1");
}

void EpisodeBuffer::begin_episode(const std::vector<double>& obs0) {
  check(static_cast<int>(obs0.size()) == obs_dim_,
        "episode buffer: obs dim mismatch");
  check(!in_episode_, "episode buffer: begin_episode during open episode");
  current_ = Episode{};
  current_.obs.insert(current_.obs.end(), obs0.begin(), obs0.end());
  current_.act.insert(current_.act.end(), {0.0f, 0.0f});
  current_.rew.push_back(0.0f);
  current_.cont.push_back(1);
  current_.len = 1;
  in_episode_ = true;
}

void EpisodeBuffer::step(std::pair<double, double> action, double reward,
                         const std::vector<double>& next_obs, bool done) {
  check(in_episode_, "episode buffer: step() without begin_episode()");
  check(static_cast<int>(next_obs.size()) == obs_dim_,
        "episode buffer: obs dim mismatch");
  // The action belongs to the step we are leaving.
  current_.act[(current_.len - 1) * 2] = static_cast<float>(action.first);
  current_.act[(current_.len - 1) * 2 + 1] = static_cast<float>(action.second);
  current_.obs.insert(current_.obs.end(), next_obs.begin(), next_obs.end());
  current_.act.insert(current_.act.end(), {0.0f, 0.0f});
  current_.rew.push_back(static_cast<float>(reward));
  current_.cont.push_back(done ? 0 : 1);
  current_.len += 1;
  if (done) {
    total_steps_ += current_.len;
    episodes_.push_back(std::move(current_));
    current_ = Episode{};
    in_episode_ = false;
    while (total_steps_ > capacity_steps_ && episodes_.size() > 1) {
      total_steps_ -= episodes_.front().len;
      episodes_.pop_front();
    }
  }
}

SequenceBatch EpisodeBuffer::sample(int B, int L, Rng& rng) const {
  check(ready(), "episode buffer: sample with no stored episodes");
  check(B >= 1 && L >= 1, "episode buffer: bad batch/window size");
  SequenceBatch out;
  out.B = B;
  out.L = L;
  out.obs_dim = obs_dim_;
  out.obs.assign(L, Tensor(B, obs_dim_));
  out.action.assign(L, Tensor(B, 2));
  out.reward.assign(L, Tensor(B, 1));
  out.cont.assign(L, Tensor(B, 1));
  out.mask.assign(L, Tensor(B, 1));

  for (int b = 0; b < B; ++b) {
    // Length-weighted episode pick: a uniform step index, mapped to its
    // episode.
    size_t pick = rng.below(total_steps_);
    size_t ep_idx = 0;
    while (pick >= static_cast<size_t>(episodes_[ep_idx].len)) {
      pick -= episodes_[ep_idx].len;
      ++ep_idx;
    }
    const Episode& ep = episodes_[ep_idx];
    int start = static_cast<int>(rng.below(ep.len));
    for (int t = 0; t < L; ++t) {
      int src = start + t;
      if (src >= ep.len) break;  // rest stays zero with mask 0
      for (int c = 0; c < obs_dim_; ++c)
        out.obs[t].at(b, c) = static_cast<real>(ep.obs[src * obs_dim_ + c]);
      out.action[t].at(b, 0) = static_cast<real>(ep.act[src * 2]);
      out.action[t].at(b, 1) = static_cast<real>(ep.act[src * 2 + 1]);
      out.reward[t].v[b] = static_cast<real>(ep.rew[src]);
      out.cont[t].v[b] = static_cast<real>(ep.cont[src]);
      out.mask[t].v[b] = real(1);
    }
  }
  return out;
}

std::vector<uint8_t> EpisodeBuffer::bytes() const {
  std::vector<uint8_t> out;
  auto put = [&out](const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  };
  uint64_t hdr[3] = {static_cast<uint64_t>(obs_dim_),
                     static_cast<uint64_t>(episodes_.size()), total_steps_};
  put(hdr, sizeof(hdr));
  for (const Episode& ep : episodes_) {
    uint64_t len = static_cast<uint64_t>(ep.len);
    put(&len, sizeof(len));
    put(ep.obs.data(), ep.obs.size() * sizeof(float));
    put(ep.act.data(), ep.act.size() * sizeof(float));
    put(ep.rew.data(), ep.rew.size() * sizeof(float));
    put(ep.cont.data(), ep.cont.size());
  }
  return out;
}

}  // namespace navrl::replay
