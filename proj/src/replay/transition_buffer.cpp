#include "navrl/replay/transition_buffer.hpp"

#include <cstring>
#include <fstream>
#include <unordered_set>

namespace navrl::replay {

TransitionBuffer::TransitionBuffer(int obs_dim, size_t capacity)
    : obs_dim_(obs_dim), capacity_(capacity) {
  check(obs_dim >= 1, "transition buffer: obs_dim must be >= 1");
  check(capacity >= 1, "transition buffer: capacity must be >= 1");
  obs_.resize(capacity * obs_dim);
  next_obs_.resize(capacity * obs_dim);
  act_.resize(capacity * 2);
  rew_.resize(capacity);
  done_.resize(capacity);
}

void TransitionBuffer::append(const std::vector<double>& obs,
                              std::pair<double, double> act, double reward,
                              const std::vector<double>& next_obs, bool done) {
  check(static_cast<int>(obs.size()) == obs_dim_,
        "transition buffer: obs dim " + std::to_string(obs.size()) +
            " != " + std::to_string(obs_dim_));
  check(static_cast<int>(next_obs.size()) == obs_dim_,
        "transition buffer: next_obs dim mismatch");
  size_t slot;
  if (size_ < capacity_) {
    slot = (head_ + size_) % capacity_;
    ++size_;
  } else {
    slot = head_;  // overwrite oldest
    head_ = (head_ + 1) % capacity_;
  }
  for (int i = 0; i < obs_dim_; ++i) {
    obs_[slot * obs_dim_ + i] = static_cast<float>(obs[i]);
    next_obs_[slot * obs_dim_ + i] = static_cast<float>(next_obs[i]);
  }
  act_[slot * 2] = static_cast<float>(act.first);
  act_[slot * 2 + 1] = static_cast<float>(act.second);
  rew_[slot] = static_cast<float>(reward);
  done_[slot] = done ? 1 : 0;
}

TransitionBatch TransitionBuffer::sample(int batch, Rng& rng) const {
  check(size_ > 0, "transition buffer: sample from empty buffer");
  check(batch >= 1 && static_cast<size_t>(batch) <= size_,
        "transition buffer: batch " + std::to_string(batch) +
            " exceeds size " + std::to_string(size_));
  std::unordered_set<size_t> seen;
  std::vector<size_t> idx;
  idx.reserve(batch);
  while (idx.size() < static_cast<size_t>(batch)) {
    size_t k = rng.below(size_);
    if (seen.insert(k).second) idx.push_back(k);
  }
  TransitionBatch b;
  b.obs = Tensor(batch, obs_dim_);
  b.next_obs = Tensor(batch, obs_dim_);
  b.act = Tensor(batch, 2);
  b.rew = Tensor(batch, 1);
  b.done = Tensor(batch, 1);
  for (int r = 0; r < batch; ++r) {
    size_t slot = slot_offset(idx[r]);
    for (int c = 0; c < obs_dim_; ++c) {
      b.obs.at(r, c) = static_cast<real>(obs_[slot * obs_dim_ + c]);
      b.next_obs.at(r, c) = static_cast<real>(next_obs_[slot * obs_dim_ + c]);
    }
    b.act.at(r, 0) = static_cast<real>(act_[slot * 2]);
    b.act.at(r, 1) = static_cast<real>(act_[slot * 2 + 1]);
    b.rew.v[r] = static_cast<real>(rew_[slot]);
    b.done.v[r] = static_cast<real>(done_[slot]);
  }
  return b;
}

std::vector<uint8_t> TransitionBuffer::bytes() const {
  std::vector<uint8_t> out;
  auto put = [&out](const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  };
  uint64_t hdr[3] = {static_cast<uint64_t>(obs_dim_), capacity_, size_};
  put(hdr, sizeof(hdr));
  for (size_t i = 0; i < size_; ++i) {
    size_t slot = slot_offset(i);
    put(&obs_[slot * obs_dim_], sizeof(float) * obs_dim_);
    put(&act_[slot * 2], sizeof(float) * 2);
    put(&rew_[slot], sizeof(float));
    put(&next_obs_[slot * obs_dim_], sizeof(float) * obs_dim_);
    put(&done_[slot], 1);
  }
  return out;
}

void TransitionBuffer::dump(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  check(static_cast<bool>(out), "transition buffer: cannot open " + path);
  auto b = bytes();
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
  check(static_cast<bool>(out), "transition buffer: write failed: " + path);
}

}  // namespace navrl::replay
