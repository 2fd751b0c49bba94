#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "navrl/diff/tensor.hpp"
#include "navrl/rng.hpp"

namespace navrl::replay {

using diff::Tensor;

struct TransitionBatch {
  Tensor obs, act, rew, next_obs, done;  // [B,D] [B,2] [B,1] [B,D] [B,1]
};

// Fixed-capacity FIFO ring of (s, a, r, s', done), stored as float32.
class TransitionBuffer {
 public:
  TransitionBuffer(int obs_dim, size_t capacity);

  void append(const std::vector<double>& obs, std::pair<double, double> act,
              double reward, const std::vector<double>& next_obs, bool done);

  size_t size() const { return size_; }
  size_t capacity() const { return capacity_; }
  int obs_dim() const { return obs_dim_; }

  // Uniform sampling without replacement; batch must be in [1, size()].
  TransitionBatch sample(int batch, Rng& rng) const;

  std::vector<uint8_t> bytes() const;  // deterministic serialization
  void dump(const std::string& path) const;

 private:
  size_t slot_offset(size_t i) const {  // i-th oldest -> physical slot
    return (head_ + i) % capacity_;
  }

  int obs_dim_;
  size_t capacity_;
  size_t size_ = 0;
  size_t head_ = 0;  // oldest element
  std::vector<float> obs_, next_obs_, act_, rew_;
  std::vector<uint8_t> done_;
};

}  // namespace navrl::replay
