#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "navrl/diff/graph.hpp"
#include "navrl/diff/tensor.hpp"

namespace navrl::diff {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_clip = 0.0;  // global-norm clip over the update group; 0 = off
};

// Named parameter tensors with gradients and Adam state. Entries keep a
// per-entry step count so groups updated at different cadences (delayed
// actors, targets never updated) stay correctly bias-corrected.
class ParamStore {
 public:
  int add(const std::string& name, Tensor init);
  int find(const std::string& name) const;  // -1 if absent
  int require_id(const std::string& name) const;

  int size() const { return static_cast<int>(entries_.size()); }
  const std::string& name(int id) const { return entries_[id].name; }
  Tensor& value(int id) { return entries_[id].value; }
  const Tensor& value(int id) const { return entries_[id].value; }
  Tensor& grad(int id) { return entries_[id].grad; }
  const Tensor& grad(int id) const { return entries_[id].grad; }

  void zero_grad();
  void zero_grad(const std::vector<int>& ids);
  double grad_norm(const std::vector<int>& ids) const;

  // Adam over the group; clips first (if configured), zeroes the group's
  // gradients afterwards.
  void adam_step(const std::vector<int>& ids, const AdamConfig& cfg);

  // dst <- (1 - tau) * dst + tau * src, entrywise over paired id lists.
  void soft_update(const std::vector<int>& dst, const std::vector<int>& src,
                   double tau);
  void copy_values(const std::vector<int>& dst, const std::vector<int>& src);

  int64_t count_parameters() const;
  int64_t count_parameters(const std::vector<int>& ids) const;

  // Binds the parameter into a graph. Trainable binds accumulate the node's
  // gradient into grad(id) during backward; frozen binds are constants.
  Var use(Graph& g, int id, bool trainable = true);

  std::vector<int> all_ids() const;
  std::vector<int> ids_with_prefix(const std::string& prefix) const;
  bool any_nonzero_grad(const std::vector<int>& ids) const;

 private:
  struct Entry {
    std::string name;
    Tensor value;
    Tensor grad;
    Tensor m, v;
    int64_t step = 0;
  };
  std::vector<Entry> entries_;
  std::unordered_map<std::string, int> index_;
};

// Per-graph cache of bound parameter Vars, so a parameter reused many times in
// one graph (LSTM unrolls) becomes a single leaf whose gradient accumulates.
class Binder {
 public:
  Binder(Graph& g, ParamStore& store, bool trainable)
      : g_(&g), store_(&store), trainable_(trainable) {}

  Var operator()(int id) {
    auto it = cache_.find(id);
    if (it != cache_.end()) return it->second;
    Var v = store_->use(*g_, id, trainable_);
    cache_.emplace(id, v);
    return v;
  }

  Graph& graph() { return *g_; }
  bool trainable() const { return trainable_; }

 private:
  Graph* g_;
  ParamStore* store_;
  bool trainable_;
  std::unordered_map<int, Var> cache_;
};

}  // namespace navrl::diff
