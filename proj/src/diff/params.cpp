#include "navrl/diff/params.hpp"

#include <cmath>

namespace navrl::diff {

int ParamStore::add(const std::string& name, Tensor init) {
  check(!name.empty(), "param store: empty name");
  check(index_.find(name) == index_.end(),
        "param store: duplicate name '" + name + "'");
  Entry e;
  e.name = name;
  e.grad = Tensor(init.rows, init.cols);
  e.m = Tensor(init.rows, init.cols);
  e.v = Tensor(init.rows, init.cols);
  e.value = std::move(init);
  entries_.push_back(std::move(e));
  int id = static_cast<int>(entries_.size()) - 1;
  index_.emplace(name, id);
  return id;
}

int ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

int ParamStore::require_id(const std::string& name) const {
  int id = find(name);
  check(id >= 0, "param store: unknown name '" + name + "'");
  return id;
}

void ParamStore::zero_grad() {
  for (auto& e : entries_)
    std::fill(e.grad.v.begin(), e.grad.v.end(), real(0));
}

void ParamStore::zero_grad(const std::vector<int>& ids) {
  for (int id : ids)
    std::fill(entries_[id].grad.v.begin(), entries_[id].grad.v.end(), real(0));
}

double ParamStore::grad_norm(const std::vector<int>& ids) const {
  double s = 0.0;
  for (int id : ids)
    for (real g : entries_[id].grad.v) s += static_cast<double>(g) * g;
  return std::sqrt(s);
}

void ParamStore::adam_step(const std::vector<int>& ids,
                           const AdamConfig& cfg) {
  double clip_scale = 1.0;
  if (cfg.grad_clip > 0.0) {
    double n = grad_norm(ids);
    if (n > cfg.grad_clip) clip_scale = cfg.grad_clip / n;
  }
  for (int id : ids) {
    Entry& e = entries_[id];
    e.step += 1;
    double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(e.step));
    double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(e.step));
    for (int i = 0; i < e.value.numel(); ++i) {
      double g = static_cast<double>(e.grad.v[i]) * clip_scale;
      double m = cfg.beta1 * e.m.v[i] + (1.0 - cfg.beta1) * g;
      double v = cfg.beta2 * e.v.v[i] + (1.0 - cfg.beta2) * g * g;
      e.m.v[i] = static_cast<real>(m);
      e.v.v[i] = static_cast<real>(v);
      double mhat = m / bc1;
      double vhat = v / bc2;
      e.value.v[i] -=
          static_cast<real>(cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
    std::fill(e.grad.v.begin(), e.grad.v.end(), real(0));
  }
}

void ParamStore::soft_update(const std::vector<int>& dst,
                             const std::vector<int>& src, double tau) {
  check(dst.size() == src.size(), "soft_update: id list size mismatch");
  for (size_t i = 0; i < dst.size(); ++i) {
    Entry& d = entries_[dst[i]];
    const Entry& s = entries_[src[i]];
    check(d.value.same_shape(s.value),
          "soft_update: shape mismatch " + d.name + " vs " + s.name);
    for (int j = 0; j < d.value.numel(); ++j)
      d.value.v[j] = static_cast<real>((1.0 - tau) * d.value.v[j] +
                                       tau * s.value.v[j]);
  }
}

void ParamStore::copy_values(const std::vector<int>& dst,
                             const std::vector<int>& src) {
  soft_update(dst, src, 1.0);
}

int64_t ParamStore::count_parameters() const {
  int64_t n = 0;
  for (const auto& e : entries_) n += e.value.numel();
  return n;
}

int64_t ParamStore::count_parameters(const std::vector<int>& ids) const {
  int64_t n = 0;
  for (int id : ids) n += entries_[id].value.numel();
  return n;
}

Var ParamStore::use(Graph& g, int id, bool trainable) {
  check(id >= 0 && id < size(), "param store: bad id");
  if (!trainable) return g.constant(entries_[id].value);
  return g.hooked_leaf(entries_[id].value, [this, id](const Tensor& grad) {
    Entry& e = entries_[id];
    for (int i = 0; i < e.grad.numel(); ++i) e.grad.v[i] += grad.v[i];
  });
}

std::vector<int> ParamStore::all_ids() const {
  std::vector<int> ids(entries_.size());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  return ids;
}

std::vector<int> ParamStore::ids_with_prefix(const std::string& prefix) const {
  std::vector<int> ids;
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name.rfind(prefix, 0) == 0)
      ids.push_back(static_cast<int>(i));
  return ids;
}

bool ParamStore::any_nonzero_grad(const std::vector<int>& ids) const {
  for (int id : ids)
    for (real g : entries_[id].grad.v)
      if (g != real(0)) return true;
  return false;
}

}  // namespace navrl::diff
