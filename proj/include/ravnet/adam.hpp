#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ravnet/checkpoint.hpp"
#include "ravnet/errors.hpp"
#include "ravnet/params.hpp"

namespace ravnet {

template <typename T>
struct AdamConfig {
  T lr = T(1e-4);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
};

/// Standard Adam with bias correction. Moment buffers are keyed by parameter
/// name and created lazily at the first step; iteration follows the store's
/// registration order, so updates are deterministic.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig<T> cfg = {}) : cfg_(cfg) {}

  void step(ParamStore<T>& store) {
    ++t_;
    const double c1 = 1.0 - std::pow(double(cfg_.beta1), double(t_));
    const double c2 = 1.0 - std::pow(double(cfg_.beta2), double(t_));
    for (auto& e : store.entries()) {
      if (!e.trainable) continue;
      if (!e.tensor.has_grad()) {
        throw StateError("missing gradient for parameter '" + e.name + "'");
      }
      auto g = e.tensor.grad();
      auto& mo = moments_[e.name];
      if (mo.m.empty()) {
        mo.m.assign(e.tensor.size(), T(0));
        mo.v.assign(e.tensor.size(), T(0));
      }
      auto p = e.tensor.values();
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double gi = double(g[i]);
        const double m = double(cfg_.beta1) * double(mo.m[i]) +
                         (1.0 - double(cfg_.beta1)) * gi;
        const double v = double(cfg_.beta2) * double(mo.v[i]) +
                         (1.0 - double(cfg_.beta2)) * gi * gi;
        mo.m[i] = T(m);
        mo.v[i] = T(v);
        const double mhat = m / c1;
        const double vhat = v / c2;
        p[i] = T(double(p[i]) -
                 double(cfg_.lr) * mhat / (std::sqrt(vhat) + double(cfg_.eps)));
      }
    }
  }

  std::uint64_t step_count() const { return t_; }
  void set_step_count(std::uint64_t t) { t_ = t; }
  const AdamConfig<T>& config() const { return cfg_; }

  /// Moment records in store registration order, "<name>.m" then "<name>.v"
  /// per trainable parameter. Parameters never stepped serialize as zeros.
  std::vector<TensorRecord> export_moments(const ParamStore<T>& store) const {
    std::vector<TensorRecord> out;
    for (const auto& e : store.entries()) {
      if (!e.trainable) continue;
      auto it = moments_.find(e.name);
      TensorRecord m, v;
      m.name = e.name + ".m";
      v.name = e.name + ".v";
      m.dims = v.dims = e.tensor.dims();
      m.data.resize(e.tensor.size(), 0.0f);
      v.data.resize(e.tensor.size(), 0.0f);
      if (it != moments_.end()) {
        for (std::size_t i = 0; i < e.tensor.size(); ++i) {
          m.data[i] = float(it->second.m[i]);
          v.data[i] = float(it->second.v[i]);
        }
      }
      out.push_back(std::move(m));
      out.push_back(std::move(v));
    }
    return out;
  }

  void import_moments(const ParamStore<T>& store,
                      const std::vector<TensorRecord>& records,
                      std::uint64_t step_count) {
    std::unordered_map<std::string, const TensorRecord*> by_name;
    for (const auto& r : records) by_name.emplace(r.name, &r);
    moments_.clear();
    for (const auto& e : store.entries()) {
      if (!e.trainable) continue;
      auto mi = by_name.find(e.name + ".m");
      auto vi = by_name.find(e.name + ".v");
      if (mi == by_name.end() || vi == by_name.end()) {
        throw StateError("checkpoint is missing moments for '" + e.name + "'");
      }
      if (!(mi->second->dims == e.tensor.dims()) ||
          !(vi->second->dims == e.tensor.dims())) {
        throw StateError("moment dims mismatch for '" + e.name + "'");
      }
      auto& mo = moments_[e.name];
      mo.m.resize(e.tensor.size());
      mo.v.resize(e.tensor.size());
      for (std::size_t i = 0; i < e.tensor.size(); ++i) {
        mo.m[i] = T(mi->second->data[i]);
        mo.v[i] = T(vi->second->data[i]);
      }
    }
    t_ = step_count;
  }

 private:
  struct Moment {
    std::vector<T> m;
    std::vector<T> v;
  };

  AdamConfig<T> cfg_;
  std::uint64_t t_ = 0;
  std::unordered_map<std::string, Moment> moments_;
};

}  // namespace ravnet
