#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "ravnet/errors.hpp"
#include "ravnet/tensor.hpp"

namespace ravnet {

/// Ordered, named registry of model state. Trainable entries get
/// requires_grad set at registration so every forward pass records them;
/// non-trainable entries (batch-norm running statistics) ride along for
/// checkpointing only. Registration order is the serialization order.
template <typename T>
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor<T> tensor;
    bool trainable = true;
  };

  Tensor<T>& add(const std::string& name, Tensor<T> t, bool trainable = true) {
    if (index_.count(name)) {
      throw StateError("parameter '" + name + "' registered twice");
    }
    t.set_requires_grad(trainable);
    index_.emplace(name, entries_.size());
    entries_.push_back(Entry{name, std::move(t), trainable});
    return entries_.back().tensor;
  }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  Tensor<T>& get(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw StateError("unknown parameter '" + name + "'");
    return entries_[it->second].tensor;
  }

  const Tensor<T>& get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw StateError("unknown parameter '" + name + "'");
    return entries_[it->second].tensor;
  }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  std::size_t trainable_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.trainable ? 1 : 0;
    return n;
  }

  std::size_t value_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.tensor.size();
    return n;
  }

  void zero_grads() {
    for (auto& e : entries_) e.tensor.clear_grad();
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace ravnet
