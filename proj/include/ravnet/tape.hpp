#pragma once

#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

#include "ravnet/errors.hpp"
#include "ravnet/tensor.hpp"

namespace ravnet {

/// Reverse-mode gradient tape. Ops append nodes in evaluation order, so the
/// recording order is already topological; backward walks it once in
/// reverse. Constructing a Tape makes it the current tape for this thread
/// (tapes nest); destruction detaches every tensor recorded on it.
///
/// Lifetime contract: one tape per forward pass. Gradients live on the
/// tensors themselves and survive the tape, which is what lets the optimizer
/// consume them after the tape is gone.
template <typename T>
class Tape {
 public:
  Tape() : prev_(current_) { current_ = this; }

  ~Tape() {
    for (auto& weak : attached_) {
      if (auto impl = weak.lock()) {
        impl->tape = nullptr;
        impl->node = kNoNode;
      }
    }
    current_ = prev_;
  }

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* current() { return current_; }

  /// Temporarily disables recording on the current thread (used by the
  /// finite-difference oracle so probe evaluations stay off the tape).
  class Suspend {
   public:
    Suspend() : saved_(current_) { current_ = nullptr; }
    ~Suspend() { current_ = saved_; }
    Suspend(const Suspend&) = delete;
    Suspend& operator=(const Suspend&) = delete;

   private:
    Tape* saved_;
  };

  bool tracked(const Tensor<T>& t) const { return t.impl()->tape == this; }

  /// True when backward must deliver a gradient to t: either t is a leaf the
  /// caller marked trainable, or t is an intermediate already on this tape.
  /// Feeding another live tape's intermediate into an op is refused rather
  /// than silently treated as a constant.
  bool wants_grad(const Tensor<T>& t) const {
    Tape* owner = t.impl()->tape;
    if (owner != nullptr && owner != this) {
      throw TapeError("op input is recorded on a different tape");
    }
    return t.impl()->requires_grad || owner == this;
  }

  /// Records `out` as the product of an op over `inputs`. `fn` reads
  /// out.grad() and accumulates into each input's grad storage; it runs at
  /// most once, during backward, and only when out actually received a
  /// gradient.
  void record(std::initializer_list<Tensor<T>> inputs, Tensor<T>& out, std::function<void()> fn) {
    record_span(std::span<const Tensor<T>>(inputs.begin(), inputs.size()), out, std::move(fn));
  }

  /// Same as record() for ops whose input count is only known at runtime
  /// (concatenations).
  void record_many(const std::vector<Tensor<T>>& inputs, Tensor<T>& out, std::function<void()> fn) {
    record_span(std::span<const Tensor<T>>(inputs.data(), inputs.size()), out, std::move(fn));
  }

  /// Seeds d(loss)/d(loss) = 1 and propagates gradients to every tensor the
  /// loss depends on. Tensors not on a path to the loss keep their grad
  /// absent. Single use per tape.
  void backward(const Tensor<T>& loss) {
    if (spent_) throw TapeError("backward already ran on this tape");
    if (!(loss.dims() == kScalarDims)) {
      throw ShapeError("backward requires a scalar loss, got dims " + loss.dims().str());
    }
    if (!tracked(loss)) throw TapeError("loss tensor is not recorded on this tape");
    spent_ = true;

    std::vector<char> reachable(nodes_.size(), 0);
    const std::size_t root = loss.impl()->node;
    reachable[root] = 1;
    for (std::size_t id = root + 1; id-- > 0;) {
      if (!reachable[id]) continue;
      for (std::size_t in : nodes_[id].inputs) reachable[in] = 1;
    }

    loss.impl()->grad.assign(1, T(1));
    for (std::size_t id = root + 1; id-- > 0;) {
      if (!reachable[id] || !nodes_[id].fn) continue;
      if (auto out = nodes_[id].out.lock(); out && !out->grad.empty()) {
        nodes_[id].fn();
      }
    }
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<std::size_t> inputs;
    std::function<void()> fn;             // empty for leaves
    std::weak_ptr<TensorImpl<T>> out;
  };

  void record_span(std::span<const Tensor<T>> inputs, Tensor<T>& out, std::function<void()> fn) {
    Node node;
    node.fn = std::move(fn);
    for (const auto& in : inputs) {
      if (wants_grad(in)) node.inputs.push_back(attach(in));
    }
    auto& impl = *out.impl();
    if (impl.tape != nullptr) {
      throw TapeError("op output is already recorded on a tape");
    }
    impl.tape = this;
    impl.node = nodes_.size();
    attached_.push_back(out.impl());
    node.out = out.impl();
    nodes_.push_back(std::move(node));
  }

  /// Ensures t has a node id on this tape, creating a leaf node if needed.
  std::size_t attach(const Tensor<T>& t) {
    auto& impl = *t.impl();
    if (impl.tape == this) return impl.node;
    if (impl.tape != nullptr) {
      throw TapeError("tensor is already recorded on a different tape");
    }
    impl.tape = this;
    impl.node = nodes_.size();
    attached_.push_back(t.impl());
    Node leaf;
    leaf.out = t.impl();
    nodes_.push_back(std::move(leaf));
    return impl.node;
  }

  std::vector<Node> nodes_;
  std::vector<std::weak_ptr<TensorImpl<T>>> attached_;
  Tape* prev_ = nullptr;
  bool spent_ = false;

  inline static thread_local Tape* current_ = nullptr;
};

}  // namespace ravnet
