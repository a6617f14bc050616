#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ravnet/errors.hpp"
#include "ravnet/rng.hpp"

namespace ravnet {

/// N x C x H x W extents of a dense tensor, row-major in that order.
struct Dims {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  bool operator==(const Dims&) const = default;

  std::size_t count() const {
    return static_cast<std::size_t>(n) * static_cast<std::size_t>(c) *
           static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
  }

  std::size_t index(int in, int ic, int ih, int iw) const {
    return ((static_cast<std::size_t>(in) * c + ic) * h + ih) * static_cast<std::size_t>(w) + iw;
  }

  std::string str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
           std::to_string(w);
  }
};

inline constexpr Dims kScalarDims{1, 1, 1, 1};

template <typename T>
class Tape;

inline constexpr std::size_t kNoNode = static_cast<std::size_t>(-1);

template <typename T>
struct TensorImpl {
  Dims dims;
  std::vector<T> values;
  std::vector<T> grad;  // empty until backward reaches this tensor
  bool requires_grad = false;
  Tape<T>* tape = nullptr;  // live tape this tensor is recorded on, if any
  std::size_t node = kNoNode;
};

/// Shared handle to a dense 4-D tensor. Copies are shallow: they alias the
/// same storage, which is what lets a gradient written during backward be
/// visible through every handle to the same parameter.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  static Tensor zeros(Dims d) { return Tensor(make_impl(d)); }

  static Tensor ones(Dims d) { return full(d, T(1)); }

  static Tensor full(Dims d, T v) {
    Tensor t(make_impl(d));
    std::fill(t.impl_->values.begin(), t.impl_->values.end(), v);
    return t;
  }

  static Tensor scalar(T v) { return full(kScalarDims, v); }

  static Tensor from(Dims d, std::vector<T> vals) {
    if (vals.size() != d.count()) {
      throw ShapeError("tensor data length " + std::to_string(vals.size()) +
                       " does not match dims " + d.str());
    }
    Tensor t(make_impl(d));
    t.impl_->values = std::move(vals);
    return t;
  }

  static Tensor randn(Dims d, SplitMix64& rng, T mean = T(0), T stddev = T(1)) {
    Tensor t(make_impl(d));
    for (auto& v : t.impl_->values) {
      v = static_cast<T>(rng.normal(static_cast<double>(mean), static_cast<double>(stddev)));
    }
    return t;
  }

  static Tensor rand_uniform(Dims d, SplitMix64& rng, T lo, T hi) {
    Tensor t(make_impl(d));
    for (auto& v : t.impl_->values) {
      v = static_cast<T>(rng.uniform(static_cast<double>(lo), static_cast<double>(hi)));
    }
    return t;
  }

  bool valid() const { return impl_ != nullptr; }

  const Dims& dims() const { return impl_->dims; }
  std::size_t size() const { return impl_->values.size(); }

  std::span<T> values() { return impl_->values; }
  std::span<const T> values() const { return impl_->values; }

  T& at(int in, int ic, int ih, int iw) { return impl_->values[impl_->dims.index(in, ic, ih, iw)]; }
  T at(int in, int ic, int ih, int iw) const {
    return impl_->values[impl_->dims.index(in, ic, ih, iw)];
  }

  /// Value of a single-element tensor.
  T item() const {
    if (impl_->values.size() != 1) {
      throw ShapeError("item() called on non-scalar tensor of dims " + impl_->dims.str());
    }
    return impl_->values[0];
  }

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool on) {
    impl_->requires_grad = on;
    return *this;
  }

  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const T> grad() const { return impl_->grad; }

  /// Gradient storage, created zero-filled on first use.
  std::vector<T>& grad_storage() {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->values.size(), T(0));
    return impl_->grad;
  }

  void clear_grad() { impl_->grad.clear(); }

  /// Deep copy of the values, detached from any tape.
  Tensor clone() const {
    Tensor t(make_impl(impl_->dims));
    t.impl_->values = impl_->values;
    return t;
  }

  std::shared_ptr<TensorImpl<T>>& impl() { return impl_; }
  const std::shared_ptr<TensorImpl<T>>& impl() const { return impl_; }

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl<T>> impl) : impl_(std::move(impl)) {}

  static std::shared_ptr<TensorImpl<T>> make_impl(Dims d) {
    if (d.n < 1 || d.c < 1 || d.h < 1 || d.w < 1) {
      throw ShapeError("tensor dims must all be >= 1, got " + d.str());
    }
    auto impl = std::make_shared<TensorImpl<T>>();
    impl->dims = d;
    impl->values.assign(d.count(), T(0));
    return impl;
  }

  std::shared_ptr<TensorImpl<T>> impl_;
};

template <typename T>
Tensor<T> zeros_like(const Tensor<T>& t) {
  return Tensor<T>::zeros(t.dims());
}

template <typename T>
Tensor<T> ones_like(const Tensor<T>& t) {
  return Tensor<T>::ones(t.dims());
}

}  // namespace ravnet
