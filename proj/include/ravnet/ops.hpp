#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ravnet/errors.hpp"
#include "ravnet/tape.hpp"
#include "ravnet/tensor.hpp"

namespace ravnet {

namespace detail {

inline void require_same_dims(const Dims& a, const Dims& b, const char* op) {
  if (!(a == b)) {
    throw ShapeError(std::string(op) + ": dims mismatch " + a.str() + " vs " + b.str());
  }
}

inline void require_matrix_view(const Dims& d, const char* op) {
  if (d.n != 1 || d.c != 1) {
    throw ShapeError(std::string(op) + ": expected a matrix view (1x1xHxW), got " + d.str());
  }
}

template <typename T>
void axpy(std::vector<T>& dst, std::span<const T> g) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
}

/// Records `out` on the current tape when any input is being tracked.
template <typename T>
void maybe_record(std::initializer_list<Tensor<T>> inputs, Tensor<T>& out,
                  std::function<void()> fn) {
  Tape<T>* tp = Tape<T>::current();
  if (!tp) return;
  bool any = false;
  for (const auto& t : inputs) any = any || tp->wants_grad(t);
  if (any) tp->record(inputs, out, std::move(fn));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Binary elementwise ops
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_dims(a.dims(), b.dims(), "add");
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  const auto av = a.values();
  const auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
  if (Tape<T>* tp = Tape<T>::current()) {
    const bool ga = tp->wants_grad(a), gb = tp->wants_grad(b);
    if (ga || gb) {
      tp->record({a, b}, out, [a = a, b = b, out, ga, gb]() mutable {
        const auto g = out.grad();
        if (ga) detail::axpy(a.grad_storage(), g);
        if (gb) detail::axpy(b.grad_storage(), g);
      });
    }
  }
  return out;
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_dims(a.dims(), b.dims(), "sub");
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  const auto av = a.values();
  const auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
  if (Tape<T>* tp = Tape<T>::current()) {
    const bool ga = tp->wants_grad(a), gb = tp->wants_grad(b);
    if (ga || gb) {
      tp->record({a, b}, out, [a = a, b = b, out, ga, gb]() mutable {
        const auto g = out.grad();
        if (ga) detail::axpy(a.grad_storage(), g);
        if (gb) {
          auto& gs = b.grad_storage();
          for (std::size_t i = 0; i < gs.size(); ++i) gs[i] -= g[i];
        }
      });
    }
  }
  return out;
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_dims(a.dims(), b.dims(), "mul");
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  const auto av = a.values();
  const auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  if (Tape<T>* tp = Tape<T>::current()) {
    const bool ga = tp->wants_grad(a), gb = tp->wants_grad(b);
    if (ga || gb) {
      tp->record({a, b}, out, [a = a, b = b, out, ga, gb]() mutable {
        const auto g = out.grad();
        const auto av2 = a.values();
        const auto bv2 = b.values();
        if (ga) {
          auto& gs = a.grad_storage();
          for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += g[i] * bv2[i];
        }
        if (gb) {
          auto& gs = b.grad_storage();
          for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += g[i] * av2[i];
        }
      });
    }
  }
  return out;
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_same_dims(a.dims(), b.dims(), "div");
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  const auto av = a.values();
  const auto bv = b.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] / bv[i];
  if (Tape<T>* tp = Tape<T>::current()) {
    const bool ga = tp->wants_grad(a), gb = tp->wants_grad(b);
    if (ga || gb) {
      tp->record({a, b}, out, [a = a, b = b, out, ga, gb]() mutable {
        const auto g = out.grad();
        const auto av2 = a.values();
        const auto bv2 = b.values();
        if (ga) {
          auto& gs = a.grad_storage();
          for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += g[i] / bv2[i];
        }
        if (gb) {
          auto& gs = b.grad_storage();
          for (std::size_t i = 0; i < gs.size(); ++i) {
            gs[i] -= g[i] * av2[i] / (bv2[i] * bv2[i]);
          }
        }
      });
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Unary elementwise ops
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T k) {
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  const auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = k * av[i];
  detail::maybe_record({a}, out, [a = a, out, k]() mutable {
    const auto g = out.grad();
    auto& gs = a.grad_storage();
    for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += k * g[i];
  });
  return out;
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, T k) {
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  const auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + k;
  detail::maybe_record({a}, out, [a = a, out]() mutable {
    detail::axpy(a.grad_storage(), out.grad());
  });
  return out;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& a) {
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  const auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] > T(0) ? av[i] : T(0);
  detail::maybe_record({a}, out, [a = a, out]() mutable {
    const auto g = out.grad();
    const auto av2 = a.values();
    auto& gs = a.grad_storage();
    for (std::size_t i = 0; i < gs.size(); ++i) {
      if (av2[i] > T(0)) gs[i] += g[i];
    }
  });
  return out;
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& a) {
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  const auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = T(1) / (T(1) + std::exp(-av[i]));
  detail::maybe_record({a}, out, [a = a, out]() mutable {
    const auto g = out.grad();
    const auto yv = out.values();
    auto& gs = a.grad_storage();
    for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += g[i] * yv[i] * (T(1) - yv[i]);
  });
  return out;
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& a) {
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  const auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::tanh(av[i]);
  detail::maybe_record({a}, out, [a = a, out]() mutable {
    const auto g = out.grad();
    const auto yv = out.values();
    auto& gs = a.grad_storage();
    for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += g[i] * (T(1) - yv[i] * yv[i]);
  });
  return out;
}

template <typename T>
Tensor<T> log(const Tensor<T>& a) {
  const auto av = a.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (!(av[i] > T(0))) {
      throw DomainError("log: input element " + std::to_string(i) + " is not positive (" +
                        std::to_string(static_cast<double>(av[i])) + ")");
    }
  }
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::log(av[i]);
  detail::maybe_record({a}, out, [a = a, out]() mutable {
    const auto g = out.grad();
    const auto av2 = a.values();
    auto& gs = a.grad_storage();
    for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += g[i] / av2[i];
  });
  return out;
}

/// Clamps to [lo, hi]; gradient passes through inside the band and is zero
/// outside.
template <typename T>
Tensor<T> clamp(const Tensor<T>& a, T lo, T hi) {
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  const auto av = a.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = std::min(hi, std::max(lo, av[i]));
  detail::maybe_record({a}, out, [a = a, out, lo, hi]() mutable {
    const auto g = out.grad();
    const auto av2 = a.values();
    auto& gs = a.grad_storage();
    for (std::size_t i = 0; i < gs.size(); ++i) {
      if (av2[i] >= lo && av2[i] <= hi) gs[i] += g[i];
    }
  });
  return out;
}

/// Multiplies every element of `a` by the single-element tensor `s`. Both
/// operands receive gradients, which is how the attention blend weight
/// learns.
template <typename T>
Tensor<T> scale_by(const Tensor<T>& a, const Tensor<T>& s) {
  if (!(s.dims() == kScalarDims)) {
    throw ShapeError("scale_by: scale factor must be scalar, got " + s.dims().str());
  }
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  const auto av = a.values();
  const T k = s.values()[0];
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = k * av[i];
  if (Tape<T>* tp = Tape<T>::current()) {
    const bool ga = tp->wants_grad(a), gs_flag = tp->wants_grad(s);
    if (ga || gs_flag) {
      tp->record({a, s}, out, [a = a, s = s, out, ga, gs_flag]() mutable {
        const auto g = out.grad();
        const auto av2 = a.values();
        const T k2 = s.values()[0];
        if (ga) {
          auto& gs = a.grad_storage();
          for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += k2 * g[i];
        }
        if (gs_flag) {
          T acc = T(0);
          for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * av2[i];
          s.grad_storage()[0] += acc;
        }
      });
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Matrix-view ops (tensors with n == c == 1)
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require_matrix_view(a.dims(), "matmul");
  detail::require_matrix_view(b.dims(), "matmul");
  const int m = a.dims().h, k = a.dims().w, k2 = b.dims().h, n = b.dims().w;
  if (k != k2) {
    throw ShapeError("matmul: inner dimensions disagree, " + a.dims().str() + " * " +
                     b.dims().str());
  }
  Tensor<T> out = Tensor<T>::zeros({1, 1, m, n});
  const T* pa = a.values().data();
  const T* pb = b.values().data();
  T* po = out.values().data();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      T acc = T(0);
      for (int t = 0; t < k; ++t) acc += pa[i * k + t] * pb[t * n + j];
      po[i * n + j] = acc;
    }
  }
  if (Tape<T>* tp = Tape<T>::current()) {
    const bool ga = tp->wants_grad(a), gb = tp->wants_grad(b);
    if (ga || gb) {
      tp->record({a, b}, out, [a = a, b = b, out, ga, gb, m, k, n]() mutable {
        const T* g = out.grad().data();
        const T* pa2 = a.values().data();
        const T* pb2 = b.values().data();
        if (ga) {  // da = g * b^T
          auto& gs = a.grad_storage();
          for (int i = 0; i < m; ++i) {
            for (int t = 0; t < k; ++t) {
              T acc = T(0);
              for (int j = 0; j < n; ++j) acc += g[i * n + j] * pb2[t * n + j];
              gs[i * k + t] += acc;
            }
          }
        }
        if (gb) {  // db = a^T * g
          auto& gs = b.grad_storage();
          for (int t = 0; t < k; ++t) {
            for (int j = 0; j < n; ++j) {
              T acc = T(0);
              for (int i = 0; i < m; ++i) acc += pa2[i * k + t] * g[i * n + j];
              gs[t * n + j] += acc;
            }
          }
        }
      });
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rearrangement ops
// ---------------------------------------------------------------------------

/// Reinterprets the flat row-major data under new dims (element count must
/// match). Backward is the inverse rearrangement, i.e. the identity on the
/// flat order.
template <typename T>
Tensor<T> reshape(const Tensor<T>& a, Dims new_dims) {
  if (new_dims.count() != a.dims().count()) {
    throw ShapeError("reshape: element count mismatch, " + a.dims().str() + " -> " +
                     new_dims.str());
  }
  Tensor<T> out = Tensor<T>::zeros(new_dims);
  const auto av = a.values();
  auto ov = out.values();
  std::copy(av.begin(), av.end(), ov.begin());
  detail::maybe_record({a}, out, [a = a, out]() mutable {
    detail::axpy(a.grad_storage(), out.grad());
  });
  return out;
}

/// Swaps the last two axes: out[n][c][i][j] = in[n][c][j][i].
template <typename T>
Tensor<T> transpose_last2(const Tensor<T>& a) {
  const Dims d = a.dims();
  Tensor<T> out = Tensor<T>::zeros({d.n, d.c, d.w, d.h});
  for (int in = 0; in < d.n; ++in) {
    for (int ic = 0; ic < d.c; ++ic) {
      for (int ih = 0; ih < d.h; ++ih) {
        for (int iw = 0; iw < d.w; ++iw) {
          out.at(in, ic, iw, ih) = a.at(in, ic, ih, iw);
        }
      }
    }
  }
  detail::maybe_record({a}, out, [a = a, out, d]() mutable {
    auto& gs = a.grad_storage();
    const auto g = out.grad();
    const Dims od = out.dims();
    for (int in = 0; in < d.n; ++in) {
      for (int ic = 0; ic < d.c; ++ic) {
        for (int ih = 0; ih < d.h; ++ih) {
          for (int iw = 0; iw < d.w; ++iw) {
            gs[d.index(in, ic, ih, iw)] += g[od.index(in, ic, iw, ih)];
          }
        }
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Concatenation / slicing
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw EmptyInputError("concat_channels: empty input sequence");
  const Dims first = parts.front().dims();
  int total_c = 0;
  for (const auto& p : parts) {
    const Dims d = p.dims();
    if (d.n != first.n || d.h != first.h || d.w != first.w) {
      throw ShapeError("concat_channels: batch/spatial mismatch " + first.str() + " vs " +
                       d.str());
    }
    total_c += d.c;
  }
  Tensor<T> out = Tensor<T>::zeros({first.n, total_c, first.h, first.w});
  const std::size_t plane = static_cast<std::size_t>(first.h) * first.w;
  // Copy part k's channels into [offset, offset + c_k) for every sample.
  T* po = out.values().data();
  int offset = 0;
  for (const auto& p : parts) {
    const T* pp = p.values().data();
    const int pc = p.dims().c;
    for (int in = 0; in < first.n; ++in) {
      std::copy(pp + in * pc * plane, pp + (in + 1) * pc * plane,
                po + (static_cast<std::size_t>(in) * total_c + offset) * plane);
    }
    offset += pc;
  }
  if (Tape<T>* tp = Tape<T>::current()) {
    bool any = false;
    std::vector<char> need(parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) {
      need[k] = tp->wants_grad(parts[k]);
      any = any || need[k];
    }
    if (any) {
      std::vector<Tensor<T>> held = parts;
      Tensor<T> out_h = out;
      tp->record_many(parts, out, [held, out_h, need, first, total_c, plane]() mutable {
        const T* g = out_h.grad().data();
        int off = 0;
        for (std::size_t k = 0; k < held.size(); ++k) {
          const int pc = held[k].dims().c;
          if (need[k]) {
            auto& gs = held[k].grad_storage();
            for (int in = 0; in < first.n; ++in) {
              const T* src = g + (static_cast<std::size_t>(in) * total_c + off) * plane;
              T* dst = gs.data() + static_cast<std::size_t>(in) * pc * plane;
              for (std::size_t i = 0; i < pc * plane; ++i) dst[i] += src[i];
            }
          }
          off += pc;
        }
      });
    }
  }
  return out;
}

template <typename T>
Tensor<T> concat_channels(std::initializer_list<Tensor<T>> parts) {
  return concat_channels(std::vector<Tensor<T>>(parts));
}

template <typename T>
Tensor<T> concat_batch(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw EmptyInputError("concat_batch: empty input sequence");
  const Dims first = parts.front().dims();
  int total_n = 0;
  for (const auto& p : parts) {
    const Dims d = p.dims();
    if (d.c != first.c || d.h != first.h || d.w != first.w) {
      throw ShapeError("concat_batch: channel/spatial mismatch " + first.str() + " vs " +
                       d.str());
    }
    total_n += d.n;
  }
  Tensor<T> out = Tensor<T>::zeros({total_n, first.c, first.h, first.w});
  const std::size_t sample = static_cast<std::size_t>(first.c) * first.h * first.w;
  T* po = out.values().data();
  std::size_t pos = 0;
  for (const auto& p : parts) {
    const auto pv = p.values();
    std::copy(pv.begin(), pv.end(), po + pos);
    pos += pv.size();
  }
  if (Tape<T>* tp = Tape<T>::current()) {
    bool any = false;
    std::vector<char> need(parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) {
      need[k] = tp->wants_grad(parts[k]);
      any = any || need[k];
    }
    if (any) {
      std::vector<Tensor<T>> held = parts;
      Tensor<T> out_h = out;
      tp->record_many(parts, out, [held, out_h, need, sample]() mutable {
        const T* g = out_h.grad().data();
        std::size_t off = 0;
        for (std::size_t k = 0; k < held.size(); ++k) {
          const std::size_t cnt = held[k].size();
          if (need[k]) {
            auto& gs = held[k].grad_storage();
            for (std::size_t i = 0; i < cnt; ++i) gs[i] += g[off + i];
          }
          off += cnt;
        }
      });
    }
  }
  return out;
}

template <typename T>
Tensor<T> concat_batch(std::initializer_list<Tensor<T>> parts) {
  return concat_batch(std::vector<Tensor<T>>(parts));
}

/// Extracts sample `index` as a (1, c, h, w) tensor; backward scatters the
/// gradient back into that slot.
template <typename T>
Tensor<T> slice_batch(const Tensor<T>& a, int index) {
  const Dims d = a.dims();
  if (index < 0 || index >= d.n) {
    throw ShapeError("slice_batch: index " + std::to_string(index) + " out of range for " +
                     d.str());
  }
  Tensor<T> out = Tensor<T>::zeros({1, d.c, d.h, d.w});
  const std::size_t sample = static_cast<std::size_t>(d.c) * d.h * d.w;
  const T* pa = a.values().data() + index * sample;
  std::copy(pa, pa + sample, out.values().data());
  detail::maybe_record({a}, out, [a = a, out, index, sample]() mutable {
    const auto g = out.grad();
    auto& gs = a.grad_storage();
    T* dst = gs.data() + index * sample;
    for (std::size_t i = 0; i < sample; ++i) dst[i] += g[i];
  });
  return out;
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> reduce_sum(const Tensor<T>& a) {
  T acc = T(0);
  for (T v : a.values()) acc += v;
  Tensor<T> out = Tensor<T>::scalar(acc);
  detail::maybe_record({a}, out, [a = a, out]() mutable {
    const T g = out.grad()[0];
    auto& gs = a.grad_storage();
    for (auto& v : gs) v += g;
  });
  return out;
}

template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& a) {
  T acc = T(0);
  for (T v : a.values()) acc += v;
  const T inv = T(1) / static_cast<T>(a.size());
  Tensor<T> out = Tensor<T>::scalar(acc * inv);
  detail::maybe_record({a}, out, [a = a, out, inv]() mutable {
    const T g = out.grad()[0] * inv;
    auto& gs = a.grad_storage();
    for (auto& v : gs) v += g;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Softmax
// ---------------------------------------------------------------------------

/// Softmax over one axis of a matrix view. axis 0 normalizes over the row
/// index (every column sums to 1); axis 1 normalizes over the column index
/// (every row sums to 1). The per-line max is subtracted before
/// exponentiation.
template <typename T>
Tensor<T> softmax_axis(const Tensor<T>& a, int axis) {
  detail::require_matrix_view(a.dims(), "softmax_axis");
  if (axis != 0 && axis != 1) {
    throw ConfigError("softmax_axis: axis must be 0 or 1, got " + std::to_string(axis));
  }
  const auto av = a.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (!std::isfinite(static_cast<double>(av[i]))) {
      throw DomainError("softmax_axis: non-finite input at element " + std::to_string(i));
    }
  }
  const int rows = a.dims().h, cols = a.dims().w;
  Tensor<T> out = Tensor<T>::zeros(a.dims());
  auto ov = out.values();
  const int lines = axis == 0 ? cols : rows;
  const int len = axis == 0 ? rows : cols;
  auto at = [&](int line, int t) -> std::size_t {
    return axis == 0 ? static_cast<std::size_t>(t) * cols + line
                     : static_cast<std::size_t>(line) * cols + t;
  };
  for (int line = 0; line < lines; ++line) {
    T mx = av[at(line, 0)];
    for (int t = 1; t < len; ++t) mx = std::max(mx, av[at(line, t)]);
    T denom = T(0);
    for (int t = 0; t < len; ++t) {
      const T e = std::exp(av[at(line, t)] - mx);
      ov[at(line, t)] = e;
      denom += e;
    }
    for (int t = 0; t < len; ++t) ov[at(line, t)] /= denom;
  }
  detail::maybe_record({a}, out, [a = a, out, axis, rows, cols]() mutable {
    const auto g = out.grad();
    const auto yv = out.values();
    auto& gs = a.grad_storage();
    const int lines = axis == 0 ? cols : rows;
    const int len = axis == 0 ? rows : cols;
    auto at = [&](int line, int t) -> std::size_t {
      return axis == 0 ? static_cast<std::size_t>(t) * cols + line
                       : static_cast<std::size_t>(line) * cols + t;
    };
    for (int line = 0; line < lines; ++line) {
      T dot = T(0);
      for (int t = 0; t < len; ++t) dot += g[at(line, t)] * yv[at(line, t)];
      for (int t = 0; t < len; ++t) {
        const std::size_t i = at(line, t);
        gs[i] += yv[i] * (g[i] - dot);
      }
    }
  });
  return out;
}

}  // namespace ravnet
