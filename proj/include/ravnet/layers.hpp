#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ravnet/errors.hpp"
#include "ravnet/ops.hpp"
#include "ravnet/parallel.hpp"
#include "ravnet/params.hpp"
#include "ravnet/rng.hpp"
#include "ravnet/tape.hpp"
#include "ravnet/tensor.hpp"

namespace ravnet {

enum class Mode { train, infer };

// ---------------------------------------------------------------------------
// conv2d: stride 1, same padding, square odd kernel, cross-correlation
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
Tensor<T> conv2d_impl(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>* bias) {
  const Dims xd = x.dims();
  const Dims wd = weight.dims();  // (c_out, c_in, k, k)
  const int c_out = wd.n, c_in = wd.c, k = wd.h;
  if (wd.h != wd.w || k % 2 == 0) {
    throw ShapeError("conv2d: kernel must be square with odd size, got " + wd.str());
  }
  if (xd.c != c_in) {
    throw ShapeError("conv2d: input has " + std::to_string(xd.c) + " channels, weight expects " +
                     std::to_string(c_in));
  }
  if (xd.h < k || xd.w < k) {
    throw ShapeError("conv2d: spatial extent " + xd.str() + " smaller than kernel " +
                     std::to_string(k));
  }
  if (bias && !(bias->dims() == Dims{1, c_out, 1, 1})) {
    throw ShapeError("conv2d: bias dims " + bias->dims().str() + " do not match c_out " +
                     std::to_string(c_out));
  }
  const int p = k / 2;
  const int H = xd.h, W = xd.w;
  Tensor<T> out = Tensor<T>::zeros({xd.n, c_out, H, W});
  const T* xv = x.values().data();
  const T* wv = weight.values().data();
  const T* bv = bias ? bias->values().data() : nullptr;
  T* ov = out.values().data();
  const Dims od = out.dims();
  // Row-wise accumulation: for each kernel tap, add the shifted, scaled input
  // row into the output row over the tap's valid column range. Per output
  // element the additions happen in the same (ci, kh, kw) order as a per-pixel
  // loop would produce, so results match that formulation bit for bit.
  parallel_for(static_cast<std::size_t>(xd.n) * c_out, 1, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t t = b0; t < b1; ++t) {
      const int in = static_cast<int>(t) / c_out;
      const int co = static_cast<int>(t) % c_out;
      T* obase = ov + od.index(in, co, 0, 0);
      const T init = bv ? bv[co] : T(0);
      for (int i = 0; i < H * W; ++i) obase[i] = init;
      for (int ci = 0; ci < c_in; ++ci) {
        const T* xbase = xv + xd.index(in, ci, 0, 0);
        for (int kh = 0; kh < k; ++kh) {
          for (int kw = 0; kw < k; ++kw) {
            const T w = wv[wd.index(co, ci, kh, kw)];
            const int ow_lo = kw < p ? p - kw : 0;
            const int ow_hi = kw > p ? W + p - kw : W;
            const int span = ow_hi - ow_lo;
            if (span <= 0) continue;
            for (int oh = 0; oh < H; ++oh) {
              const int ih = oh + kh - p;
              if (ih < 0 || ih >= H) continue;
              const T* xr = xbase + std::size_t(ih) * W + (ow_lo + kw - p);
              T* outr = obase + std::size_t(oh) * W + ow_lo;
              for (int i = 0; i < span; ++i) outr[i] += w * xr[i];
            }
          }
        }
      }
    }
  });

  Tape<T>* tp = Tape<T>::current();
  if (!tp) return out;
  const bool gx = tp->wants_grad(x);
  const bool gw = tp->wants_grad(weight);
  const bool gb = bias && tp->wants_grad(*bias);
  if (!(gx || gw || gb)) return out;

  std::vector<Tensor<T>> inputs{x, weight};
  Tensor<T> bias_h;
  if (bias) {
    bias_h = *bias;
    inputs.push_back(bias_h);
  }
  tp->record_many(inputs, out, [x = x, weight = weight, bias_h, out, gx, gw, gb, k, p]() mutable {
    const Dims xd = x.dims();
    const Dims wd = weight.dims();
    const Dims od = out.dims();
    const int c_out = wd.n, c_in = wd.c, H = xd.h, W = xd.w, N = xd.n;
    const T* g = out.grad().data();
    const T* xv = x.values().data();
    const T* wv = weight.values().data();
    if (gx) {
      auto& dx = x.grad_storage();
      T* dxp = dx.data();
      parallel_for(static_cast<std::size_t>(N) * c_in, 1, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t t = b0; t < b1; ++t) {
          const int in = static_cast<int>(t) / c_in;
          const int ci = static_cast<int>(t) % c_in;
          T* dxbase = dxp + xd.index(in, ci, 0, 0);
          for (int co = 0; co < c_out; ++co) {
            const T* gbase = g + od.index(in, co, 0, 0);
            for (int kh = 0; kh < k; ++kh) {
              for (int kw = 0; kw < k; ++kw) {
                const T w = wv[wd.index(co, ci, kh, kw)];
                const int iw_lo = kw > p ? kw - p : 0;
                const int iw_hi = kw < p ? W + kw - p : W;
                const int span = iw_hi - iw_lo;
                if (span <= 0) continue;
                for (int ih = 0; ih < H; ++ih) {
                  const int oh = ih - kh + p;
                  if (oh < 0 || oh >= H) continue;
                  T* dxr = dxbase + std::size_t(ih) * W + iw_lo;
                  const T* gr = gbase + std::size_t(oh) * W + (iw_lo - kw + p);
                  for (int i = 0; i < span; ++i) dxr[i] += w * gr[i];
                }
              }
            }
          }
        }
      });
    }
    if (gw) {
      auto& dw = weight.grad_storage();
      T* dwp = dw.data();
      parallel_for(static_cast<std::size_t>(c_out), 1, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t t = b0; t < b1; ++t) {
          const int co = static_cast<int>(t);
          for (int ci = 0; ci < c_in; ++ci) {
            for (int kh = 0; kh < k; ++kh) {
              for (int kw = 0; kw < k; ++kw) {
                const int ow_lo = kw < p ? p - kw : 0;
                const int ow_hi = kw > p ? W + p - kw : W;
                const int span = ow_hi - ow_lo;
                T acc = T(0);
                if (span > 0) {
                  for (int in = 0; in < N; ++in) {
                    const T* gbase = g + od.index(in, co, 0, 0);
                    const T* xbase = xv + xd.index(in, ci, 0, 0);
                    for (int oh = 0; oh < H; ++oh) {
                      const int ih = oh + kh - p;
                      if (ih < 0 || ih >= H) continue;
                      const T* gr = gbase + std::size_t(oh) * W + ow_lo;
                      const T* xr = xbase + std::size_t(ih) * W + (ow_lo + kw - p);
                      for (int i = 0; i < span; ++i) acc += gr[i] * xr[i];
                    }
                  }
                }
                dwp[wd.index(co, ci, kh, kw)] += acc;
              }
            }
          }
        }
      });
    }
    if (gb) {
      auto& db = bias_h.grad_storage();
      for (int co = 0; co < c_out; ++co) {
        T acc = T(0);
        for (int in = 0; in < N; ++in) {
          const T* gbase = g + od.index(in, co, 0, 0);
          for (int i = 0; i < H * W; ++i) acc += gbase[i];
        }
        db[Dims{1, c_out, 1, 1}.index(0, co, 0, 0)] += acc;
      }
    }
  });
  return out;
}

}  // namespace detail

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  return detail::conv2d_impl(x, weight, &bias);
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight) {
  return detail::conv2d_impl<T>(x, weight, nullptr);
}

// ---------------------------------------------------------------------------
// maxpool2: 2x2 windows, stride 2
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> maxpool2(const Tensor<T>& x) {
  const Dims xd = x.dims();
  if (xd.h % 2 != 0 || xd.w % 2 != 0) {
    throw ShapeError("maxpool2: spatial extents must be even, got " + xd.str());
  }
  const int OH = xd.h / 2, OW = xd.w / 2;
  Tensor<T> out = Tensor<T>::zeros({xd.n, xd.c, OH, OW});
  const Dims od = out.dims();
  const T* xv = x.values().data();
  T* ov = out.values().data();
  // Flat input index of each window's winner; ties keep the first element in
  // row-major window order via strict-greater comparison.
  auto argmax = std::make_shared<std::vector<std::size_t>>(od.count());
  for (int in = 0; in < xd.n; ++in) {
    for (int ic = 0; ic < xd.c; ++ic) {
      for (int oh = 0; oh < OH; ++oh) {
        for (int ow = 0; ow < OW; ++ow) {
          std::size_t best = xd.index(in, ic, 2 * oh, 2 * ow);
          T best_v = xv[best];
          for (int dh = 0; dh < 2; ++dh) {
            for (int dw = 0; dw < 2; ++dw) {
              const std::size_t idx = xd.index(in, ic, 2 * oh + dh, 2 * ow + dw);
              if (xv[idx] > best_v) {
                best_v = xv[idx];
                best = idx;
              }
            }
          }
          const std::size_t o = od.index(in, ic, oh, ow);
          ov[o] = best_v;
          (*argmax)[o] = best;
        }
      }
    }
  }
  detail::maybe_record({x}, out, [x = x, out, argmax]() mutable {
    const auto g = out.grad();
    auto& dx = x.grad_storage();
    for (std::size_t o = 0; o < g.size(); ++o) dx[(*argmax)[o]] += g[o];
  });
  return out;
}

// ---------------------------------------------------------------------------
// upsample2_nearest: each pixel becomes a 2x2 block
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> upsample2_nearest(const Tensor<T>& x) {
  const Dims xd = x.dims();
  Tensor<T> out = Tensor<T>::zeros({xd.n, xd.c, 2 * xd.h, 2 * xd.w});
  const Dims od = out.dims();
  const T* xv = x.values().data();
  T* ov = out.values().data();
  for (int in = 0; in < xd.n; ++in) {
    for (int ic = 0; ic < xd.c; ++ic) {
      for (int ih = 0; ih < xd.h; ++ih) {
        for (int iw = 0; iw < xd.w; ++iw) {
          const T v = xv[xd.index(in, ic, ih, iw)];
          ov[od.index(in, ic, 2 * ih, 2 * iw)] = v;
          ov[od.index(in, ic, 2 * ih, 2 * iw + 1)] = v;
          ov[od.index(in, ic, 2 * ih + 1, 2 * iw)] = v;
          ov[od.index(in, ic, 2 * ih + 1, 2 * iw + 1)] = v;
        }
      }
    }
  }
  detail::maybe_record({x}, out, [x = x, out]() mutable {
    const auto g = out.grad();
    auto& dx = x.grad_storage();
    const Dims xd = x.dims();
    const Dims od = out.dims();
    for (int in = 0; in < xd.n; ++in) {
      for (int ic = 0; ic < xd.c; ++ic) {
        for (int ih = 0; ih < xd.h; ++ih) {
          for (int iw = 0; iw < xd.w; ++iw) {
            dx[xd.index(in, ic, ih, iw)] += g[od.index(in, ic, 2 * ih, 2 * iw)] +
                                            g[od.index(in, ic, 2 * ih, 2 * iw + 1)] +
                                            g[od.index(in, ic, 2 * ih + 1, 2 * iw)] +
                                            g[od.index(in, ic, 2 * ih + 1, 2 * iw + 1)];
          }
        }
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// batchnorm
// ---------------------------------------------------------------------------

/// Per-channel batch normalization. Train mode normalizes with batch
/// statistics over (n, h, w) and folds them into the running stats by
/// momentum; infer mode normalizes with the running stats. Running tensors
/// are mutated in place and never receive gradients.
template <typename T>
Tensor<T> batchnorm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                    Tensor<T>& running_mean, Tensor<T>& running_var, Mode mode, T eps = T(1e-5),
                    T momentum = T(0.9)) {
  const Dims xd = x.dims();
  const int C = xd.c;
  const Dims cd{1, C, 1, 1};
  if (!(gamma.dims() == cd) || !(beta.dims() == cd) || !(running_mean.dims() == cd) ||
      !(running_var.dims() == cd)) {
    throw ShapeError("batchnorm: parameter dims do not match input channels " +
                     std::to_string(C) + " (input " + xd.str() + ")");
  }
  const std::size_t m = static_cast<std::size_t>(xd.n) * xd.h * xd.w;
  std::vector<T> mean(C), invstd(C);
  if (mode == Mode::train) {
    for (int c = 0; c < C; ++c) {
      T mu = T(0);
      for (int in = 0; in < xd.n; ++in) {
        for (int ih = 0; ih < xd.h; ++ih) {
          for (int iw = 0; iw < xd.w; ++iw) mu += x.at(in, c, ih, iw);
        }
      }
      mu /= static_cast<T>(m);
      T var = T(0);
      for (int in = 0; in < xd.n; ++in) {
        for (int ih = 0; ih < xd.h; ++ih) {
          for (int iw = 0; iw < xd.w; ++iw) {
            const T d = x.at(in, c, ih, iw) - mu;
            var += d * d;
          }
        }
      }
      var /= static_cast<T>(m);
      mean[c] = mu;
      invstd[c] = T(1) / std::sqrt(var + eps);
      running_mean.values()[c] = momentum * running_mean.values()[c] + (T(1) - momentum) * mu;
      running_var.values()[c] = momentum * running_var.values()[c] + (T(1) - momentum) * var;
    }
  } else {
    for (int c = 0; c < C; ++c) {
      mean[c] = running_mean.values()[c];
      invstd[c] = T(1) / std::sqrt(running_var.values()[c] + eps);
    }
  }

  Tensor<T> out = Tensor<T>::zeros(xd);
  const T* xv = x.values().data();
  const T* gv = gamma.values().data();
  const T* bv = beta.values().data();
  T* ov = out.values().data();
  for (int in = 0; in < xd.n; ++in) {
    for (int c = 0; c < C; ++c) {
      for (int ih = 0; ih < xd.h; ++ih) {
        for (int iw = 0; iw < xd.w; ++iw) {
          const std::size_t i = xd.index(in, c, ih, iw);
          ov[i] = gv[c] * (xv[i] - mean[c]) * invstd[c] + bv[c];
        }
      }
    }
  }

  Tape<T>* tp = Tape<T>::current();
  if (!tp) return out;
  const bool gx = tp->wants_grad(x);
  const bool gg = tp->wants_grad(gamma);
  const bool gb = tp->wants_grad(beta);
  if (!(gx || gg || gb)) return out;
  const bool train = mode == Mode::train;
  tp->record({x, gamma, beta}, out,
             [x = x, gamma = gamma, beta = beta, out, gx, gg, gb, mean, invstd, train,
              m]() mutable {
    const Dims xd = x.dims();
    const int C = xd.c;
    const T* g = out.grad().data();
    const T* xv = x.values().data();
    const T* gv = gamma.values().data();
    for (int c = 0; c < C; ++c) {
      T sum_g = T(0), sum_gx = T(0);
      for (int in = 0; in < xd.n; ++in) {
        for (int ih = 0; ih < xd.h; ++ih) {
          for (int iw = 0; iw < xd.w; ++iw) {
            const std::size_t i = xd.index(in, c, ih, iw);
            const T xhat = (xv[i] - mean[c]) * invstd[c];
            sum_g += g[i];
            sum_gx += g[i] * xhat;
          }
        }
      }
      if (gg) gamma.grad_storage()[c] += sum_gx;
      if (gb) beta.grad_storage()[c] += sum_g;
      if (gx) {
        auto& dx = x.grad_storage();
        const T inv_m = T(1) / static_cast<T>(m);
        for (int in = 0; in < xd.n; ++in) {
          for (int ih = 0; ih < xd.h; ++ih) {
            for (int iw = 0; iw < xd.w; ++iw) {
              const std::size_t i = xd.index(in, c, ih, iw);
              const T xhat = (xv[i] - mean[c]) * invstd[c];
              if (train) {
                dx[i] += gv[c] * invstd[c] * (g[i] - inv_m * sum_g - xhat * inv_m * sum_gx);
              } else {
                dx[i] += gv[c] * invstd[c] * g[i];
              }
            }
          }
        }
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Layer modules: own their parameters via a ParamStore
// ---------------------------------------------------------------------------

template <typename T>
struct Conv2D {
  Tensor<T> weight;
  Tensor<T> bias;
  bool with_bias = true;

  void init(ParamStore<T>& store, const std::string& name, int c_in, int c_out, int k,
            bool bias_on, SplitMix64& rng) {
    const T stddev = static_cast<T>(std::sqrt(2.0 / (static_cast<double>(c_in) * k * k)));
    weight = store.add(name + ".weight", Tensor<T>::randn({c_out, c_in, k, k}, rng, T(0), stddev));
    with_bias = bias_on;
    if (bias_on) bias = store.add(name + ".bias", Tensor<T>::zeros({1, c_out, 1, 1}));
  }

  Tensor<T> forward(const Tensor<T>& x) const {
    return with_bias ? conv2d(x, weight, bias) : conv2d(x, weight);
  }
};

template <typename T>
struct BatchNorm2D {
  Tensor<T> gamma, beta, running_mean, running_var;
  T eps = T(1e-5);
  T momentum = T(0.9);

  void init(ParamStore<T>& store, const std::string& name, int c) {
    gamma = store.add(name + ".gamma", Tensor<T>::ones({1, c, 1, 1}));
    beta = store.add(name + ".beta", Tensor<T>::zeros({1, c, 1, 1}));
    running_mean = store.add(name + ".running_mean", Tensor<T>::zeros({1, c, 1, 1}), false);
    running_var = store.add(name + ".running_var", Tensor<T>::ones({1, c, 1, 1}), false);
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) const {
    // Running stats are non-trainable but mutated in train mode; the const
    // casts keep forward() const like every other layer.
    return batchnorm(x, gamma, beta, const_cast<Tensor<T>&>(running_mean),
                     const_cast<Tensor<T>&>(running_var), mode, eps, momentum);
  }
};

template <typename T>
struct ConvLSTMState {
  Tensor<T> h;
  Tensor<T> cell;

  static ConvLSTMState zero(Dims d) {
    return ConvLSTMState{Tensor<T>::zeros(d), Tensor<T>::zeros(d)};
  }
};

/// ConvLSTM cell with 3x3 same-padding gate convolutions. Each gate sums a
/// biased convolution of the input and a bias-free convolution of the hidden
/// state, so there is exactly one bias per gate.
template <typename T>
struct ConvLSTMCell {
  Conv2D<T> wx_f, wx_i, wx_o, wx_c;
  Conv2D<T> wh_f, wh_i, wh_o, wh_c;
  int hidden_channels = 0;

  void init(ParamStore<T>& store, const std::string& name, int c_in, int c_hidden,
            SplitMix64& rng) {
    hidden_channels = c_hidden;
    wx_f.init(store, name + ".wx_f", c_in, c_hidden, 3, true, rng);
    wx_i.init(store, name + ".wx_i", c_in, c_hidden, 3, true, rng);
    wx_o.init(store, name + ".wx_o", c_in, c_hidden, 3, true, rng);
    wx_c.init(store, name + ".wx_c", c_in, c_hidden, 3, true, rng);
    wh_f.init(store, name + ".wh_f", c_hidden, c_hidden, 3, false, rng);
    wh_i.init(store, name + ".wh_i", c_hidden, c_hidden, 3, false, rng);
    wh_o.init(store, name + ".wh_o", c_hidden, c_hidden, 3, false, rng);
    wh_c.init(store, name + ".wh_c", c_hidden, c_hidden, 3, false, rng);
  }

  std::pair<Tensor<T>, ConvLSTMState<T>> step(const Tensor<T>& x,
                                              const ConvLSTMState<T>& state) const {
    const Dims xd = x.dims();
    const Dims sd = state.h.dims();
    if (sd.n != xd.n || sd.h != xd.h || sd.w != xd.w || sd.c != hidden_channels ||
        !(state.cell.dims() == sd)) {
      throw ShapeError("convlstm_step: state dims " + sd.str() + " incompatible with input " +
                       xd.str());
    }
    Tensor<T> f = sigmoid(add(wx_f.forward(x), wh_f.forward(state.h)));
    Tensor<T> i = sigmoid(add(wx_i.forward(x), wh_i.forward(state.h)));
    Tensor<T> o = sigmoid(add(wx_o.forward(x), wh_o.forward(state.h)));
    Tensor<T> cand = tanh(add(wx_c.forward(x), wh_c.forward(state.h)));
    Tensor<T> cell_next = add(mul(f, state.cell), mul(i, cand));
    Tensor<T> h_next = mul(o, tanh(cell_next));
    return {h_next, ConvLSTMState<T>{h_next, cell_next}};
  }
};

template <typename T>
std::pair<Tensor<T>, ConvLSTMState<T>> convlstm_step(const Tensor<T>& x,
                                                     const ConvLSTMState<T>& state,
                                                     const ConvLSTMCell<T>& cell) {
  return cell.step(x, state);
}

}  // namespace ravnet
