#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ravnet/errors.hpp"
#include "ravnet/layers.hpp"
#include "ravnet/ops.hpp"
#include "ravnet/params.hpp"
#include "ravnet/rng.hpp"
#include "ravnet/tensor.hpp"

namespace ravnet {

enum class EncoderKind { plain, cofres };
enum class DecoderKind { plain, ar };

struct NetworkConfig {
  int levels = 4;
  int base_channels = 64;
  int in_channels = 1;
  int out_channels = 1;
  EncoderKind encoder = EncoderKind::cofres;
  DecoderKind decoder = DecoderKind::ar;
  bool use_ca = true;
  bool ca_all_skips = false;  // ablation only; default places CA at the bottom skip

  /// Small preset that keeps unit tests and experiments fast.
  static NetworkConfig desk() {
    NetworkConfig cfg;
    cfg.levels = 2;
    cfg.base_channels = 8;
    return cfg;
  }
};

// ---------------------------------------------------------------------------
// CofRes encoder block
// ---------------------------------------------------------------------------

/// Four chained 3x3 conv+BN+ReLU stages at target/4 channels, channel-concat
/// of the four stage outputs, a 1x1 fuse conv (+BN+ReLU), and a residual sum
/// with the input (1x1-projected when the channel count differs). The skip
/// output is the sum; the pooled output feeds the next stage.
template <typename T>
struct CofResBlock {
  Conv2D<T> conv1, conv2, conv3, conv4, fuse, proj;
  BatchNorm2D<T> bn1, bn2, bn3, bn4, bn5;
  bool has_proj = false;
  int target = 0;

  void init(ParamStore<T>& store, const std::string& name, int c_in, int target_channels,
            SplitMix64& rng) {
    if (target_channels % 4 != 0) {
      throw ConfigError("cofres: target channels " + std::to_string(target_channels) +
                        " not divisible by 4");
    }
    target = target_channels;
    const int q = target_channels / 4;
    conv1.init(store, name + ".conv1", c_in, q, 3, true, rng);
    bn1.init(store, name + ".bn1", q);
    conv2.init(store, name + ".conv2", q, q, 3, true, rng);
    bn2.init(store, name + ".bn2", q);
    conv3.init(store, name + ".conv3", q, q, 3, true, rng);
    bn3.init(store, name + ".bn3", q);
    conv4.init(store, name + ".conv4", q, q, 3, true, rng);
    bn4.init(store, name + ".bn4", q);
    fuse.init(store, name + ".fuse", target_channels, target_channels, 1, true, rng);
    bn5.init(store, name + ".bn5", target_channels);
    has_proj = c_in != target_channels;
    if (has_proj) proj.init(store, name + ".proj", c_in, target_channels, 1, true, rng);
  }

  std::pair<Tensor<T>, Tensor<T>> forward(const Tensor<T>& x, Mode mode) const {
    if (x.dims().h % 2 != 0 || x.dims().w % 2 != 0) {
      throw ShapeError("cofres: spatial dims must be even for pooling, got " + x.dims().str());
    }
    Tensor<T> s1 = relu(bn1.forward(conv1.forward(x), mode));
    Tensor<T> s2 = relu(bn2.forward(conv2.forward(s1), mode));
    Tensor<T> s3 = relu(bn3.forward(conv3.forward(s2), mode));
    Tensor<T> s4 = relu(bn4.forward(conv4.forward(s3), mode));
    Tensor<T> fused = relu(bn5.forward(fuse.forward(concat_channels({s1, s2, s3, s4})), mode));
    Tensor<T> residual = has_proj ? proj.forward(x) : x;
    Tensor<T> skip = add(fused, residual);
    return {skip, maxpool2(skip)};
  }
};

// ---------------------------------------------------------------------------
// Channel attention
// ---------------------------------------------------------------------------

/// C x C channel-dependency matrix of a single sample: rows of the flattened
/// feature are dotted pairwise and softmax-normalized over the first index,
/// so every column sums to 1. A batch yields one matrix per sample, stacked
/// as (n, 1, C, C).
template <typename T>
Tensor<T> channel_dependency(const Tensor<T>& a) {
  const Dims d = a.dims();
  const int hw = d.h * d.w;
  std::vector<Tensor<T>> per_sample;
  per_sample.reserve(d.n);
  for (int s = 0; s < d.n; ++s) {
    Tensor<T> a1 = reshape(d.n == 1 ? a : slice_batch(a, s), {1, 1, d.c, hw});
    Tensor<T> m = matmul(a1, transpose_last2(a1));
    per_sample.push_back(softmax_axis(m, 0));
  }
  return per_sample.size() == 1 ? per_sample.front() : concat_batch(per_sample);
}

/// Attention blend e = beta * reshape(G * a1) + a, with a single learned
/// scalar beta initialized to 0 so the block starts as the identity. The
/// last computed G is kept (detached) for diagnostics.
template <typename T>
struct ChannelAttention {
  Tensor<T> beta;
  mutable Tensor<T> cached_g;

  void init(ParamStore<T>& store, const std::string& name) {
    beta = store.add(name + ".beta", Tensor<T>::zeros(kScalarDims));
  }

  Tensor<T> forward(const Tensor<T>& a) const {
    const Dims d = a.dims();
    const int hw = d.h * d.w;
    std::vector<Tensor<T>> outs;
    outs.reserve(d.n);
    Tensor<T> g_cache = Tensor<T>::zeros({d.n, 1, d.c, d.c});
    for (int s = 0; s < d.n; ++s) {
      Tensor<T> as = d.n == 1 ? a : slice_batch(a, s);
      Tensor<T> a1 = reshape(as, {1, 1, d.c, hw});
      Tensor<T> g = softmax_axis(matmul(a1, transpose_last2(a1)), 0);
      std::copy(g.values().begin(), g.values().end(),
                g_cache.values().begin() + static_cast<std::size_t>(s) * d.c * d.c);
      Tensor<T> weighted = reshape(matmul(g, a1), {1, d.c, d.h, d.w});
      outs.push_back(add(scale_by(weighted, beta), as));
    }
    cached_g = g_cache;
    return outs.size() == 1 ? outs.front() : concat_batch(outs);
  }
};

// ---------------------------------------------------------------------------
// Attention-recovery decoder blocks
// ---------------------------------------------------------------------------

/// 1x1 channel reduction to C/4, nearest x2 upsampling, one residual block
/// (conv-BN-ReLU, conv-BN, add identity, ReLU) at C/4, and a 1x1 expansion
/// back to C. Spatial extent doubles, channels are preserved.
template <typename T>
struct ArUpsampleBlock {
  Conv2D<T> reduce, rconv1, rconv2, expand;
  BatchNorm2D<T> rbn1, rbn2;
  int channels = 0;

  void init(ParamStore<T>& store, const std::string& name, int c, SplitMix64& rng) {
    if (c % 4 != 0) {
      throw ConfigError("ar_upsample: channels " + std::to_string(c) + " not divisible by 4");
    }
    channels = c;
    const int q = c / 4;
    reduce.init(store, name + ".reduce", c, q, 1, true, rng);
    rconv1.init(store, name + ".rconv1", q, q, 3, true, rng);
    rbn1.init(store, name + ".rbn1", q);
    rconv2.init(store, name + ".rconv2", q, q, 3, true, rng);
    rbn2.init(store, name + ".rbn2", q);
    expand.init(store, name + ".expand", q, c, 1, true, rng);
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) const {
    if (x.dims().c != channels) {
      throw ShapeError("ar_upsample: expected " + std::to_string(channels) + " channels, got " +
                       x.dims().str());
    }
    Tensor<T> t = upsample2_nearest(reduce.forward(x));
    Tensor<T> r = relu(rbn1.forward(rconv1.forward(t), mode));
    r = rbn2.forward(rconv2.forward(r), mode);
    t = relu(add(r, t));
    return expand.forward(t);
  }
};

/// Feeds [skip_feat, up_feat] as a 2-step sequence through a shared-weight
/// ConvLSTM from a zero state, then maps the final hidden state through a
/// 3x3 conv that halves the channel count.
template <typename T>
struct ArLstmBlock {
  ConvLSTMCell<T> cell;
  Conv2D<T> out_conv;
  int channels = 0;

  void init(ParamStore<T>& store, const std::string& name, int c, SplitMix64& rng) {
    if (c % 2 != 0) {
      throw ConfigError("ar_lstm: channels " + std::to_string(c) + " not divisible by 2");
    }
    channels = c;
    cell.init(store, name + ".cell", c, c, rng);
    out_conv.init(store, name + ".conv3", c, c / 2, 3, true, rng);
  }

  Tensor<T> forward(const Tensor<T>& skip_feat, const Tensor<T>& up_feat) const {
    if (!(skip_feat.dims() == up_feat.dims())) {
      throw ShapeError("ar_lstm: skip " + skip_feat.dims().str() + " and upsampled " +
                       up_feat.dims().str() + " dims differ");
    }
    if (skip_feat.dims().c != channels) {
      throw ShapeError("ar_lstm: expected " + std::to_string(channels) + " channels, got " +
                       skip_feat.dims().str());
    }
    auto state = ConvLSTMState<T>::zero(skip_feat.dims());
    auto [h1, s1] = cell.step(skip_feat, state);
    auto [h2, s2] = cell.step(up_feat, s1);
    return out_conv.forward(h2);
  }
};

// ---------------------------------------------------------------------------
// Plain U-Net blocks (ablation baselines)
// ---------------------------------------------------------------------------

template <typename T>
struct PlainEncBlock {
  Conv2D<T> conv1, conv2;
  BatchNorm2D<T> bn1, bn2;

  void init(ParamStore<T>& store, const std::string& name, int c_in, int target,
            SplitMix64& rng) {
    conv1.init(store, name + ".conv1", c_in, target, 3, true, rng);
    bn1.init(store, name + ".bn1", target);
    conv2.init(store, name + ".conv2", target, target, 3, true, rng);
    bn2.init(store, name + ".bn2", target);
  }

  std::pair<Tensor<T>, Tensor<T>> forward(const Tensor<T>& x, Mode mode) const {
    if (x.dims().h % 2 != 0 || x.dims().w % 2 != 0) {
      throw ShapeError("plain encoder: spatial dims must be even, got " + x.dims().str());
    }
    Tensor<T> t = relu(bn1.forward(conv1.forward(x), mode));
    Tensor<T> skip = relu(bn2.forward(conv2.forward(t), mode));
    return {skip, maxpool2(skip)};
  }
};

/// Upsamples the deep feature, concatenates it with the skip feature, and
/// halves the channel count with two conv+BN+ReLU stages, mirroring the
/// channel plan of the attention-recovery decoder.
template <typename T>
struct PlainDecBlock {
  Conv2D<T> conv1, conv2;
  BatchNorm2D<T> bn1, bn2;
  int channels = 0;

  void init(ParamStore<T>& store, const std::string& name, int c, SplitMix64& rng) {
    if (c % 2 != 0) {
      throw ConfigError("plain decoder: channels " + std::to_string(c) + " not divisible by 2");
    }
    channels = c;
    conv1.init(store, name + ".conv1", 2 * c, c / 2, 3, true, rng);
    bn1.init(store, name + ".bn1", c / 2);
    conv2.init(store, name + ".conv2", c / 2, c / 2, 3, true, rng);
    bn2.init(store, name + ".bn2", c / 2);
  }

  Tensor<T> forward(const Tensor<T>& skip_feat, const Tensor<T>& deep, Mode mode) const {
    Tensor<T> up = upsample2_nearest(deep);
    if (!(skip_feat.dims() == up.dims())) {
      throw ShapeError("plain decoder: skip " + skip_feat.dims().str() +
                       " and upsampled " + up.dims().str() + " dims differ");
    }
    Tensor<T> t = concat_channels({skip_feat, up});
    t = relu(bn1.forward(conv1.forward(t), mode));
    return relu(bn2.forward(conv2.forward(t), mode));
  }
};

// ---------------------------------------------------------------------------
// Full network
// ---------------------------------------------------------------------------

/// V-shaped segmentation net: `levels` encoder stages with doubling
/// channels, channel attention on the bottom-most skip, `levels` decoder
/// stages halving channels, and a final 1x1 conv + sigmoid to one
/// probability channel.
template <typename T>
class RaVNet {
 public:
  RaVNet(const NetworkConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    if (cfg.levels < 1) throw ConfigError("network: levels must be >= 1");
    if (cfg.base_channels % 4 != 0 || cfg.base_channels < 4) {
      throw ConfigError("network: base channels " + std::to_string(cfg.base_channels) +
                        " must be a positive multiple of 4");
    }
    SplitMix64 rng(seed);
    int c_in = cfg.in_channels;
    for (int lvl = 0; lvl < cfg.levels; ++lvl) {
      const int target = cfg.base_channels << lvl;
      const std::string name = "enc" + std::to_string(lvl);
      if (cfg.encoder == EncoderKind::cofres) {
        cofres_.emplace_back();
        cofres_.back().init(store_, name, c_in, target, rng);
      } else {
        plain_enc_.emplace_back();
        plain_enc_.back().init(store_, name, c_in, target, rng);
      }
      c_in = target;
    }
    if (cfg.use_ca) {
      const int n_ca = cfg.ca_all_skips ? cfg.levels : 1;
      for (int i = 0; i < n_ca; ++i) {
        ca_.emplace_back();
        ca_.back().init(store_, "ca" + std::to_string(i));
      }
    }
    for (int lvl = cfg.levels - 1; lvl >= 0; --lvl) {
      const int c = cfg.base_channels << lvl;
      const std::string name = "dec" + std::to_string(lvl);
      if (cfg.decoder == DecoderKind::ar) {
        ar_up_.emplace_back();
        ar_up_.back().init(store_, name + ".up", c, rng);
        ar_lstm_.emplace_back();
        ar_lstm_.back().init(store_, name + ".lstm", c, rng);
      } else {
        plain_dec_.emplace_back();
        plain_dec_.back().init(store_, name, c, rng);
      }
    }
    final_conv_.init(store_, "head", cfg.base_channels / 2, cfg.out_channels, 1, true, rng);
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    const Dims xd = x.dims();
    if (xd.c != cfg_.in_channels) {
      throw ShapeError("network: expected " + std::to_string(cfg_.in_channels) +
                       " input channels, got " + xd.str());
    }
    int h = xd.h, w = xd.w;
    for (int lvl = 0; lvl < cfg_.levels; ++lvl) {
      if (h % 2 != 0 || w % 2 != 0) {
        throw ShapeError("network: input " + xd.str() + " is not pool-divisible at level " +
                         std::to_string(lvl));
      }
      h /= 2;
      w /= 2;
    }

    std::vector<Tensor<T>> skips;
    skips.reserve(cfg_.levels);
    Tensor<T> cur = x;
    for (int lvl = 0; lvl < cfg_.levels; ++lvl) {
      auto [skip, pooled] = cfg_.encoder == EncoderKind::cofres
                                ? cofres_[lvl].forward(cur, mode)
                                : plain_enc_[lvl].forward(cur, mode);
      skips.push_back(skip);
      cur = pooled;
    }

    if (cfg_.use_ca) {
      if (cfg_.ca_all_skips) {
        for (int lvl = 0; lvl < cfg_.levels; ++lvl) skips[lvl] = ca_[lvl].forward(skips[lvl]);
      } else {
        skips[cfg_.levels - 1] = ca_[0].forward(skips[cfg_.levels - 1]);
      }
    }

    for (int i = 0; i < cfg_.levels; ++i) {
      const int lvl = cfg_.levels - 1 - i;  // deepest stage first
      if (cfg_.decoder == DecoderKind::ar) {
        Tensor<T> up = ar_up_[i].forward(cur, mode);
        cur = ar_lstm_[i].forward(skips[lvl], up);
      } else {
        cur = plain_dec_[i].forward(skips[lvl], cur, mode);
      }
    }
    return sigmoid(final_conv_.forward(cur));
  }

  ParamStore<T>& params() { return store_; }
  const ParamStore<T>& params() const { return store_; }
  const NetworkConfig& config() const { return cfg_; }

  /// G matrix of the bottom attention block from the most recent forward.
  const Tensor<T>& last_channel_dependency() const {
    if (ca_.empty() || !ca_.front().cached_g.valid()) {
      throw StateError("no channel-dependency matrix cached; run a forward pass first");
    }
    return ca_.front().cached_g;
  }

  std::vector<CofResBlock<T>>& encoder_blocks() { return cofres_; }
  std::vector<ArUpsampleBlock<T>>& upsample_blocks() { return ar_up_; }
  std::vector<ArLstmBlock<T>>& lstm_blocks() { return ar_lstm_; }
  std::vector<ChannelAttention<T>>& attention_blocks() { return ca_; }

 private:
  NetworkConfig cfg_;
  ParamStore<T> store_;
  std::vector<CofResBlock<T>> cofres_;
  std::vector<PlainEncBlock<T>> plain_enc_;
  std::vector<ChannelAttention<T>> ca_;
  std::vector<ArUpsampleBlock<T>> ar_up_;
  std::vector<ArLstmBlock<T>> ar_lstm_;
  std::vector<PlainDecBlock<T>> plain_dec_;
  Conv2D<T> final_conv_;
};

}  // namespace ravnet
