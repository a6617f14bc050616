#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "ravnet/dataset.hpp"
#include "ravnet/errors.hpp"
#include "ravnet/params.hpp"
#include "ravnet/tensor.hpp"

namespace ravnet {

struct TensorRecord {
  std::string name;
  Dims dims{1, 1, 1, 1};
  std::vector<float> data;
};

/// On-disk training state. Layout, all little-endian:
///   "RAVN" | u32 version=1 | u32 epoch | u64 adam_step
///   | u32 config_len | config text (key=value lines)
///   | u32 param_count | param records
///   | u32 moment_count | moment records (names suffixed ".m"/".v")
///   | u64 rng_state
/// Record: u16 name_len | name | u8 ndim=4 | 4 x u32 dims | f32 data.
struct Checkpoint {
  std::uint32_t version = 1;
  std::uint32_t epoch = 0;
  std::uint64_t adam_step = 0;
  std::string config_text;
  std::vector<TensorRecord> params;
  std::vector<TensorRecord> moments;
  std::uint64_t rng_state = 0;
};

namespace detail {

inline void put_u16le(std::string& out, std::uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char((v >> 8) & 0xff));
}

inline void put_u64le(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

inline void put_f32le(std::string& out, float v) {
  put_u32le(out, std::bit_cast<std::uint32_t>(v));
}

inline void put_record(std::string& out, const TensorRecord& r) {
  if (r.name.size() > 0xffff) {
    throw FormatError("tensor name too long: " + r.name);
  }
  put_u16le(out, std::uint16_t(r.name.size()));
  out += r.name;
  out.push_back(char(4));
  put_u32le(out, std::uint32_t(r.dims.n));
  put_u32le(out, std::uint32_t(r.dims.c));
  put_u32le(out, std::uint32_t(r.dims.h));
  put_u32le(out, std::uint32_t(r.dims.w));
  if (r.data.size() != r.dims.count()) {
    throw ShapeError("record '" + r.name + "' data does not match dims");
  }
  for (float v : r.data) put_f32le(out, v);
}

inline std::uint64_t read_u64le(ByteReader& r, const char* what) {
  std::uint64_t lo = r.u32le(what);
  std::uint64_t hi = r.u32le(what);
  return lo | (hi << 32);
}

inline TensorRecord read_record(ByteReader& r) {
  TensorRecord rec;
  r.need(2, "record name length");
  const std::uint16_t len =
      std::uint16_t(r.bytes[r.pos]) | (std::uint16_t(r.bytes[r.pos + 1]) << 8);
  r.pos += 2;
  r.need(len, "record name");
  rec.name.assign(reinterpret_cast<const char*>(&r.bytes[r.pos]), len);
  r.pos += len;
  const std::size_t ndim_at = r.pos;
  const std::uint8_t ndim = r.u8("record ndim");
  if (ndim != 4) {
    throw FormatError(r.path + ": record '" + rec.name + "' has ndim " +
                      std::to_string(ndim) + " at byte " +
                      std::to_string(ndim_at) + ", expected 4");
  }
  std::uint32_t d[4];
  for (auto& v : d) v = r.u32le("record dims");
  if (d[0] == 0 || d[1] == 0 || d[2] == 0 || d[3] == 0) {
    throw FormatError(r.path + ": record '" + rec.name +
                      "' has a zero dimension");
  }
  rec.dims = Dims{int(d[0]), int(d[1]), int(d[2]), int(d[3])};
  const std::size_t count = rec.dims.count();
  rec.data.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    rec.data.push_back(std::bit_cast<float>(r.u32le("record data")));
  }
  return rec;
}

}  // namespace detail

/// Atomic write: serialize to <path>.tmp, then rename over the target, so a
/// failed save never leaves a partial checkpoint at the final path.
inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::string out;
  out.append("RAVN", 4);
  detail::put_u32le(out, ck.version);
  detail::put_u32le(out, ck.epoch);
  detail::put_u64le(out, ck.adam_step);
  if (ck.config_text.size() > 0xffffffffu) {
    throw FormatError("config text too long");
  }
  detail::put_u32le(out, std::uint32_t(ck.config_text.size()));
  out += ck.config_text;
  detail::put_u32le(out, std::uint32_t(ck.params.size()));
  for (const auto& r : ck.params) detail::put_record(out, r);
  detail::put_u32le(out, std::uint32_t(ck.moments.size()));
  for (const auto& r : ck.moments) detail::put_record(out, r);
  detail::put_u64le(out, ck.rng_state);

  const std::string tmp = path + ".tmp";
  try {
    detail::write_all_bytes(tmp, out);
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

inline Checkpoint load_checkpoint(const std::string& path) {
  const auto bytes = detail::read_all_bytes(path);
  detail::ByteReader r{bytes, 0, path};
  r.expect_magic("RAVN");
  Checkpoint ck;
  ck.version = r.u32le("version");
  if (ck.version != 1) {
    throw FormatError(path + ": unsupported checkpoint version " +
                      std::to_string(ck.version));
  }
  ck.epoch = r.u32le("epoch");
  ck.adam_step = detail::read_u64le(r, "adam step");
  const std::uint32_t config_len = r.u32le("config length");
  r.need(config_len, "config text");
  ck.config_text.assign(reinterpret_cast<const char*>(&bytes[r.pos]),
                        config_len);
  r.pos += config_len;
  const std::uint32_t param_count = r.u32le("param count");
  for (std::uint32_t i = 0; i < param_count; ++i) {
    ck.params.push_back(detail::read_record(r));
  }
  const std::uint32_t moment_count = r.u32le("moment count");
  for (std::uint32_t i = 0; i < moment_count; ++i) {
    ck.moments.push_back(detail::read_record(r));
  }
  ck.rng_state = detail::read_u64le(r, "rng state");
  r.expect_end();
  return ck;
}

template <typename T>
std::vector<TensorRecord> snapshot_params(const ParamStore<T>& store) {
  std::vector<TensorRecord> out;
  out.reserve(store.size());
  for (const auto& e : store.entries()) {
    TensorRecord rec;
    rec.name = e.name;
    rec.dims = e.tensor.dims();
    rec.data.reserve(e.tensor.size());
    for (T v : e.tensor.values()) rec.data.push_back(float(v));
    out.push_back(std::move(rec));
  }
  return out;
}

/// Copies checkpoint tensors into an existing store. Mismatches (missing,
/// extra, or reshaped tensors) throw StateError naming the first offender in
/// registration order.
template <typename T>
void load_params_into(ParamStore<T>& store,
                      const std::vector<TensorRecord>& records) {
  std::unordered_map<std::string, const TensorRecord*> by_name;
  for (const auto& r : records) by_name.emplace(r.name, &r);
  for (auto& e : store.entries()) {
    auto it = by_name.find(e.name);
    if (it == by_name.end()) {
      throw StateError("checkpoint is missing tensor '" + e.name + "'");
    }
    const TensorRecord& rec = *it->second;
    if (!(rec.dims == e.tensor.dims())) {
      throw StateError("checkpoint tensor '" + e.name + "' has mismatched dims");
    }
    auto dst = e.tensor.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = T(rec.data[i]);
    by_name.erase(it);
  }
  if (!by_name.empty()) {
    // Deterministic choice of offender: first leftover in record order.
    for (const auto& r : records) {
      if (by_name.count(r.name)) {
        throw StateError("checkpoint tensor '" + r.name +
                         "' does not exist in the model");
      }
    }
  }
}

}  // namespace ravnet
