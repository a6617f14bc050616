#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ravnet/errors.hpp"
#include "ravnet/rng.hpp"
#include "ravnet/tensor.hpp"
#include "ravnet/windowing.hpp"

namespace ravnet {

struct HuImage {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::int16_t> data;  // row-major HU values
};

struct MaskImage {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::uint8_t> data;  // row-major, 0 or 1
};

struct SliceSample {
  HuImage image;
  MaskImage mask;
  std::string id;
};

struct ManifestEntry {
  std::string image_path;
  std::string mask_path;
  std::string id;
};

/// Ordered list of slice files. Relative paths are resolved against the
/// directory containing the manifest CSV.
struct Manifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t split_seed = 0;
};

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char((v >> 8) & 0xff));
  out.push_back(char((v >> 16) & 0xff));
  out.push_back(char((v >> 24) & 0xff));
}

inline void put_i16le(std::string& out, std::int16_t v) {
  const std::uint16_t u = static_cast<std::uint16_t>(v);
  out.push_back(char(u & 0xff));
  out.push_back(char((u >> 8) & 0xff));
}

struct ByteReader {
  const std::vector<unsigned char>& bytes;
  std::size_t pos = 0;
  const std::string& path;

  void need(std::size_t n, const char* what) const {
    if (pos + n > bytes.size()) {
      throw FormatError(path + ": truncated reading " + what + " at byte " +
                        std::to_string(pos));
    }
  }

  std::uint32_t u32le(const char* what) {
    need(4, what);
    std::uint32_t v = std::uint32_t(bytes[pos]) |
                      (std::uint32_t(bytes[pos + 1]) << 8) |
                      (std::uint32_t(bytes[pos + 2]) << 16) |
                      (std::uint32_t(bytes[pos + 3]) << 24);
    pos += 4;
    return v;
  }

  std::int16_t i16le(const char* what) {
    need(2, what);
    std::uint16_t v =
        std::uint16_t(bytes[pos]) | (std::uint16_t(bytes[pos + 1]) << 8);
    pos += 2;
    return static_cast<std::int16_t>(v);
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes[pos++];
  }

  void expect_magic(const char magic[4]) {
    need(4, "magic");
    if (!std::equal(magic, magic + 4, bytes.begin() + pos)) {
      throw FormatError(path + ": bad magic at byte 0");
    }
    pos += 4;
  }

  void expect_end() const {
    if (pos != bytes.size()) {
      throw FormatError(path + ": trailing bytes at byte " +
                        std::to_string(pos));
    }
  }
};

inline std::vector<unsigned char> read_all_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

inline void write_all_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

inline void check_slice_dims(std::uint32_t h, std::uint32_t w,
                             const std::string& path, std::size_t header_end) {
  if (h == 0 || w == 0) {
    throw FormatError(path + ": zero dimension in header at byte " +
                      std::to_string(header_end));
  }
}

}  // namespace detail

inline void write_hu_slice(const std::string& path, const HuImage& img) {
  if (img.data.size() != std::size_t(img.height) * img.width) {
    throw ShapeError("write_hu_slice: buffer does not match dims");
  }
  std::string out;
  out.reserve(12 + img.data.size() * 2);
  out.append("HUSL", 4);
  detail::put_u32le(out, img.height);
  detail::put_u32le(out, img.width);
  for (std::int16_t v : img.data) detail::put_i16le(out, v);
  detail::write_all_bytes(path, out);
}

inline HuImage read_hu_slice(const std::string& path) {
  const auto bytes = detail::read_all_bytes(path);
  detail::ByteReader r{bytes, 0, path};
  r.expect_magic("HUSL");
  HuImage img;
  img.height = r.u32le("height");
  img.width = r.u32le("width");
  detail::check_slice_dims(img.height, img.width, path, r.pos);
  const std::size_t count = std::size_t(img.height) * img.width;
  img.data.reserve(count);
  for (std::size_t i = 0; i < count; ++i) img.data.push_back(r.i16le("pixel"));
  r.expect_end();
  return img;
}

inline void write_mask_slice(const std::string& path, const MaskImage& img) {
  if (img.data.size() != std::size_t(img.height) * img.width) {
    throw ShapeError("write_mask_slice: buffer does not match dims");
  }
  for (std::uint8_t v : img.data) {
    if (v > 1) throw DomainError("write_mask_slice: mask value not in {0,1}");
  }
  std::string out;
  out.reserve(12 + img.data.size());
  out.append("MSK0", 4);
  detail::put_u32le(out, img.height);
  detail::put_u32le(out, img.width);
  for (std::uint8_t v : img.data) out.push_back(char(v));
  detail::write_all_bytes(path, out);
}

inline MaskImage read_mask_slice(const std::string& path) {
  const auto bytes = detail::read_all_bytes(path);
  detail::ByteReader r{bytes, 0, path};
  r.expect_magic("MSK0");
  MaskImage img;
  img.height = r.u32le("height");
  img.width = r.u32le("width");
  detail::check_slice_dims(img.height, img.width, path, r.pos);
  const std::size_t count = std::size_t(img.height) * img.width;
  img.data.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = r.pos;
    std::uint8_t v = r.u8("mask byte");
    if (v > 1) {
      throw FormatError(path + ": mask byte not in {0,1} at byte " +
                        std::to_string(at));
    }
    img.data.push_back(v);
  }
  r.expect_end();
  return img;
}

inline void write_manifest(const std::string& path, const Manifest& m) {
  std::string out = "image_path,mask_path,id\n";
  for (const auto& e : m.entries) {
    out += e.image_path + "," + e.mask_path + "," + e.id + "\n";
  }
  detail::write_all_bytes(path, out);
}

/// Loads a manifest CSV and verifies every referenced file exists. Relative
/// paths are interpreted against the manifest's directory and returned
/// resolved, so downstream readers need no path context.
inline Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  const auto base = std::filesystem::path(path).parent_path();

  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(path + ": missing header line");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "image_path,mask_path,id") {
    throw FormatError(path + ": bad header '" + line + "'");
  }

  Manifest m;
  std::set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos ||
        line.find(',', c2 + 1) != std::string::npos) {
      throw FormatError(path + ": expected 3 fields on line " +
                        std::to_string(line_no));
    }
    ManifestEntry e;
    e.image_path = resolve(line.substr(0, c1));
    e.mask_path = resolve(line.substr(c1 + 1, c2 - c1 - 1));
    e.id = line.substr(c2 + 1);
    for (const auto* p : {&e.image_path, &e.mask_path}) {
      if (!seen.insert(*p).second) {
        throw FormatError(path + ": duplicate path '" + *p + "' on line " +
                          std::to_string(line_no));
      }
      if (!std::filesystem::exists(*p)) {
        throw IoError("manifest references missing file: " + *p);
      }
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline SliceSample read_slice(const ManifestEntry& entry) {
  SliceSample s;
  s.image = read_hu_slice(entry.image_path);
  s.mask = read_mask_slice(entry.mask_path);
  s.id = entry.id;
  if (s.image.height != s.mask.height || s.image.width != s.mask.width) {
    throw ShapeError("slice '" + entry.id + "': image " +
                     std::to_string(s.image.height) + "x" +
                     std::to_string(s.image.width) + " vs mask " +
                     std::to_string(s.mask.height) + "x" +
                     std::to_string(s.mask.width));
  }
  return s;
}

/// Seeded shuffle, then a floor-rule cut: train gets floor(train_frac * N)
/// entries. The small epsilon absorbs cases like 0.7 * 10 landing just below
/// the integer it represents.
inline std::pair<Manifest, Manifest> split_dataset(const Manifest& m,
                                                   double train_frac,
                                                   std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ConfigError("train_frac must be in (0, 1)");
  }
  const std::size_t n = m.entries.size();
  if (n == 0) throw EmptyInputError("split_dataset: empty manifest");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  SplitMix64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.next_below(i + 1)]);
  }

  const auto train_count = static_cast<std::size_t>(
      std::floor(train_frac * static_cast<double>(n) + 1e-9));
  Manifest train, test;
  train.split_seed = test.split_seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < train_count ? train : test;
    dst.entries.push_back(m.entries[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

/// Elliptical phantom geometry plus the HU bands the generator draws from.
/// Membership: rotate the pixel-center offset into the ellipse frame and test
/// (u/rx)^2 + (v/ry)^2 <= 1.
struct PhantomSpec {
  double cx = 0.0;
  double cy = 0.0;
  double rx = 0.0;
  double ry = 0.0;
  double angle = 0.0;
  double organ_hu_lo = 40.0;
  double organ_hu_hi = 70.0;
  double background_hu_lo = -100.0;
  double background_hu_hi = 30.0;
};

inline bool ellipse_contains(const PhantomSpec& s, double px, double py) {
  const double dx = px - s.cx;
  const double dy = py - s.cy;
  const double c = std::cos(s.angle);
  const double sn = std::sin(s.angle);
  const double u = c * dx + sn * dy;
  const double v = -sn * dx + c * dy;
  return (u / s.rx) * (u / s.rx) + (v / s.ry) * (v / s.ry) <= 1.0;
}

inline PhantomSpec make_phantom_spec(std::uint32_t size, SplitMix64& rng) {
  PhantomSpec s;
  s.cx = rng.uniform(0.35, 0.65) * size;
  s.cy = rng.uniform(0.35, 0.65) * size;
  s.rx = rng.uniform(0.15, 0.30) * size;
  s.ry = rng.uniform(0.15, 0.30) * size;
  s.angle = rng.uniform(0.0, 3.14159265358979323846);
  return s;
}

/// Per-pixel HU draws double as the noise model, so every value stays inside
/// the organ/background bands by construction. Pixel centers sit at +0.5.
inline SliceSample render_phantom(const PhantomSpec& spec, std::uint32_t size,
                                  const std::string& id, SplitMix64& rng) {
  SliceSample s;
  s.id = id;
  s.image.height = s.image.width = size;
  s.mask.height = s.mask.width = size;
  s.image.data.resize(std::size_t(size) * size);
  s.mask.data.resize(std::size_t(size) * size);
  for (std::uint32_t y = 0; y < size; ++y) {
    for (std::uint32_t x = 0; x < size; ++x) {
      const std::size_t i = std::size_t(y) * size + x;
      const bool inside = ellipse_contains(spec, x + 0.5, y + 0.5);
      const double hu = inside
                            ? rng.uniform(spec.organ_hu_lo, spec.organ_hu_hi)
                            : rng.uniform(spec.background_hu_lo,
                                          spec.background_hu_hi);
      s.image.data[i] = static_cast<std::int16_t>(std::lround(hu));
      s.mask.data[i] = inside ? 1 : 0;
    }
  }
  return s;
}

struct SynthResult {
  Manifest manifest;          // paths resolved into out_dir
  std::string manifest_path;  // out_dir/manifest.csv
  std::vector<PhantomSpec> specs;
};

inline SynthResult synth_generate(std::size_t count, std::uint32_t size,
                                  std::uint64_t seed,
                                  const std::string& out_dir) {
  if (count == 0) throw ConfigError("synth_generate: count must be positive");
  if (size == 0) throw ConfigError("synth_generate: size must be positive");
  std::filesystem::create_directories(out_dir);

  SynthResult result;
  Manifest relative;  // bare filenames, as written into the CSV
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "phantom_%03zu", i);
    PhantomSpec spec = make_phantom_spec(size, rng);
    SliceSample sample = render_phantom(spec, size, id, rng);

    const std::string image_name = std::string(id) + ".husl";
    const std::string mask_name = std::string(id) + ".msk";
    const auto image_path = std::filesystem::path(out_dir) / image_name;
    const auto mask_path = std::filesystem::path(out_dir) / mask_name;
    write_hu_slice(image_path.string(), sample.image);
    write_mask_slice(mask_path.string(), sample.mask);

    relative.entries.push_back({image_name, mask_name, id});
    result.manifest.entries.push_back(
        {image_path.string(), mask_path.string(), id});
    result.specs.push_back(spec);
  }
  result.manifest_path =
      (std::filesystem::path(out_dir) / "manifest.csv").string();
  write_manifest(result.manifest_path, relative);
  return result;
}

/// Windowed image as a (1, 1, H, W) tensor in [0, 1].
template <typename T>
Tensor<T> to_image_tensor(const SliceSample& s, const WindowSpec& window) {
  auto values = hu_window<T>(s.image.data, window);
  return Tensor<T>::from(
      {1, 1, int(s.image.height), int(s.image.width)}, values);
}

template <typename T>
Tensor<T> to_mask_tensor(const SliceSample& s) {
  std::vector<T> values(s.mask.data.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    values[i] = static_cast<T>(s.mask.data[i]);
  return Tensor<T>::from({1, 1, int(s.mask.height), int(s.mask.width)},
                         values);
}

}  // namespace ravnet
