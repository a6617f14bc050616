#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ravnet/errors.hpp"

namespace ravnet {

/// CT display window: HU values across [wl - ww/2, wl + ww/2] map linearly
/// onto [0, 1], clamped outside. Defaults are a conventional liver window;
/// both knobs are exposed on the CLI.
struct WindowSpec {
  double wl = 60.0;
  double ww = 200.0;

  void validate() const {
    if (!(ww > 0.0)) throw ConfigError("window width must be positive");
  }
};

inline double hu_window(double hu, const WindowSpec& spec) {
  spec.validate();
  const double lo = spec.wl - spec.ww / 2.0;
  return std::clamp((hu - lo) / spec.ww, 0.0, 1.0);
}

template <typename T>
std::vector<T> hu_window(const std::vector<std::int16_t>& hu,
                         const WindowSpec& spec) {
  spec.validate();
  const double lo = spec.wl - spec.ww / 2.0;
  std::vector<T> out(hu.size());
  for (std::size_t i = 0; i < hu.size(); ++i) {
    out[i] = static_cast<T>(
        std::clamp((static_cast<double>(hu[i]) - lo) / spec.ww, 0.0, 1.0));
  }
  return out;
}

}  // namespace ravnet
