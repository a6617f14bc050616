#pragma once

#include <cstdint>
#include <cstdlib>
#include <thread>
#include <vector>

namespace ravnet {

/// Thread cap for op kernels: RAVNET_THREADS when set, else hardware cores.
inline int max_threads() {
  static const int cached = [] {
    if (const char* env = std::getenv("RAVNET_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
  }();
  return cached;
}

/// Runs body(begin, end) over [0, count) in contiguous chunks. Each index is
/// handled entirely by one thread, so results are bit-identical for any
/// thread count. Small ranges run inline; threads are only worth spawning
/// when the per-chunk work dwarfs thread startup.
template <typename F>
void parallel_for(std::int64_t count, std::int64_t grain, F&& body) {
  const int threads = max_threads();
  if (threads <= 1 || count <= grain) {
    body(std::int64_t{0}, count);
    return;
  }
  const std::int64_t parts =
      std::min<std::int64_t>(threads, (count + grain - 1) / grain);
  const std::int64_t chunk = (count + parts - 1) / parts;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(parts - 1));
  for (std::int64_t p = 1; p < parts; ++p) {
    const std::int64_t b = p * chunk;
    const std::int64_t e = std::min(count, b + chunk);
    if (b >= e) break;
    workers.emplace_back([&body, b, e] { body(b, e); });
  }
  body(std::int64_t{0}, std::min(count, chunk));
  for (auto& t : workers) t.join();
}

}  // namespace ravnet
