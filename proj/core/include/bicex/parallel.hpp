#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <utility>
#include <vector>

namespace bicex {

/// Deterministic chunked map-reduce over an index range.
///
/// The range [0, n) is split into a fixed number of chunks that does not
/// depend on the machine, each chunk produces an accumulator via `build`,
/// and chunk results merge in chunk order. The reduction is therefore
/// bit-identical for any thread count, including 1.
template <typename Acc>
Acc parallel_reduce(std::int64_t n, const std::function<Acc(std::int64_t, std::int64_t)>& build,
                    const std::function<void(Acc&, Acc&&)>& merge, int threads = 0) {
  constexpr std::int64_t kChunks = 128;
  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : static_cast<int>(hw);
  }
  const std::int64_t chunks = n < kChunks ? (n > 0 ? n : 1) : kChunks;
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
  ranges.reserve(static_cast<std::size_t>(chunks));
  for (std::int64_t c = 0; c < chunks; ++c) {
    const std::int64_t lo = n * c / chunks;
    const std::int64_t hi = n * (c + 1) / chunks;
    ranges.emplace_back(lo, hi);
  }

  std::vector<Acc> parts(ranges.size());
  if (threads == 1) {
    for (std::size_t c = 0; c < ranges.size(); ++c) {
      parts[c] = build(ranges[c].first, ranges[c].second);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t c = next.fetch_add(1);
        if (c >= ranges.size()) return;
        parts[c] = build(ranges[c].first, ranges[c].second);
      }
    };
    std::vector<std::thread> pool;
    const int nthreads = threads < static_cast<int>(ranges.size())
                             ? threads
                             : static_cast<int>(ranges.size());
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  Acc out = std::move(parts.front());
  for (std::size_t c = 1; c < parts.size(); ++c) merge(out, std::move(parts[c]));
  return out;
}

}  // namespace bicex
