#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace bicex {

/// Deterministic keyed random stream.
///
/// A stream is addressed by a 64-bit root seed plus a (replicate, module tag,
/// phase) key. Distinct keys yield statistically independent streams and the
/// same key always replays the same sequence, independent of platform and of
/// how many other streams were consumed. All samplers are implemented on top
/// of the raw 64-bit output so results do not depend on the standard
/// library's distribution internals.
class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed);

  static RngStream derive(std::uint64_t root_seed, std::uint64_t replicate,
                          std::string_view module_tag, std::uint64_t phase);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53 bits of precision.
  double uniform();

  /// Uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n);

  /// Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi);

  bool bernoulli(double p);

  double normal(double mean, double stddev);

  /// Gamma(shape) with unit scale, shape > 0.
  double gamma(double shape);

  double beta(double alpha, double beta);

  /// Uniform k-subset of {0, ..., n-1}, returned in increasing order.
  std::vector<int> subset(int n, int k);

 private:
  std::uint64_t s_[4];
};

}  // namespace bicex
