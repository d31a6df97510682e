#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bicex/rng.hpp"
#include "bicex/stats.hpp"

using namespace bicex;

TEST_CASE("same key replays the same sequence") {
  RngStream a = RngStream::derive(42, 7, "phase-rw", 3);
  RngStream b = RngStream::derive(42, 7, "phase-rw", 3);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("every key component separates streams") {
  const std::uint64_t base = RngStream::derive(42, 7, "phase-rw", 3).next_u64();
  CHECK(RngStream::derive(43, 7, "phase-rw", 3).next_u64() != base);
  CHECK(RngStream::derive(42, 8, "phase-rw", 3).next_u64() != base);
  CHECK(RngStream::derive(42, 7, "init-rw", 3).next_u64() != base);
  CHECK(RngStream::derive(42, 7, "phase-rw", 4).next_u64() != base);
}

TEST_CASE("streams do not depend on sibling consumption") {
  RngStream sibling = RngStream::derive(9, 0, "a", 0);
  for (int i = 0; i < 17; ++i) sibling.next_u64();
  RngStream fresh = RngStream::derive(9, 0, "b", 0);
  CHECK(fresh.next_u64() == RngStream::derive(9, 0, "b", 0).next_u64());
}

TEST_CASE("uniform lies in the unit interval with the right mean") {
  RngStream rng = RngStream::derive(1, 0, "u", 0);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  const double se = 1.0 / std::sqrt(12.0 * n);
  CHECK(std::fabs(sum / n - 0.5) < 5.0 * se);
}

TEST_CASE("below covers the full range") {
  RngStream rng = RngStream::derive(2, 0, "b", 0);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t v = rng.below(7);
    REQUIRE(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("uniform_int is inclusive on both ends") {
  RngStream rng = RngStream::derive(3, 0, "i", 0);
  std::set<int> seen;
  for (int i = 0; i < 5000; ++i) {
    const int v = rng.uniform_int(-2, 2);
    REQUIRE(v >= -2);
    REQUIRE(v <= 2);
    seen.insert(v);
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("bernoulli hits its rate") {
  RngStream rng = RngStream::derive(4, 0, "p", 0);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += rng.bernoulli(0.3) ? 1 : 0;
  const double se = std::sqrt(0.3 * 0.7 / n);
  CHECK(std::fabs(static_cast<double>(hits) / n - 0.3) < 5.0 * se);
  RngStream edge = RngStream::derive(4, 1, "p", 0);
  CHECK_FALSE(edge.bernoulli(0.0));
  CHECK(edge.bernoulli(1.0));
}

TEST_CASE("normal matches its first two moments") {
  RngStream rng = RngStream::derive(5, 0, "n", 0);
  const int n = 100000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(2.0, 3.0);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::fabs(mean - 2.0) < 5.0 * 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(var - 9.0) < 0.5);
}

TEST_CASE("gamma and beta match their means") {
  RngStream rng = RngStream::derive(6, 0, "g", 0);
  const int n = 50000;
  double gsum = 0.0;
  double bsum = 0.0;
  for (int i = 0; i < n; ++i) {
    gsum += rng.gamma(2.0);
    bsum += rng.beta(2.0, 3.0);
  }
  CHECK(std::fabs(gsum / n - 2.0) < 0.05);
  CHECK(std::fabs(bsum / n - 0.4) < 0.01);
}

TEST_CASE("subset is sorted, unique, in range, and uniform") {
  RngStream rng = RngStream::derive(7, 0, "s", 0);
  std::map<std::pair<int, int>, int> freq;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const std::vector<int> s = rng.subset(5, 2);
    REQUIRE(s.size() == 2);
    REQUIRE(s[0] < s[1]);
    REQUIRE(s[0] >= 0);
    REQUIRE(s[1] < 5);
    ++freq[{s[0], s[1]}];
  }
  CHECK(freq.size() == 10);
  for (const auto& [pair, count] : freq) {
    CHECK(std::fabs(static_cast<double>(count) / n - 0.1) < 0.015);
  }
  CHECK(rng.subset(4, 4) == std::vector<int>{0, 1, 2, 3});
  CHECK(rng.subset(4, 0).empty());
}

TEST_CASE("normal_quantile inverts normal_cdf") {
  for (double p : {0.01, 0.1, 0.25, 0.5, 0.9, 0.975, 0.999}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-8));
  }
  CHECK(z_for_confidence(0.95) == doctest::Approx(1.959964).epsilon(1e-5));
}

TEST_CASE("wilson bounds bracket the proportion and respect symmetry") {
  const double z = 1.959964;
  const double lo = wilson_lower(8, 10, z);
  const double hi = wilson_upper(8, 10, z);
  CHECK(lo < 0.8);
  CHECK(hi > 0.8);
  CHECK(lo == doctest::Approx(1.0 - wilson_upper(2, 10, z)).epsilon(1e-12));
  CHECK(wilson_lower(0, 10, z) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(wilson_upper(10, 10, z) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gamma_q and chi_square_sf agree with closed forms") {
  for (double x : {0.1, 0.5, 1.0, 2.5}) {
    CHECK(gamma_q(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-8));
    CHECK(chi_square_sf(x, 2) == doctest::Approx(std::exp(-x / 2.0)).epsilon(1e-8));
  }
}

TEST_CASE("truncated_gaussian_positive_mean closed form") {
  CHECK(truncated_gaussian_positive_mean(0.0, 1.0) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * 3.14159265358979323846)).epsilon(1e-10));
  CHECK(truncated_gaussian_positive_mean(10.0, 1e-9) == doctest::Approx(10.0));
  CHECK(truncated_gaussian_positive_mean(-10.0, 1e-9) == doctest::Approx(0.0));
}

TEST_CASE("format_double round trips and stays locale free") {
  for (double v : {0.1, -1.5, 3.0, 1e-9, 123456.789, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("mean_of and sample_sd") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  CHECK(mean_of(xs) == doctest::Approx(2.5));
  CHECK(sample_sd(xs) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
}
