#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "fflab/rng.hpp"

using namespace fflab;

namespace {

// Textbook splitmix64: advance the state by the golden gamma, then finalize.
// word(key, k) must reproduce the k-th output of the generator seeded with
// the key, which this reimplements verbatim as an oracle.
std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

TEST_CASE("word reproduces the splitmix64 stream") {
  for (std::uint64_t key : {0ull, 1ull, 0xDEADBEEFull, 0xFFFFFFFFFFFFFFFFull}) {
    std::uint64_t state = key;
    for (std::uint64_t k = 0; k < 100; ++k)
      CHECK(rng::word(key, k) == splitmix64_next(state));
  }
}

TEST_CASE("stream equals the indexed word sequence") {
  rng::Stream st(987654321);
  for (std::uint64_t k = 0; k < 50; ++k) CHECK(st.bits() == rng::word(987654321, k));
}

TEST_CASE("derive separates salts and keys") {
  const std::uint64_t key = 42;
  std::set<std::uint64_t> seen;
  for (std::uint64_t salt = 0; salt < 1000; ++salt) seen.insert(rng::derive(key, salt));
  CHECK(seen.size() == 1000);  // no collisions among adjacent salts

  // deriving from adjacent keys with the same salt also separates
  seen.clear();
  for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(rng::derive(k, 7));
  CHECK(seen.size() == 1000);

  CHECK(rng::derive(key, 1) == rng::derive(key, 1));  // deterministic
}

TEST_CASE("replica keys do not collide over large windows") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed : {1ull, 2ull, 77777ull})
    for (std::uint64_t r = 0; r < 40000; ++r) seen.insert(rng::replica_key(seed, r));
  CHECK(seen.size() == 120000);
}

TEST_CASE("u01 stays inside the open interval") {
  CHECK(rng::u01(0) > 0.0);
  CHECK(rng::u01(0xFFFFFFFFFFFFFFFFull) < 1.0);
  CHECK(rng::u01(0) < 1e-15);
  CHECK(rng::u01(0xFFFFFFFFFFFFFFFFull) > 1.0 - 1e-15);

  // sample mean of the uniform: 3 sigma around 1/2
  const std::uint64_t n = 100000;
  double sum = 0;
  for (std::uint64_t k = 0; k < n; ++k) sum += rng::u01(rng::word(5, k));
  const double mean = sum / static_cast<double>(n);
  const double sigma = 1.0 / std::sqrt(12.0 * static_cast<double>(n));
  CHECK(std::abs(mean - 0.5) < 3 * sigma);
}

TEST_CASE("exponential has the right mean and scaling") {
  const std::uint64_t n = 100000;
  for (double rate : {0.5, 1.0, 3.0}) {
    double sum = 0;
    for (std::uint64_t k = 0; k < n; ++k) sum += rng::exponential(rng::word(11, k), rate);
    const double mean = sum / static_cast<double>(n);
    const double sigma = 1.0 / (rate * std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(mean - 1.0 / rate) < 3 * sigma);
  }
}

TEST_CASE("fnv1a matches published test vectors") {
  CHECK(rng::fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(rng::fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(rng::fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("salt streams look independent") {
  // correlation between site and birth streams derived from one replica key
  const std::uint64_t key = rng::replica_key(99, 3);
  const std::uint64_t ka = rng::derive(key, rng::kSaltSites);
  const std::uint64_t kb = rng::derive(key, rng::kSaltBirth);
  CHECK(ka != kb);
  const std::uint64_t n = 50000;
  double sa = 0, sb = 0, sab = 0;
  for (std::uint64_t k = 0; k < n; ++k) {
    const double a = rng::u01(rng::word(ka, k));
    const double b = rng::u01(rng::word(kb, k));
    sa += a;
    sb += b;
    sab += a * b;
  }
  const double na = sa / static_cast<double>(n), nb = sb / static_cast<double>(n);
  const double cov = sab / static_cast<double>(n) - na * nb;
  // correlation of independent uniforms: sd of the sample cov ~ 1/(12 sqrt n)
  CHECK(std::abs(cov) < 3.0 / (12.0 * std::sqrt(static_cast<double>(n))));
}
