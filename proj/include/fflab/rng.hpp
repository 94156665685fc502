#pragma once

// Counter-based random number utilities.
//
// Every random quantity in the lab is a pure function of (key, counter),
// where keys are derived from a master seed through labelled splits. This
// keeps replicas reproducible independently of thread count and lets lazy
// evaluation draw exactly the same variates as eager evaluation would.

#include <cstdint>
#include <cmath>

namespace fflab::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer (Vigna). Bijective on 64-bit words.
inline std::uint64_t mix(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// Labelled key split. Two mixing rounds so that related salts
// (replica 1, replica 2, ...) give unrelated keys.
inline std::uint64_t derive(std::uint64_t key, std::uint64_t salt) {
  return mix(mix(key + kGolden) ^ (salt * 0xD1B54A32D192ED03ull + 0x8BB84B93962EACC9ull));
}

// k-th word of the stream with the given key (splitmix64 sequence).
inline std::uint64_t word(std::uint64_t key, std::uint64_t k) {
  return mix(key + (k + 1) * kGolden);
}

// Uniform on the open interval (0,1); never returns 0 or 1, safe under log().
// 52 bits of resolution: the +0.5 offset is exactly representable at this
// scale, so the result is (k+1/2)/2^52 with no rounding (a 53-bit variant
// rounds (2^53-1)+0.5 up to 2^53 and can return exactly 1.0).
inline double u01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

inline double exponential(std::uint64_t bits, double rate) {
  return -std::log(u01(bits)) / rate;
}

// Purpose labels for key splits. Keep values stable: they are part of the
// reproducibility contract (a seed documents a run).
enum Salt : std::uint64_t {
  kSaltSites = 1,     // static site occupancy
  kSaltBirth = 2,     // birth clocks
  kSaltIgnite = 3,    // ignition arrivals
  kSaltReplica = 4,   // per-replica split
  kSaltDecision = 5,  // per-decision split (characteristic length scan)
  kSaltAux = 6,       // scalar draws inside a replica
};

// Sequential stream for the rare places where a counter is more natural
// than an explicit index (scalar draws per replica).
struct Stream {
  std::uint64_t key;
  std::uint64_t ctr = 0;

  explicit Stream(std::uint64_t k) : key(k) {}
  std::uint64_t bits() { return word(key, ctr++); }
  double uniform() { return u01(bits()); }
  double exponential(double rate) { return rng::exponential(bits(), rate); }
};

// Canonical key for replica r of an experiment seeded with `seed`.
inline std::uint64_t replica_key(std::uint64_t seed, std::uint64_t r) {
  return derive(derive(seed, kSaltReplica), r);
}

// FNV-1a, used to fold experiment names and spec descriptions into keys.
inline std::uint64_t fnv1a(const char* s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (; *s; ++s) {
    h ^= static_cast<unsigned char>(*s);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace fflab::rng
