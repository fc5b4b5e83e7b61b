#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace evmanifold {

// Counter-based splittable generator built on the SplitMix64 output function.
// Each stream is a (key, counter) pair; deriving a substream hashes the parent
// key with a stream name, so inserting a new consumer never shifts the draws
// of existing ones. Output is identical across platforms and thread counts.

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(detail::splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

  // Substream derivation; independent of any draws made from the parent.
  Rng stream(std::string_view name) const {
    return Rng(key_, detail::splitmix64(key_ ^ detail::fnv1a(name)));
  }

  std::uint64_t next_u64() { return detail::splitmix64(key_ ^ (counter_++ * 0xd1342543de82ef95ULL)); }

  // Uniform on the open interval (0,1); never returns an endpoint, so
  // -1/log(u) and log(u) are always finite.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  // Standard normal via Box-Muller; deterministic across platforms, unlike
  // std::normal_distribution.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  Rng(std::uint64_t, std::uint64_t derived_key) : key_(derived_key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace evmanifold
