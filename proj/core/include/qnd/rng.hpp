#pragma once

#include <cstdint>
#include <random>

namespace qnd {

/// splitmix64 mix function. Used to derive independent per-trajectory seeds
/// from (base_seed, trajectory_id) so that inserting new trajectories never
/// perturbs the streams of existing ones.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded random stream. uniform() is generated from raw engine output
/// (not std::uniform_real_distribution, whose output is implementation
/// defined), so sequences are reproducible bit for bit.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

inline RngStream trajectory_stream(std::uint64_t base_seed, std::uint64_t trajectory_id) {
  return RngStream(base_seed ^ splitmix64(trajectory_id));
}

}  // namespace qnd
