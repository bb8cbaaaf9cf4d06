#ifndef QMEM_RNG_HPP
#define QMEM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace qmem {

/// Seed derivation used everywhere randomness is needed. A single base seed
/// plus a stage tag and an index give an independent stream, so results do
/// not depend on the order in which stages or parallel branches execute.
///
/// Derivation (documented so manifests fully determine outputs):
///   state = base XOR fnv1a64(tag); state += golden * (index + 1);
///   seed  = splitmix64_mix(state).
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index) {
  std::uint64_t state = base ^ fnv1a64(tag);
  state += 0x9e3779b97f4a7c15ull * (index + 1);
  return splitmix64_mix(state);
}

/// Uniform double in (0,1) from the top 53 bits of the engine output.
/// Hand-rolled (instead of std::uniform_real_distribution) so that sample
/// streams are identical across standard-library implementations.
inline double uniform_open01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Box-Muller normal deviates from uniform_open01, for the same portability
/// reason as above.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open01(rng_);
    const double u2 = uniform_open01(rng_);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qmem

#endif  // QMEM_RNG_HPP
