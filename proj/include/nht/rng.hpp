#pragma once

#include <cstdint>
#include <initializer_list>

namespace nht {

/// Stateless counter-based generator: every draw is a pure function of a key,
/// so any site of any layer can be regenerated without replaying a stream.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Folds an ordered list of 64-bit words into one key.
std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept;

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(std::uint64_t key) noexcept;

/// Field components drawn per lattice site.
enum class Stream : std::uint64_t {
  real_potential = 1,
  imag_potential = 2,
  bond_x = 3,
  bond_y = 4,
  bond_z = 5,
};

inline double site_uniform(std::uint64_t seed, Stream stream, std::uint64_t site) noexcept {
  return uniform01(hash_words({seed, static_cast<std::uint64_t>(stream), site}));
}

}  // namespace nht
