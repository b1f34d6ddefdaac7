#pragma once

#include <cstdint>

#include "qbp/numkit/matrix.hpp"

namespace qbp::num {

// SplitMix64 in counter mode: draw k of a stream with seed s is
// mix(s + (k + 1) * 0x9E3779B97F4A7C15), where mix is the SplitMix64 finalizer.
// Uniforms use the top 53 bits; normals use Box-Muller on consecutive draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed) {}
  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

// Entries drawn in row-major order.
MatD random_ginibre(std::size_t D, Rng& rng);
// (G + G^dag) / 2 with G Ginibre.
MatD random_hermitian(std::size_t D, Rng& rng);
// Gram-Schmidt on a Ginibre matrix.
MatD random_unitary(std::size_t D, Rng& rng);
// G G^dag / tr, full rank almost surely.
MatD random_density(std::size_t D, Rng& rng);

}  // namespace qbp::num
