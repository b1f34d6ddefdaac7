#include "qbp/numkit/random.hpp"

#include <cmath>

#include "qbp/numkit/linalg.hpp"

namespace qbp::num {

std::uint64_t Rng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::next_u64() {
  ++counter_;
  return mix(seed_ + counter_ * 0x9E3779B97F4A7C15ULL);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
}

MatD random_ginibre(std::size_t D, Rng& rng) {
  MatD G(D, D);
  for (auto& z : G.storage()) {
    double re = rng.normal();
    double im = rng.normal();
    z = cd(re, im);
  }
  return G;
}

MatD random_hermitian(std::size_t D, Rng& rng) { return hermitian_part(random_ginibre(D, rng)); }

MatD random_unitary(std::size_t D, Rng& rng) {
  MatD G = random_ginibre(D, rng);
  for (std::size_t j = 0; j < D; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      cd p;
      for (std::size_t i = 0; i < D; ++i) p += conj(G(i, k)) * G(i, j);
      for (std::size_t i = 0; i < D; ++i) G(i, j) -= p * G(i, k);
    }
    double nrm = 0;
    for (std::size_t i = 0; i < D; ++i) nrm += norm2(G(i, j));
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < D; ++i) G(i, j) /= nrm;
  }
  return G;
}

MatD random_density(std::size_t D, Rng& rng) {
  MatD G = random_ginibre(D, rng);
  MatD rho = matmul(G, G.adjoint());
  rho = hermitian_part(rho);
  rho *= 1.0 / rho.trace().re;
  return rho;
}

}  // namespace qbp::num
