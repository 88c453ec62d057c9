#pragma once

#include <random>

#include "tbq/hilbert.hpp"

namespace tbq::testing {

inline TimeBinLattice two_bins() { return {2, kDefaultBinSpacing}; }
inline Wavepacket narrow_packet() { return Wavepacket(kDefaultBinSpacing / 20.0); }

inline ComplexVector random_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  ComplexVector v(n);
  for (int k = 0; k < n; ++k) v(k) = Complex(normal(rng), normal(rng));
  return v;
}

/// Haar-distributed unit vector on `bins` bins.
inline PhotonState random_state(std::mt19937_64& rng, int bins, const Wavepacket& packet = narrow_packet()) {
  return {random_vector(rng, 2 * bins).normalized(), TimeBinLattice(bins, kDefaultBinSpacing), packet};
}

/// Random full-rank (Ginibre) density matrix of the given dimension.
inline ComplexMatrix random_density_matrix(std::mt19937_64& rng, int dim) {
  ComplexMatrix g(dim, dim);
  for (int c = 0; c < dim; ++c) g.col(c) = random_vector(rng, dim);
  ComplexMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline DensityMatrix random_density(std::mt19937_64& rng, int bins, const Wavepacket& packet = narrow_packet()) {
  return {random_density_matrix(rng, 2 * bins), TimeBinLattice(bins, kDefaultBinSpacing), packet};
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace tbq::testing
