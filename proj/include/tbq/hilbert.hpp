#pragma once

// Single-photon states over polarization (x) time-bin lattice.
//
// Amplitudes are stored polarization-major, bin-minor:
//   (H,0), (H,1), ..., (H,n-1), (V,0), (V,1), ..., (V,n-1)
// which for two bins is the standard two-qubit order h0, h tau, v0, v tau.

#include <complex>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace tbq {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using JonesVector = Eigen::Vector2cd;
using JonesMatrix = Eigen::Matrix2cd;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kDefaultBinSpacing = 2.3e-12;

enum class Pol : int { H = 0, V = 1 };

/// Named polarization states, with the phase conventions
/// p = (h+v)/sqrt2, m = (h-v)/sqrt2, r = (i h + v)/sqrt2, l = (h + i v)/sqrt2.
namespace polarization {
JonesVector h();
JonesVector v();
JonesVector p();
JonesVector m();
JonesVector r();
JonesVector l();
/// Resolves "h", "v", "p", "m", "r", "l".
std::optional<JonesVector> by_name(const std::string& name);
}  // namespace polarization

/// Two-bin temporal qubit states: zero = |0>, tau = |tau>,
/// plus/minus = (|0> +- |tau>)/sqrt2, times = (i|0> + |tau>)/sqrt2,
/// div = (|0> + i|tau>)/sqrt2.
namespace timebin {
Eigen::Vector2cd zero();
Eigen::Vector2cd tau();
Eigen::Vector2cd plus();
Eigen::Vector2cd minus();
Eigen::Vector2cd times();
Eigen::Vector2cd div();
/// Resolves "0", "tau", "plus", "minus", "times", "div".
std::optional<Eigen::Vector2cd> by_name(const std::string& name);
}  // namespace timebin

/// Discrete arrival-time slots k * spacing, k = 0 .. bins-1.
class TimeBinLattice {
 public:
  TimeBinLattice(int bins, double spacing);

  int bins() const noexcept { return bins_; }
  double spacing() const noexcept { return spacing_; }
  double arrival_time(int bin) const noexcept { return bin * spacing_; }
  int dimension() const noexcept { return 2 * bins_; }

  TimeBinLattice with_bins(int bins) const { return {bins, spacing_}; }
  bool same_spacing(const TimeBinLattice& other) const noexcept;
  bool operator==(const TimeBinLattice& other) const noexcept;

 private:
  int bins_;
  double spacing_;
};

/// Gaussian amplitude envelope of one bin; |f(t)|^2 has standard deviation sigma_t.
class Wavepacket {
 public:
  explicit Wavepacket(double sigma_t);

  double sigma_t() const noexcept { return sigma_t_; }
  bool operator==(const Wavepacket& other) const noexcept;

 private:
  double sigma_t_;
};

/// Returns a message when the envelope is too wide for bins to be resolved
/// (sigma_t > spacing / 3).
std::optional<std::string> resolvability_warning(const TimeBinLattice& lattice,
                                                 const Wavepacket& packet);

class PhotonState {
 public:
  /// Throws DimensionError on length mismatch and ConfigurationError if the
  /// squared norm exceeds one.
  PhotonState(ComplexVector amplitudes, TimeBinLattice lattice, Wavepacket packet);

  /// |pol> (x) |bin>.
  static PhotonState basis(Pol pol, int bin, const TimeBinLattice& lattice,
                           const Wavepacket& packet);
  /// |pol> (x) (bin_amps[0]|0> + bin_amps[1]|tau> + ...); bin_amps may be
  /// shorter than the lattice.
  static PhotonState product(const JonesVector& pol, const ComplexVector& bin_amps,
                             const TimeBinLattice& lattice, const Wavepacket& packet);

  static int index(Pol pol, int bin, int bins) noexcept {
    return static_cast<int>(pol) * bins + bin;
  }

  const ComplexVector& amplitudes() const noexcept { return amplitudes_; }
  Complex amplitude(Pol pol, int bin) const { return amplitudes_(index(pol, bin, bins())); }
  const TimeBinLattice& lattice() const noexcept { return lattice_; }
  const Wavepacket& packet() const noexcept { return packet_; }
  int bins() const noexcept { return lattice_.bins(); }
  double norm_squared() const { return amplitudes_.squaredNorm(); }

  /// Pads with empty bins or truncates (projects) onto the first `bins` bins.
  PhotonState resized(int bins) const;
  /// Projection onto the two-bin logical subspace.
  PhotonState logical() const { return resized(2); }
  PhotonState scaled(Complex factor) const;

 private:
  ComplexVector amplitudes_;
  TimeBinLattice lattice_;
  Wavepacket packet_;
};

/// Hermitian, positive semidefinite, trace in (0, 1].
class DensityMatrix {
 public:
  static constexpr double kHermiticityTolerance = 1e-12;
  static constexpr double kEigenvalueTolerance = 1e-10;

  DensityMatrix(ComplexMatrix matrix, TimeBinLattice lattice, Wavepacket packet);

  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const TimeBinLattice& lattice() const noexcept { return lattice_; }
  const Wavepacket& packet() const noexcept { return packet_; }
  int dimension() const noexcept { return static_cast<int>(matrix_.rows()); }
  double trace() const { return matrix_.trace().real(); }
  double purity() const;

  /// Convex combination weight * a + (1 - weight) * b.
  static DensityMatrix mixture(double weight, const DensityMatrix& a, const DensityMatrix& b);

 private:
  ComplexMatrix matrix_;
  TimeBinLattice lattice_;
  Wavepacket packet_;
};

struct NormalizedState {
  PhotonState state;
  double survival_probability;
};

/// Squared norms below this are treated as an annihilated photon.
inline constexpr double kAnnihilationThreshold = 1e-24;

/// Throws AnnihilatedStateError for a zero-norm input.
NormalizedState normalize(const PhotonState& state);

/// <a|b>, antilinear in the first argument.
Complex inner_product(const PhotonState& a, const PhotonState& b);

/// |psi><psi| for a unit-norm state.
DensityMatrix to_density(const PhotonState& state);

/// Traces out the temporal degree of freedom.
JonesMatrix partial_trace_time(const DensityMatrix& rho);

}  // namespace tbq
