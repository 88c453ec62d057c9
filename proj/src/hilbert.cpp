#include "tbq/hilbert.hpp"

#include <cmath>
#include <sstream>

#include "tbq/errors.hpp"

namespace tbq {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const Complex kI{0.0, 1.0};

void require_compatible(const TimeBinLattice& a, const Wavepacket& pa, const TimeBinLattice& b,
                        const Wavepacket& pb) {
  if (!(a == b)) {
    std::ostringstream msg;
    msg << "lattice mismatch: " << a.bins() << " bins @ " << a.spacing() << " s vs " << b.bins()
        << " bins @ " << b.spacing() << " s";
    throw DimensionError(msg.str());
  }
  if (!(pa == pb)) throw DimensionError("wavepacket mismatch");
}

}  // namespace

namespace polarization {
JonesVector h() { return {1.0, 0.0}; }
JonesVector v() { return {0.0, 1.0}; }
JonesVector p() { return {kInvSqrt2, kInvSqrt2}; }
JonesVector m() { return {kInvSqrt2, -kInvSqrt2}; }
JonesVector r() { return {kI * kInvSqrt2, kInvSqrt2}; }
JonesVector l() { return {kInvSqrt2, kI * kInvSqrt2}; }

std::optional<JonesVector> by_name(const std::string& name) {
  if (name == "h") return h();
  if (name == "v") return v();
  if (name == "p") return p();
  if (name == "m") return m();
  if (name == "r") return r();
  if (name == "l") return l();
  return std::nullopt;
}
}  // namespace polarization

namespace timebin {
Eigen::Vector2cd zero() { return {1.0, 0.0}; }
Eigen::Vector2cd tau() { return {0.0, 1.0}; }
Eigen::Vector2cd plus() { return {kInvSqrt2, kInvSqrt2}; }
Eigen::Vector2cd minus() { return {kInvSqrt2, -kInvSqrt2}; }
Eigen::Vector2cd times() { return {kI * kInvSqrt2, kInvSqrt2}; }
Eigen::Vector2cd div() { return {kInvSqrt2, kI * kInvSqrt2}; }

std::optional<Eigen::Vector2cd> by_name(const std::string& name) {
  if (name == "0") return zero();
  if (name == "tau") return tau();
  if (name == "plus") return plus();
  if (name == "minus") return minus();
  if (name == "times") return times();
  if (name == "div") return div();
  return std::nullopt;
}
}  // namespace timebin

TimeBinLattice::TimeBinLattice(int bins, double spacing) : bins_(bins), spacing_(spacing) {
  if (bins < 2) throw ConfigurationError("time-bin lattice needs at least 2 bins");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw ConfigurationError("time-bin spacing must be positive");
}

bool TimeBinLattice::same_spacing(const TimeBinLattice& other) const noexcept {
  return std::abs(spacing_ - other.spacing_) <= 1e-12 * std::max(spacing_, other.spacing_);
}

bool TimeBinLattice::operator==(const TimeBinLattice& other) const noexcept {
  return bins_ == other.bins_ && same_spacing(other);
}

Wavepacket::Wavepacket(double sigma_t) : sigma_t_(sigma_t) {
  if (!(sigma_t > 0.0) || !std::isfinite(sigma_t))
    throw ConfigurationError("wavepacket width must be positive");
}

bool Wavepacket::operator==(const Wavepacket& other) const noexcept {
  return std::abs(sigma_t_ - other.sigma_t_) <= 1e-12 * std::max(sigma_t_, other.sigma_t_);
}

std::optional<std::string> resolvability_warning(const TimeBinLattice& lattice,
                                                 const Wavepacket& packet) {
  if (packet.sigma_t() <= lattice.spacing() / 3.0) return std::nullopt;
  std::ostringstream msg;
  msg << "wavepacket width " << packet.sigma_t() << " s exceeds a third of the bin spacing "
      << lattice.spacing() << " s; time bins are not resolvable";
  return msg.str();
}

PhotonState::PhotonState(ComplexVector amplitudes, TimeBinLattice lattice, Wavepacket packet)
    : amplitudes_(std::move(amplitudes)), lattice_(lattice), packet_(packet) {
  if (amplitudes_.size() != lattice_.dimension())
    throw DimensionError("amplitude vector length does not match 2 * bins");
  if (norm_squared() > 1.0 + 1e-12) throw ConfigurationError("state norm exceeds one");
}

PhotonState PhotonState::basis(Pol pol, int bin, const TimeBinLattice& lattice,
                               const Wavepacket& packet) {
  if (bin < 0 || bin >= lattice.bins()) throw DimensionError("bin index outside lattice");
  ComplexVector amps = ComplexVector::Zero(lattice.dimension());
  amps(index(pol, bin, lattice.bins())) = 1.0;
  return {std::move(amps), lattice, packet};
}

PhotonState PhotonState::product(const JonesVector& pol, const ComplexVector& bin_amps,
                                 const TimeBinLattice& lattice, const Wavepacket& packet) {
  const int n = lattice.bins();
  if (bin_amps.size() > n) throw DimensionError("more bin amplitudes than lattice bins");
  ComplexVector amps = ComplexVector::Zero(lattice.dimension());
  for (int k = 0; k < bin_amps.size(); ++k) {
    amps(index(Pol::H, k, n)) = pol(0) * bin_amps(k);
    amps(index(Pol::V, k, n)) = pol(1) * bin_amps(k);
  }
  return {std::move(amps), lattice, packet};
}

PhotonState PhotonState::resized(int bins) const {
  const int n = this->bins();
  const int keep = std::min(n, bins);
  ComplexVector amps = ComplexVector::Zero(2 * bins);
  amps.segment(0, keep) = amplitudes_.segment(0, keep);
  amps.segment(bins, keep) = amplitudes_.segment(n, keep);
  return {std::move(amps), lattice_.with_bins(bins), packet_};
}

PhotonState PhotonState::scaled(Complex factor) const {
  return {amplitudes_ * factor, lattice_, packet_};
}

DensityMatrix::DensityMatrix(ComplexMatrix matrix, TimeBinLattice lattice, Wavepacket packet)
    : matrix_(std::move(matrix)), lattice_(lattice), packet_(packet) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() != lattice_.dimension())
    throw DimensionError("density matrix shape does not match 2 * bins");
  if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > kHermiticityTolerance)
    throw ConfigurationError("density matrix is not Hermitian");
  const ComplexMatrix herm = 0.5 * (matrix_ + matrix_.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(herm, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kEigenvalueTolerance)
    throw ConfigurationError("density matrix is not positive semidefinite");
  const double tr = matrix_.trace().real();
  if (!(tr > 0.0) || tr > 1.0 + 1e-12) throw ConfigurationError("density matrix trace outside (0, 1]");
  matrix_ = herm;
}

double DensityMatrix::purity() const { return (matrix_ * matrix_).trace().real(); }

DensityMatrix DensityMatrix::mixture(double weight, const DensityMatrix& a, const DensityMatrix& b) {
  require_compatible(a.lattice_, a.packet_, b.lattice_, b.packet_);
  if (weight < 0.0 || weight > 1.0) throw ConfigurationError("mixture weight outside [0, 1]");
  return {weight * a.matrix_ + (1.0 - weight) * b.matrix_, a.lattice_, a.packet_};
}

NormalizedState normalize(const PhotonState& state) {
  const double n2 = state.norm_squared();
  if (n2 < kAnnihilationThreshold) throw AnnihilatedStateError();
  return {state.scaled(1.0 / std::sqrt(n2)), n2};
}

Complex inner_product(const PhotonState& a, const PhotonState& b) {
  require_compatible(a.lattice(), a.packet(), b.lattice(), b.packet());
  return a.amplitudes().dot(b.amplitudes());
}

DensityMatrix to_density(const PhotonState& state) {
  if (std::abs(state.norm_squared() - 1.0) > 1e-10)
    throw ConfigurationError("to_density expects a unit-norm state");
  const ComplexVector& a = state.amplitudes();
  return {a * a.adjoint(), state.lattice(), state.packet()};
}

JonesMatrix partial_trace_time(const DensityMatrix& rho) {
  const int n = rho.lattice().bins();
  const ComplexMatrix& m = rho.matrix();
  JonesMatrix out = JonesMatrix::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int k = 0; k < n; ++k) out(a, b) += m(a * n + k, b * n + k);
  return out;
}

}  // namespace tbq
