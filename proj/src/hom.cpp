#include "tbq/hom.hpp"

#include <algorithm>
#include <cmath>

#include "tbq/errors.hpp"

namespace tbq {

namespace {

void require_shared_packet(const PhotonState& ancilla, const TimeBinLattice& lattice,
                           const Wavepacket& packet) {
  if (!ancilla.lattice().same_spacing(lattice)) throw DimensionError("bin spacing mismatch");
  if (!(ancilla.packet() == packet)) throw DimensionError("wavepacket mismatch");
}

void require_unit_ancilla(const PhotonState& ancilla) {
  if (std::abs(ancilla.norm_squared() - 1.0) > 1e-10)
    throw ConfigurationError("ancilla must be a unit-norm pure state");
}

ProjectionResult make_result(double overlap, double delay, const VisibilityModel& vis) {
  const double p = std::clamp(overlap, 0.0, 1.0);
  return {p, 1.0 - vis.value() * p, delay};
}

}  // namespace

VisibilityModel::VisibilityModel(double visibility) : visibility_(visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw ConfigurationError("visibility outside [0, 1]");
}

double envelope_overlap(const Wavepacket& packet, double dt) {
  const double s = packet.sigma_t();
  return std::exp(-dt * dt / (8.0 * s * s));
}

ComplexVector shifted_ancilla(const PhotonState& ancilla, const TimeBinLattice& target_lattice,
                              double delay) {
  const int ne = target_lattice.bins();
  const int na = ancilla.bins();
  const double tau = target_lattice.spacing();
  ComplexVector w = ComplexVector::Zero(2 * ne);
  for (int pol = 0; pol < 2; ++pol) {
    const Pol p = static_cast<Pol>(pol);
    for (int j = 0; j < ne; ++j) {
      Complex sum = 0.0;
      for (int k = 0; k < na; ++k)
        sum += ancilla.amplitude(p, k) * envelope_overlap(ancilla.packet(), delay + (k - j) * tau);
      w(PhotonState::index(p, j, ne)) = sum;
    }
  }
  return w;
}

Complex state_overlap_at_delay(const PhotonState& encoded, const PhotonState& ancilla, double delay) {
  require_shared_packet(ancilla, encoded.lattice(), encoded.packet());
  return encoded.amplitudes().dot(shifted_ancilla(ancilla, encoded.lattice(), delay));
}

ProjectionResult coincidence_ratio(const PhotonState& encoded, const PhotonState& ancilla,
                                   double delay, const VisibilityModel& vis) {
  require_unit_ancilla(ancilla);
  return make_result(std::norm(state_overlap_at_delay(encoded, ancilla, delay)), delay, vis);
}

ProjectionResult coincidence_ratio(const DensityMatrix& encoded, const PhotonState& ancilla,
                                   double delay, const VisibilityModel& vis) {
  require_unit_ancilla(ancilla);
  require_shared_packet(ancilla, encoded.lattice(), encoded.packet());
  const ComplexVector w = shifted_ancilla(ancilla, encoded.lattice(), delay);
  const double overlap = w.dot(encoded.matrix() * w).real();
  return make_result(overlap, delay, vis);
}

ProjectionResult coincidence_ratio(const EncodedState& encoded, const PhotonState& ancilla,
                                   double delay, const VisibilityModel& vis) {
  return std::visit([&](const auto& e) { return coincidence_ratio(e, ancilla, delay, vis); }, encoded);
}

std::vector<TracePoint> scan_trace(const EncodedState& encoded, const PhotonState& ancilla,
                                   const std::vector<double>& delays, const VisibilityModel& vis) {
  if (delays.empty()) throw ConfigurationError("delay grid is empty");
  for (std::size_t i = 1; i < delays.size(); ++i)
    if (!(delays[i] > delays[i - 1])) throw ConfigurationError("delay grid must be strictly increasing");
  std::vector<TracePoint> out;
  out.reserve(delays.size());
  for (double d : delays) out.push_back({d, coincidence_ratio(encoded, ancilla, d, vis).ratio});
  return out;
}

std::vector<double> dip_lags(int bins, double spacing) {
  std::vector<double> lags;
  for (int m = -(bins - 1); m <= bins - 1; ++m) lags.push_back(m * spacing);
  return lags;
}

}  // namespace tbq
