#pragma once

// Hong-Ou-Mandel projection of an encoded photon onto an ancilla photon.
//
// A positive delay postpones the ancilla: ancilla bin k arrives at
// k * spacing + delay. The coincidence ratio R is the coincidence rate at the
// given delay divided by the rate for fully distinguishable photons.

#include <variant>
#include <vector>

#include "tbq/hilbert.hpp"

namespace tbq {

/// Scales the two-photon interference term (mode mismatch). Must lie in [0, 1].
class VisibilityModel {
 public:
  explicit VisibilityModel(double visibility = 1.0);
  double value() const noexcept { return visibility_; }

 private:
  double visibility_;
};

struct ProjectionResult {
  double overlap_probability;  // <psi_a(delay)| rho_e |psi_a(delay)>
  double ratio;                // 1 - V * overlap_probability
  double delay;
};

using EncodedState = std::variant<PhotonState, DensityMatrix>;

/// Overlap of two Gaussian amplitude envelopes offset by dt: exp(-dt^2 / (8 sigma^2)).
double envelope_overlap(const Wavepacket& packet, double dt);

/// Sum over polarizations and bin pairs of conj(e_pj) a_pk env(delay + (k - j) spacing).
Complex state_overlap_at_delay(const PhotonState& encoded, const PhotonState& ancilla, double delay);

/// The delayed ancilla projected onto the encoded state's (pol, bin) modes.
ComplexVector shifted_ancilla(const PhotonState& ancilla, const TimeBinLattice& target_lattice,
                              double delay);

ProjectionResult coincidence_ratio(const PhotonState& encoded, const PhotonState& ancilla,
                                   double delay, const VisibilityModel& vis = VisibilityModel());
ProjectionResult coincidence_ratio(const DensityMatrix& encoded, const PhotonState& ancilla,
                                   double delay, const VisibilityModel& vis = VisibilityModel());
ProjectionResult coincidence_ratio(const EncodedState& encoded, const PhotonState& ancilla,
                                   double delay, const VisibilityModel& vis = VisibilityModel());

struct TracePoint {
  double delay;
  double ratio;
};

/// Pointwise coincidence_ratio over a strictly increasing, non-empty grid.
std::vector<TracePoint> scan_trace(const EncodedState& encoded, const PhotonState& ancilla,
                                   const std::vector<double>& delays,
                                   const VisibilityModel& vis = VisibilityModel());

/// Delays m * spacing, |m| <= bins - 1, at which bin pairs coincide.
std::vector<double> dip_lags(int bins, double spacing);

/// Independent route to R: both photons are expanded in an orthonormalized
/// basis of their temporal mode functions, sent through a balanced beam
/// splitter as explicit creation operators, and the bosonic two-photon Fock
/// amplitudes are summed over output-arm coincidences. Visibility mixes in a
/// run where the ancilla carries an orthogonal which-photon label.
/// Throws DimensionError if the per-arm mode count exceeds `mode_cap`.
double fock_oracle_ratio(const PhotonState& encoded, const PhotonState& ancilla, double delay,
                         const VisibilityModel& vis = VisibilityModel(), int mode_cap = 64);

}  // namespace tbq
