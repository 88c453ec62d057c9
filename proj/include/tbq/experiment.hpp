#pragma once

// Synthetic HOM delay scans with Poisson coincidence counts, and the
// estimators that turn a scan back into projection values.

#include <cstdint>
#include <set>
#include <vector>

#include "tbq/hilbert.hpp"
#include "tbq/hom.hpp"

namespace tbq {

inline constexpr double kDefaultBaselineCounts = 1000.0;
/// Points closer than this many sigma_t to a dip lag are not baseline.
inline constexpr double kBaselineExclusionSigmas = 12.0;

struct ScanConfig {
  std::vector<double> delays;
  double baseline_counts = kDefaultBaselineCounts;  // expected counts at R = 1
  std::uint64_t seed = 0;
  std::uint32_t scan_id = 0;  // separates the random streams of scans sharing a seed
  VisibilityModel visibility;
  bool noiseless = false;  // counts = expectation instead of Poisson draws
};

/// Symmetric grid k * step for |k * step| <= half_width, with every value in
/// `required` inserted exactly (and the nearest regular point dropped if it
/// falls within step / 2 of one).
std::vector<double> make_delay_grid(double half_width, double step, const std::vector<double>& required);

struct ScanPoint {
  double delay;
  double counts;  // integer-valued unless noiseless
  double ratio_hat;
};

struct ScanTrace {
  std::vector<ScanPoint> points;
  ScanConfig config;
  PhotonState ancilla;
  int lag_bins;  // bins spanned by encoded and ancilla; dips sit at |m| < lag_bins
  double spacing;
  double sigma_t;
  double baseline;  // estimated from the same scan
};

/// Checks N0 > 0, a strictly increasing grid containing 0 and +-spacing, and
/// baseline shoulders beyond (lag_bins * spacing + 12 sigma_t) on both sides.
void validate_scan_config(const ScanConfig& cfg, int lag_bins, double spacing, double sigma_t);

/// counts[i] ~ Poisson(N0 * R(delay_i)), each point drawn from its own
/// Philox stream (seed, scan_id, i).
ScanTrace sample_scan(const EncodedState& encoded, const PhotonState& ancilla, const ScanConfig& cfg);

/// Mean counts over points farther than 12 sigma_t from every dip lag.
double estimate_baseline(const ScanTrace& trace);

/// Index of the grid point at `delay`; throws if the grid has no point there.
std::size_t grid_index(const ScanTrace& trace, double delay);

struct ProjectionEstimate {
  PhotonState projector;  // ancilla translated by bin_shift bins, on the logical lattice
  int bin_shift;
  double delay;
  double counts;
  double baseline;
  double p_hat;  // 1 - R_hat, clamped to [0, 1]
};

/// Bins carrying amplitude above `tolerance`.
std::set<int> occupied_bins(const PhotonState& state, double tolerance = 1e-12);

/// Reads the projection at zero delay, plus the one-bin-translated projection
/// at +-spacing when the ancilla occupies a single bin.
std::vector<ProjectionEstimate> extract_projections(const ScanTrace& trace,
                                                    const std::set<int>& ancilla_bins);

/// 1 - counts(0) / baseline for a scan of identical states.
double estimate_visibility(const ScanTrace& trace);

}  // namespace tbq
