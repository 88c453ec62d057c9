#pragma once

// Batch front end: JSON experiment configs in, CSV/JSON artifacts out.
//
// Exit codes: 0 success, 1 usage or config error, 2 best-effort result
// (target not exactly encodable), 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tbq/hilbert.hpp"
#include "tbq/hom.hpp"
#include "tbq/io.hpp"

namespace tbq::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 1, kBestEffort = 2, kNumericalFailure = 3 };

inline constexpr double kDefaultBandwidthNm = 3.0;
inline constexpr double kDefaultWavelengthNm = 780.0;

/// Temporal amplitude-envelope width (intensity standard deviation) of a
/// transform-limited Gaussian pulse whose spectral intensity FWHM is
/// c * bandwidth / wavelength^2, using FWHM_t * FWHM_nu = 2 ln2 / pi.
double bandwidth_to_sigma(double bandwidth_nm, double wavelength_nm);

struct ExperimentConfig {
  Json encoded = "phi_plus";  // state name, {"amps": [...]}, or {"rho": [...]}
  Json ancilla = "phi_plus";  // state name, {"amps": [...]}, or "tomography"
  double tau_s = kDefaultBinSpacing;
  int bins = 2;
  std::optional<double> sigma_t_s;
  std::optional<double> bandwidth_nm;
  std::optional<double> wavelength_nm;
  double visibility = 1.0;
  double grid_half_width_s = 8e-12;
  double grid_step_s = 0.05e-12;
  std::vector<double> delays_s;  // explicit grid; overrides half width / step
  double baseline_counts = 1000.0;
  std::uint64_t seed = 0;
  int replicas = 100;
  int oracle_samples = 200;
  bool noiseless = false;
  bool calibrate_visibility = true;
  bool timestamp = false;

  TimeBinLattice lattice() const { return {bins, tau_s}; }
  Wavepacket packet() const;
  std::vector<double> delays() const;
};

/// Validates and fills defaults; throws ConfigurationError with a line-item
/// message per problem found.
ExperimentConfig config_from_json(const Json& j);
/// Fully resolved config (derived sigma_t and grid included).
Json config_to_json(const ExperimentConfig& cfg);

/// phi_plus, phi_minus, eq6_state3, or <pol>_<bin> with pol in
/// {h, v, p, m, r, l} and bin in {0, tau, plus, minus, times, div}.
std::optional<PhotonState> named_state(const std::string& name, const TimeBinLattice& lattice,
                                       const Wavepacket& packet);

/// A state name or {"amps": [[re, im], ...]} on the logical lattice.
PhotonState resolve_state(const Json& spec, const TimeBinLattice& lattice, const Wavepacket& packet);

int cmd_prepare(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_scan(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_tomography(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_oracle_check(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Parses argv (prepare | scan | tomography | oracle-check, with --config,
/// --seed, --out, --noiseless, --timestamp) and runs the subcommand.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace tbq::cli
