#pragma once

// Two-qubit state tomography from HOM projection data on the logical
// (two-bin) space: linear inversion, maximum likelihood with a
// T^dagger T / Tr parametrization, fidelity, and Poisson bootstrap errors.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tbq/experiment.hpp"
#include "tbq/hilbert.hpp"
#include "tbq/optics.hpp"

namespace tbq {

struct TomographyMember {
  std::string label;  // e.g. "h0", "p+", "rx"
  PhotonState state;  // logical two-bin projector
  PreparationPlan plan;
  int scan;           // index into TomographySet::scans
  int bin_shift;      // delay = bin_shift * spacing within that scan
};

struct ScheduledScan {
  std::string label;
  PhotonState ancilla;
  std::vector<int> members;
};

struct TomographySet {
  std::vector<TomographyMember> members;
  std::vector<ScheduledScan> scans;
};

/// {h, v, p, r} (x) {0, tau, +, x}. Single-bin ancillas |pol,0> are scanned
/// once and read at zero delay and at +tau, which covers |pol,tau>; 12 scans
/// yield the 16 projections.
TomographySet default_tomography_set(const TimeBinLattice& lattice, const Wavepacket& packet);

/// Smallest singular value of G_ij = |<psi_i|psi_j>|^2.
double gram_smallest_singular_value(const TomographySet& set);

struct LinearInversion {
  ComplexMatrix rho;  // Hermitian, trace 1, possibly not PSD
  double min_eigenvalue;
  bool physical;  // min_eigenvalue >= -1e-10
};

/// Unique Hermitian rho with <psi_i|rho|psi_i> = p_i, normalized by the
/// trace implied by the basis-state members.
LinearInversion linear_inversion(const std::vector<double>& projections, const TomographySet& set);

/// Observed dip counts n and distinguishable-limit baseline N of one projection.
struct ProjectionCounts {
  double observed;
  double baseline;
};

struct MleOptions {
  double visibility = 1.0;
  int restarts = 3;  // identity seed, linear-inversion seed, then random seeds
  std::uint64_t seed = 0;
  double function_tolerance = 1e-10;
  int max_iterations = 5000;
};

struct TomographyResult {
  DensityMatrix rho_hat;
  std::optional<double> fidelity_vs_target;
  double fidelity_std = 0.0;
  double nll = 0.0;
  int iterations = 0;
  int bootstrap_replicas = 0;
  int dropped_replicas = 0;
  Eigen::MatrixXd real_std;
  Eigen::MatrixXd imag_std;
};

/// Expected dip counts N0 * (1 - V <psi_i|rho|psi_i>) for each member.
std::vector<ProjectionCounts> expected_counts(const ComplexMatrix& rho, const TomographySet& set,
                                              double baseline, double visibility);

/// Poisson negative log-likelihood sum_i [N_i q_i - n_i log(N_i q_i)],
/// q_i = 1 - V <psi_i|rho|psi_i>.
double poisson_nll(const ComplexMatrix& rho, const std::vector<ProjectionCounts>& counts,
                   const TomographySet& set, double visibility);

/// rho = T^dagger T / Tr(T^dagger T) with T lower triangular, fitted by
/// minimizing the Poisson negative log-likelihood. Throws NumericalError
/// carrying the best NLL if no restart converges.
TomographyResult mle_reconstruct(const std::vector<ProjectionCounts>& counts, const TomographySet& set,
                                 const MleOptions& options = {});

/// <psi|rho|psi> for a pure target.
double fidelity(const DensityMatrix& rho, const PhotonState& target);
/// (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);
double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);

using TomographyTarget = std::variant<PhotonState, DensityMatrix>;
double fidelity(const DensityMatrix& rho, const TomographyTarget& target);

struct BootstrapSummary {
  double fidelity_std;
  Eigen::MatrixXd real_std;
  Eigen::MatrixXd imag_std;
  int replicas_used;
  int dropped;
  std::vector<double> fidelities;
};

/// Resamples n_i* ~ Poisson(n_i) per replica (replica r uses Philox stream
/// (seed, r)), reruns the MLE, and reports standard deviations. Replicas whose
/// MLE fails are dropped; more than 10% dropped is an error.
BootstrapSummary bootstrap_errors(const std::vector<ProjectionCounts>& counts, const TomographySet& set,
                                  int replicas, std::uint64_t seed, const MleOptions& options,
                                  const TomographyTarget& target);

struct AcquisitionOptions {
  std::vector<double> delays;
  double baseline_counts = kDefaultBaselineCounts;
  double visibility = 1.0;
  std::uint64_t seed = 0;
  bool noiseless = false;
  bool calibrate_visibility = true;  // separate |h,0> vs |h,0> scan
};

struct Acquisition {
  std::vector<ProjectionCounts> counts;  // in member order
  std::vector<double> projections;       // p_hat in member order
  std::vector<ScanTrace> traces;         // in scan order
  double visibility;                     // value handed to the MLE
  std::optional<ScanTrace> calibration;
};

/// Runs every scheduled scan against the encoded state and collects the
/// projection counts.
Acquisition acquire_tomography_data(const EncodedState& encoded, const TomographySet& set,
                                    const AcquisitionOptions& options);

}  // namespace tbq
