#include "tbq/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tbq/errors.hpp"
#include "tbq/philox.hpp"

namespace tbq {

namespace {

constexpr std::uint32_t kBootstrapStream = 0xB0075u;
constexpr std::uint32_t kCalibrationScan = 0xCA11Bu;

// Eigenvalues below the roundoff floor are zeroed: their square roots would
// otherwise add spurious O(1e-8) terms to fidelities of pure states.
void square_root_psd(const ComplexMatrix& m, ComplexMatrix& out) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(m);
  const double floor =
      static_cast<double>(m.rows()) * std::numeric_limits<double>::epsilon() * eig.eigenvalues().cwiseAbs().maxCoeff();
  const Eigen::VectorXd w = eig.eigenvalues().unaryExpr([&](double x) { return x > floor ? std::sqrt(x) : 0.0; });
  out = eig.eigenvectors() * w.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

TomographySet default_tomography_set(const TimeBinLattice& lattice_in, const Wavepacket& packet) {
  const TimeBinLattice lattice = lattice_in.with_bins(2);
  const std::vector<std::pair<std::string, JonesVector>> pols{
      {"h", polarization::h()}, {"v", polarization::v()}, {"p", polarization::p()}, {"r", polarization::r()}};
  const std::vector<std::pair<std::string, Eigen::Vector2cd>> bins{
      {"0", timebin::zero()}, {"t", timebin::tau()}, {"+", timebin::plus()}, {"x", timebin::times()}};

  TomographySet set;
  for (const auto& [pname, pol] : pols) {
    auto member = [&](const std::string& bname, const Eigen::Vector2cd& bin, int scan, int shift) {
      PhotonState s = PhotonState::product(pol, bin, lattice, packet);
      set.members.push_back({pname + bname, s, compile_preparation(s), scan, shift});
      set.scans[scan].members.push_back(static_cast<int>(set.members.size()) - 1);
    };
    // |pol,0> scanned once covers |pol,tau> at +tau.
    const int single = static_cast<int>(set.scans.size());
    set.scans.push_back({pname + "0", PhotonState::product(pol, timebin::zero(), lattice, packet), {}});
    member(bins[0].first, bins[0].second, single, 0);
    member(bins[1].first, bins[1].second, single, 1);
    for (int b = 2; b < 4; ++b) {
      const int scan = static_cast<int>(set.scans.size());
      set.scans.push_back(
          {pname + bins[b].first, PhotonState::product(pol, bins[b].second, lattice, packet), {}});
      member(bins[b].first, bins[b].second, scan, 0);
    }
  }
  return set;
}

double gram_smallest_singular_value(const TomographySet& set) {
  const auto n = static_cast<int>(set.members.size());
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      gram(i, j) = std::norm(set.members[i].state.amplitudes().dot(set.members[j].state.amplitudes()));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
  return svd.singularValues().minCoeff();
}

LinearInversion linear_inversion(const std::vector<double>& projections, const TomographySet& set) {
  constexpr int d = 4;
  if (projections.size() != set.members.size() || set.members.size() != d * d)
    throw DimensionError("linear inversion needs 16 projections for 16 members");

  // Hermitian basis: E_aa, then E_ab + E_ba and i E_ab - i E_ba for a < b.
  std::vector<ComplexMatrix> basis;
  for (int a = 0; a < d; ++a) {
    ComplexMatrix e = ComplexMatrix::Zero(d, d);
    e(a, a) = 1.0;
    basis.push_back(e);
  }
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      ComplexMatrix x = ComplexMatrix::Zero(d, d);
      x(a, b) = 1.0;
      x(b, a) = 1.0;
      ComplexMatrix y = ComplexMatrix::Zero(d, d);
      y(a, b) = Complex(0.0, 1.0);
      y(b, a) = Complex(0.0, -1.0);
      basis.push_back(x);
      basis.push_back(y);
    }

  Eigen::MatrixXd design(d * d, d * d);
  Eigen::VectorXd rhs(d * d);
  for (int i = 0; i < d * d; ++i) {
    const ComplexVector psi = set.members[i].state.logical().amplitudes();
    for (int k = 0; k < d * d; ++k) design(i, k) = psi.dot(basis[k] * psi).real();
    rhs(i) = projections[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues().minCoeff() < 1e-10 * svd.singularValues().maxCoeff())
    throw NumericalError("tomography design matrix is singular", std::numeric_limits<double>::quiet_NaN());
  const Eigen::VectorXd coeff = svd.solve(rhs);

  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  for (int k = 0; k < d * d; ++k) rho += coeff(k) * basis[k];

  // Trace from the computational-basis members when present.
  double trace = 0.0;
  int basis_members = 0;
  for (int i = 0; i < d * d; ++i) {
    const ComplexVector psi = set.members[i].state.logical().amplitudes();
    if (psi.cwiseAbs().maxCoeff() > 1.0 - 1e-12) {
      trace += projections[i];
      ++basis_members;
    }
  }
  if (basis_members != d) trace = rho.trace().real();
  if (!(std::abs(trace) > 0.0)) throw NumericalError("projection data imply zero trace", 0.0);
  rho /= trace;
  rho = 0.5 * (rho + rho.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(rho, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  return {rho, min_eig, min_eig >= -DensityMatrix::kEigenvalueTolerance};
}

std::vector<ProjectionCounts> expected_counts(const ComplexMatrix& rho, const TomographySet& set,
                                              double baseline, double visibility) {
  std::vector<ProjectionCounts> out;
  for (const auto& m : set.members) {
    const ComplexVector psi = m.state.logical().amplitudes();
    const double p = psi.dot(rho * psi).real();
    out.push_back({baseline * std::max(0.0, 1.0 - visibility * p), baseline});
  }
  return out;
}

double fidelity(const DensityMatrix& rho, const PhotonState& target) {
  const ComplexVector psi = target.resized(rho.lattice().bins()).amplitudes();
  if (psi.size() != rho.dimension()) throw DimensionError("fidelity dimension mismatch");
  return psi.dot(rho.matrix() * psi).real();
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dimension() != sigma.dimension()) throw DimensionError("fidelity dimension mismatch");
  // Tr sqrt(sqrt(rho) sigma sqrt(rho)) is the nuclear norm of sqrt(rho) sqrt(sigma);
  // singular values stay accurate where eigenvalues near zero would not.
  ComplexMatrix a;
  ComplexMatrix b;
  square_root_psd(rho.matrix(), a);
  square_root_psd(sigma.matrix(), b);
  Eigen::JacobiSVD<ComplexMatrix> svd(a * b);
  const double s = svd.singularValues().sum();
  return s * s;
}

double fidelity(const DensityMatrix& rho, const TomographyTarget& target) {
  return std::visit([&](const auto& t) { return fidelity(rho, t); }, target);
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("trace distance dimension mismatch");
  ComplexMatrix diff = a - b;
  diff = 0.5 * (diff + diff.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(diff, Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

BootstrapSummary bootstrap_errors(const std::vector<ProjectionCounts>& counts, const TomographySet& set,
                                  int replicas, std::uint64_t seed, const MleOptions& options,
                                  const TomographyTarget& target) {
  if (replicas < 2) throw ConfigurationError("bootstrap needs at least two replicas");
  std::vector<double> fids;
  std::vector<ComplexMatrix> rhos;
  int dropped = 0;
  double best_nll = std::numeric_limits<double>::infinity();
  for (int r = 0; r < replicas; ++r) {
    PhiloxEngine rng(seed, kBootstrapStream, static_cast<std::uint32_t>(r));
    std::vector<ProjectionCounts> resampled = counts;
    for (auto& c : resampled) {
      if (c.observed > 0.0) {
        std::poisson_distribution<long long> poisson(c.observed);
        c.observed = static_cast<double>(poisson(rng));
      } else {
        c.observed = 0.0;
      }
    }
    MleOptions opts = options;
    opts.seed = seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(r + 1));
    try {
      const TomographyResult fit = mle_reconstruct(resampled, set, opts);
      fids.push_back(fidelity(fit.rho_hat, target));
      rhos.push_back(fit.rho_hat.matrix());
    } catch (const NumericalError& e) {
      ++dropped;
      best_nll = std::min(best_nll, e.best_objective());
    }
  }
  if (dropped * 10 > replicas)
    throw NumericalError("more than 10% of bootstrap replicas failed to converge", best_nll);

  const auto d = static_cast<int>(rhos.front().rows());
  Eigen::MatrixXd re_std(d, d);
  Eigen::MatrixXd im_std(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      std::vector<double> re;
      std::vector<double> im;
      for (const auto& m : rhos) {
        re.push_back(m(a, b).real());
        im.push_back(m(a, b).imag());
      }
      re_std(a, b) = sample_std(re);
      im_std(a, b) = sample_std(im);
    }
  return {sample_std(fids), re_std, im_std, static_cast<int>(rhos.size()), dropped, fids};
}

Acquisition acquire_tomography_data(const EncodedState& encoded, const TomographySet& set,
                                    const AcquisitionOptions& options) {
  Acquisition acq{std::vector<ProjectionCounts>(set.members.size()), std::vector<double>(set.members.size()),
                  {}, options.visibility, std::nullopt};
  const VisibilityModel vis(options.visibility);
  for (std::size_t s = 0; s < set.scans.size(); ++s) {
    const auto& scan = set.scans[s];
    ScanConfig cfg{options.delays, options.baseline_counts, options.seed, static_cast<std::uint32_t>(s), vis,
                   options.noiseless};
    ScanTrace trace = sample_scan(encoded, scan.ancilla, cfg);
    const auto estimates = extract_projections(trace, occupied_bins(scan.ancilla));
    for (int idx : scan.members) {
      const auto& member = set.members[idx];
      const auto it = std::find_if(estimates.begin(), estimates.end(),
                                   [&](const ProjectionEstimate& e) { return e.bin_shift == member.bin_shift; });
      if (it == estimates.end()) throw ConfigurationError("scan does not provide projection " + member.label);
      acq.counts[idx] = {it->counts, it->baseline};
      acq.projections[idx] = it->p_hat;
    }
    acq.traces.push_back(std::move(trace));
  }
  if (options.calibrate_visibility) {
    const PhotonState& ref = set.scans.front().ancilla;
    ScanConfig cfg{options.delays, options.baseline_counts, options.seed, kCalibrationScan, vis, options.noiseless};
    ScanTrace trace = sample_scan(ref, ref, cfg);
    acq.visibility = std::clamp(estimate_visibility(trace), 1e-6, 1.0);
    acq.calibration = std::move(trace);
  }
  return acq;
}

}  // namespace tbq
