#include "tbq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <type_traits>
#include <random>
#include <sstream>

#include "tbq/errors.hpp"
#include "tbq/philox.hpp"

namespace tbq {

namespace {

double grid_match_tolerance(double spacing) { return 1e-9 * spacing; }

bool has_point(const std::vector<double>& grid, double value, double tol) {
  return std::any_of(grid.begin(), grid.end(), [&](double d) { return std::abs(d - value) <= tol; });
}

// Bins up to the last one carrying population; grown but empty bins do not
// add dip lags.
int populated_bins(const Eigen::VectorXd& weights, int bins) {
  int last = 1;
  for (int k = 0; k < bins; ++k)
    if (weights(k) + weights(bins + k) > 1e-24) last = std::max(last, k);
  return last + 1;
}

int lag_bins_of(const EncodedState& encoded, const PhotonState& ancilla) {
  const int enc_bins = std::visit(
      [](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, PhotonState>)
          return populated_bins(e.amplitudes().cwiseAbs2(), e.bins());
        else
          return populated_bins(e.matrix().diagonal().real(), e.lattice().bins());
      },
      encoded);
  return std::max(enc_bins,
                  populated_bins(ancilla.amplitudes().cwiseAbs2(), ancilla.bins()));
}

}  // namespace

std::vector<double> make_delay_grid(double half_width, double step, const std::vector<double>& required) {
  if (!(step > 0.0) || !(half_width > 0.0)) throw ConfigurationError("grid step and width must be positive");
  const auto n = static_cast<long>(std::floor(half_width / step + 1e-9));
  std::vector<double> grid;
  for (long k = -n; k <= n; ++k) {
    const double d = k * step;
    const bool shadowed =
        std::any_of(required.begin(), required.end(), [&](double r) { return std::abs(d - r) < 0.5 * step; });
    if (!shadowed) grid.push_back(d);
  }
  for (double r : required)
    if (!has_point(grid, r, 0.0)) grid.push_back(r);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

void validate_scan_config(const ScanConfig& cfg, int lag_bins, double spacing, double sigma_t) {
  if (!(cfg.baseline_counts > 0.0)) throw ConfigurationError("baseline counts must be positive");
  const auto& g = cfg.delays;
  if (g.empty()) throw ConfigurationError("delay grid is empty");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw ConfigurationError("delay grid must be strictly increasing");
  const double tol = grid_match_tolerance(spacing);
  for (double lag : {0.0, spacing, -spacing})
    if (!has_point(g, lag, tol)) throw ConfigurationError("delay grid must contain 0 and +-tau exactly");
  const double reach = lag_bins * spacing + kBaselineExclusionSigmas * sigma_t;
  if (g.front() > -reach || g.back() < reach) {
    std::ostringstream msg;
    msg << "delay grid must extend to +-" << reach << " s to include baseline shoulders";
    throw ConfigurationError(msg.str());
  }
}

ScanTrace sample_scan(const EncodedState& encoded, const PhotonState& ancilla, const ScanConfig& cfg) {
  const int lag_bins = lag_bins_of(encoded, ancilla);
  const double spacing = ancilla.lattice().spacing();
  const double sigma = ancilla.packet().sigma_t();
  validate_scan_config(cfg, lag_bins, spacing, sigma);

  const auto expected = scan_trace(encoded, ancilla, cfg.delays, cfg.visibility);
  ScanTrace trace{{}, cfg, ancilla, lag_bins, spacing, sigma, 0.0};
  trace.points.reserve(expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double mean = cfg.baseline_counts * expected[i].ratio;
    double counts = mean;
    if (!cfg.noiseless) {
      counts = 0.0;
      if (mean > 0.0) {
        PhiloxEngine rng(cfg.seed, cfg.scan_id, static_cast<std::uint32_t>(i));
        std::poisson_distribution<long long> poisson(mean);
        counts = static_cast<double>(poisson(rng));
      }
    }
    trace.points.push_back({expected[i].delay, counts, 0.0});
  }
  trace.baseline = estimate_baseline(trace);
  for (auto& p : trace.points) p.ratio_hat = p.counts / trace.baseline;
  return trace;
}

double estimate_baseline(const ScanTrace& trace) {
  const auto lags = dip_lags(trace.lag_bins, trace.spacing);
  const double exclusion = kBaselineExclusionSigmas * trace.sigma_t;
  double sum = 0.0;
  int n = 0;
  for (const auto& p : trace.points) {
    double nearest = std::numeric_limits<double>::infinity();
    for (double lag : lags) nearest = std::min(nearest, std::abs(p.delay - lag));
    if (nearest > exclusion) {
      sum += p.counts;
      ++n;
    }
  }
  if (n == 0) throw ConfigurationError("no baseline points");
  if (!(sum > 0.0)) throw ConfigurationError("baseline counts are zero");
  return sum / n;
}

std::size_t grid_index(const ScanTrace& trace, double delay) {
  const double tol = grid_match_tolerance(trace.spacing);
  for (std::size_t i = 0; i < trace.points.size(); ++i)
    if (std::abs(trace.points[i].delay - delay) <= tol) return i;
  std::ostringstream msg;
  msg << "requested lag " << delay << " s is not on the delay grid";
  throw ConfigurationError(msg.str());
}

std::set<int> occupied_bins(const PhotonState& state, double tolerance) {
  std::set<int> bins;
  for (int k = 0; k < state.bins(); ++k)
    if (std::norm(state.amplitude(Pol::H, k)) + std::norm(state.amplitude(Pol::V, k)) > tolerance * tolerance)
      bins.insert(k);
  return bins;
}

std::vector<ProjectionEstimate> extract_projections(const ScanTrace& trace, const std::set<int>& ancilla_bins) {
  const PhotonState logical = trace.ancilla.logical();
  auto read = [&](const PhotonState& projector, int shift) {
    const double delay = shift * trace.spacing;
    const auto& pt = trace.points[grid_index(trace, delay)];
    return ProjectionEstimate{projector, shift, delay, pt.counts, trace.baseline,
                              std::clamp(1.0 - pt.ratio_hat, 0.0, 1.0)};
  };

  std::vector<ProjectionEstimate> out{read(logical, 0)};
  if (ancilla_bins.size() == 1) {
    const int bin = *ancilla_bins.begin();
    // Positive delay moves the ancilla one bin later.
    int shift = 0;
    if (bin + 1 <= 1)
      shift = 1;
    else if (bin - 1 >= 0 && bin - 1 <= 1)
      shift = -1;
    if (shift != 0) {
      ComplexVector amps = ComplexVector::Zero(4);
      amps(PhotonState::index(Pol::H, bin + shift, 2)) = trace.ancilla.amplitude(Pol::H, bin);
      amps(PhotonState::index(Pol::V, bin + shift, 2)) = trace.ancilla.amplitude(Pol::V, bin);
      out.push_back(read(PhotonState(amps, logical.lattice(), logical.packet()), shift));
    }
  }
  return out;
}

double estimate_visibility(const ScanTrace& trace) {
  return 1.0 - trace.points[grid_index(trace, 0.0)].counts / trace.baseline;
}

}  // namespace tbq
