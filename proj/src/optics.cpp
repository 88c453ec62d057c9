#include "tbq/optics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "tbq/errors.hpp"

namespace tbq {

namespace {

double wrap_angle(double theta) {
  if (!std::isfinite(theta)) throw ConfigurationError("element angle must be finite");
  double t = std::fmod(theta, std::numbers::pi);
  if (t < 0.0) t += std::numbers::pi;
  if (t >= std::numbers::pi) t = 0.0;
  return t;
}

JonesMatrix rotated(double theta, const JonesMatrix& diag) {
  return rotation(theta) * diag * rotation(-theta);
}

}  // namespace

std::string to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::HWP: return "HWP";
    case ElementKind::QWP: return "QWP";
    case ElementKind::POL: return "POL";
    case ElementKind::CRYSTAL: return "CRYSTAL";
  }
  return "?";
}

OpticalElement OpticalElement::half_wave(double theta) {
  return {ElementKind::HWP, wrap_angle(theta), 0.0, 0.0};
}

OpticalElement OpticalElement::quarter_wave(double theta) {
  return {ElementKind::QWP, wrap_angle(theta), 0.0, 0.0};
}

OpticalElement OpticalElement::polarizer(double theta) {
  return {ElementKind::POL, wrap_angle(theta), 0.0, 0.0};
}

OpticalElement OpticalElement::crystal(double length, double dn) {
  if (!(length > 0.0) || !(dn > 0.0) || !std::isfinite(length) || !std::isfinite(dn))
    throw ConfigurationError("crystal length and index difference must be positive");
  return {ElementKind::CRYSTAL, 0.0, length, dn};
}

OpticalElement OpticalElement::crystal_for_delay(double delay, double length) {
  if (!(delay > 0.0)) throw ConfigurationError("crystal delay must be positive");
  return crystal(length, delay * kSpeedOfLight / length);
}

double OpticalElement::delay() const noexcept { return length_ * dn_ / kSpeedOfLight; }

JonesMatrix OpticalElement::jones() const {
  const Complex i{0.0, 1.0};
  switch (kind_) {
    case ElementKind::HWP: return rotated(theta_, Eigen::Vector2cd(1.0, -1.0).asDiagonal());
    case ElementKind::QWP: return rotated(theta_, Eigen::Vector2cd(1.0, i).asDiagonal());
    case ElementKind::POL: return rotated(theta_, Eigen::Vector2cd(1.0, 0.0).asDiagonal());
    case ElementKind::CRYSTAL: break;
  }
  throw ConfigurationError("a crystal has no Jones matrix");
}

JonesMatrix rotation(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  JonesMatrix r;
  r << c, -s, s, c;
  return r;
}

int crystal_shift(const OpticalElement& crystal, const TimeBinLattice& lattice) {
  const double ratio = crystal.delay() / lattice.spacing();
  const double shift = std::round(ratio);
  if (shift < 1.0 || std::abs(ratio - shift) > 1e-6 * ratio) {
    std::ostringstream msg;
    msg << "crystal walk-off " << crystal.delay() << " s is not a positive integer multiple of the bin spacing "
        << lattice.spacing() << " s";
    throw ConfigurationError(msg.str());
  }
  return static_cast<int>(shift);
}

OpticalPipeline::OpticalPipeline(std::vector<OpticalElement> elements)
    : elements_(std::move(elements)) {}

OpticalPipeline::OpticalPipeline(std::vector<OpticalElement> elements, const TimeBinLattice& lattice)
    : elements_(std::move(elements)) {
  check_compatible(lattice);
}

void OpticalPipeline::check_compatible(const TimeBinLattice& lattice) const {
  for (const auto& e : elements_)
    if (e.kind() == ElementKind::CRYSTAL) crystal_shift(e, lattice);
}

PhotonState element_action(const OpticalElement& element, const PhotonState& state) {
  const int n = state.bins();
  const ComplexVector& a = state.amplitudes();
  if (element.kind() == ElementKind::CRYSTAL) {
    const int shift = crystal_shift(element, state.lattice());
    const int grown = n + shift;
    ComplexVector out = ComplexVector::Zero(2 * grown);
    for (int k = 0; k < n; ++k) {
      out(PhotonState::index(Pol::H, k, grown)) = a(PhotonState::index(Pol::H, k, n));
      out(PhotonState::index(Pol::V, k + shift, grown)) = a(PhotonState::index(Pol::V, k, n));
    }
    return {std::move(out), state.lattice().with_bins(grown), state.packet()};
  }
  const JonesMatrix j = element.jones();
  ComplexVector out(a.size());
  for (int k = 0; k < n; ++k) {
    const JonesVector in{a(k), a(n + k)};
    const JonesVector res = j * in;
    out(k) = res(0);
    out(n + k) = res(1);
  }
  return {std::move(out), state.lattice(), state.packet()};
}

PhotonState apply_pipeline(const OpticalPipeline& pipeline, const PhotonState& state) {
  pipeline.check_compatible(state.lattice());
  PhotonState current = state;
  for (const auto& e : pipeline.elements()) {
    current = element_action(e, current);
    if (current.norm_squared() < kAnnihilationThreshold) throw AnnihilatedStateError();
  }
  return current;
}

Eigen::Matrix4cd gate_matrix() {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  u(0, 0) = 1.0;
  u(1, 1) = 1.0;
  u(3, 2) = 1.0;
  return u;
}

Eigen::Matrix4cd projected_crystal_matrix(const TimeBinLattice& lattice, const Wavepacket& packet) {
  const TimeBinLattice logical = lattice.with_bins(2);
  const auto crystal = OpticalElement::crystal_for_delay(logical.spacing());
  Eigen::Matrix4cd u;
  for (int col = 0; col < 4; ++col) {
    ComplexVector e = ComplexVector::Zero(4);
    e(col) = 1.0;
    const PhotonState out = element_action(crystal, PhotonState(e, logical, packet)).logical();
    u.col(col) = out.amplitudes();
  }
  return u;
}

double preparation_fidelity(const PhotonState& target, const PhotonState& out) {
  const double n2 = out.norm_squared();
  if (n2 < kAnnihilationThreshold) return 0.0;
  const PhotonState projected = out.resized(target.bins());
  return std::norm(inner_product(target, projected)) / n2;
}

}  // namespace tbq
