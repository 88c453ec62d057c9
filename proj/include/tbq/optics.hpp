#pragma once

// Jones-calculus optical elements acting on polarization (x) time-bin states.
//
// Conventions (angles measured from horizontal, radians, wrapped into [0, pi)):
//   HWP(t) = R(t) diag(1, -1) R(-t)
//   QWP(t) = R(t) diag(1,  i) R(-t)
//   POL(t) = R(t) diag(1,  0) R(-t)
// with R the real rotation matrix. The crystal's slow axis is V: H amplitudes
// stay in their bin, V amplitudes move later by delay / spacing bins.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tbq/hilbert.hpp"

namespace tbq {

enum class ElementKind { HWP, QWP, POL, CRYSTAL };

std::string to_string(ElementKind kind);

class OpticalElement {
 public:
  static constexpr double kDefaultCrystalLength = 4e-3;

  static OpticalElement half_wave(double theta);
  static OpticalElement quarter_wave(double theta);
  static OpticalElement polarizer(double theta);
  /// Birefringent crystal of length `length` (m) and group index difference `dn`.
  static OpticalElement crystal(double length, double dn);
  /// Crystal of the given length whose walk-off L * dn / c equals `delay`.
  static OpticalElement crystal_for_delay(double delay, double length = kDefaultCrystalLength);

  ElementKind kind() const noexcept { return kind_; }
  double theta() const noexcept { return theta_; }
  double length() const noexcept { return length_; }
  double index_difference() const noexcept { return dn_; }
  /// Walk-off L * dn / c between H and V, in seconds.
  double delay() const noexcept;
  bool is_plate() const noexcept { return kind_ != ElementKind::CRYSTAL; }

  /// Jones matrix of a plate or polarizer; throws for a crystal.
  JonesMatrix jones() const;

 private:
  OpticalElement(ElementKind kind, double theta, double length, double dn)
      : kind_(kind), theta_(theta), length_(length), dn_(dn) {}

  ElementKind kind_;
  double theta_;
  double length_;
  double dn_;
};

JonesMatrix rotation(double theta);

/// Number of bins a crystal shifts V amplitudes on the given lattice. Throws
/// ConfigurationError unless the walk-off is a positive integer multiple of
/// the bin spacing (1e-6 relative).
int crystal_shift(const OpticalElement& crystal, const TimeBinLattice& lattice);

class OpticalPipeline {
 public:
  OpticalPipeline() = default;
  explicit OpticalPipeline(std::vector<OpticalElement> elements);
  /// Also validates every crystal against `lattice`.
  OpticalPipeline(std::vector<OpticalElement> elements, const TimeBinLattice& lattice);

  const std::vector<OpticalElement>& elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }
  bool empty() const noexcept { return elements_.empty(); }

  void check_compatible(const TimeBinLattice& lattice) const;

 private:
  std::vector<OpticalElement> elements_;
};

/// Applies one element. Plates act identically on every bin; a crystal grows
/// the lattice by its shift so no amplitude is lost.
PhotonState element_action(const OpticalElement& element, const PhotonState& state);

/// Left-to-right composition. The squared norm of the result is the
/// cumulative success probability. Throws AnnihilatedStateError if nothing
/// survives.
PhotonState apply_pipeline(const OpticalPipeline& pipeline, const PhotonState& state);

/// The crystal restricted to the two-bin logical space, basis order
/// h0, h tau, v0, v tau. |v, tau> leaves the space and maps to zero.
Eigen::Matrix4cd gate_matrix();

/// Matrix of a single-bin-shift crystal on the two-bin lattice followed by
/// projection back onto it, computed by acting on basis states.
Eigen::Matrix4cd projected_crystal_matrix(const TimeBinLattice& lattice, const Wavepacket& packet);

/// Which optional elements the preparation compiler may place around the
/// crystal: QWP, HWP -> CRYSTAL -> POL -> HWP, QWP.
struct PlateBudget {
  bool pre_qwp = true;
  bool pre_hwp = true;
  bool polarizer = true;
  bool post_hwp = true;
  bool post_qwp = true;
};

struct PreparationPlan {
  OpticalPipeline pipeline;
  PhotonState input_state;  // |h,0> or |v,0>
  double predicted_fidelity;
  double success_probability;
  bool exactly_encodable;
};

/// Fidelities at or above this count as an exact preparation.
inline constexpr double kExactPlanFidelity = 1.0 - 1e-10;

/// Finds wave-plate and polarizer settings around one crystal that turn a
/// single-bin source photon into `target` (unit norm on the two-bin logical
/// space). Candidate layouts are tried in order of element count; each
/// layout is seeded from every pi/8 angle grid point and the best five seeds
/// are refined numerically. Ties go to fewer elements, then to the smaller
/// sum of angles.
PreparationPlan compile_preparation(const PhotonState& target, const PlateBudget& budget = {});

/// |<target|out>|^2 / <out|out> using the logical projection of `out`.
double preparation_fidelity(const PhotonState& target, const PhotonState& out);

}  // namespace tbq
