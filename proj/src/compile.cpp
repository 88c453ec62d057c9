#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

#include <ceres/ceres.h>

#include "solver_logging.hpp"

#include "tbq/errors.hpp"
#include "tbq/optics.hpp"

namespace tbq {

namespace {

// Template slots in optical order around the crystal.
enum Slot : unsigned { kPreQwp = 0, kPreHwp = 1, kPol = 2, kPostHwp = 3, kPostQwp = 4, kSlotCount = 5 };

constexpr int kGridSteps = 8;  // pi/8 seed grid
constexpr int kRefinedSeeds = 5;

struct Layout {
  Pol source;
  unsigned slots;  // bitmask over Slot
  int angle_count() const { return std::popcount(slots); }
  int element_count() const { return angle_count() + 1; }
};

struct Candidate {
  Layout layout;
  std::vector<double> angles;
  double fidelity;
  double angle_sum() const {
    double s = 0.0;
    for (double a : angles) s += a;
    return s;
  }
};

double wrap(double theta) {
  double t = std::fmod(theta, std::numbers::pi);
  if (t < 0.0) t += std::numbers::pi;
  return t;
}

JonesMatrix slot_jones(unsigned slot, double theta) {
  switch (slot) {
    case kPreQwp:
    case kPostQwp: return OpticalElement::quarter_wave(theta).jones();
    case kPreHwp:
    case kPostHwp: return OpticalElement::half_wave(theta).jones();
    default: return OpticalElement::polarizer(theta).jones();
  }
}

// Output of source -> pre plates -> single-bin crystal -> pol -> post plates
// as a 2x2 (polarization x bin) amplitude matrix.
Eigen::Matrix2cd layout_output(const Layout& layout, const double* angles) {
  JonesVector s = layout.source == Pol::H ? polarization::h() : polarization::v();
  int a = 0;
  for (unsigned slot : {kPreQwp, kPreHwp})
    if (layout.slots & (1u << slot)) s = slot_jones(slot, angles[a++]) * s;
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = s(0);
  m(1, 1) = s(1);
  for (unsigned slot : {kPol, kPostHwp, kPostQwp})
    if (layout.slots & (1u << slot)) m = slot_jones(slot, angles[a++]) * m;
  return m;
}

double layout_fidelity(const Layout& layout, const double* angles, const Eigen::Matrix2cd& target) {
  const Eigen::Matrix2cd m = layout_output(layout, angles);
  const double n2 = m.squaredNorm();
  if (n2 < kAnnihilationThreshold) return 0.0;
  return std::norm(target.cwiseProduct(m.conjugate()).sum()) / n2;
}

class Infidelity final : public ceres::FirstOrderFunction {
 public:
  Infidelity(Layout layout, Eigen::Matrix2cd target) : layout_(layout), target_(std::move(target)) {}

  bool Evaluate(const double* x, double* cost, double* gradient) const override {
    const int d = NumParameters();
    cost[0] = 1.0 - layout_fidelity(layout_, x, target_);
    if (gradient) {
      constexpr double h = 1e-6;
      std::vector<double> y(x, x + d);
      for (int i = 0; i < d; ++i) {
        y[i] = x[i] + h;
        const double up = layout_fidelity(layout_, y.data(), target_);
        y[i] = x[i] - h;
        const double down = layout_fidelity(layout_, y.data(), target_);
        y[i] = x[i];
        gradient[i] = -(up - down) / (2.0 * h);
      }
    }
    return true;
  }
  int NumParameters() const override { return layout_.angle_count(); }

 private:
  Layout layout_;
  Eigen::Matrix2cd target_;
};

std::vector<double> refine(const Layout& layout, const Eigen::Matrix2cd& target, std::vector<double> x) {
  detail::quiet_solver_logging();
  ceres::GradientProblem problem(new Infidelity(layout, target));
  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::BFGS;
  options.max_num_iterations = 500;
  options.function_tolerance = 1e-14;
  options.gradient_tolerance = 1e-13;
  options.parameter_tolerance = 1e-14;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(options, problem, x.data(), &summary);
  for (double& a : x) a = wrap(a);
  return x;
}

// Best candidates for one layout: grid seeds, then refinement of the top ones.
std::vector<Candidate> search_layout(const Layout& layout, const Eigen::Matrix2cd& target) {
  const int d = layout.angle_count();
  if (d == 0) return {{layout, {}, layout_fidelity(layout, nullptr, target)}};

  std::vector<Candidate> seeds;
  int total = 1;
  for (int i = 0; i < d; ++i) total *= kGridSteps;
  std::vector<double> angles(d);
  for (int code = 0; code < total; ++code) {
    int c = code;
    for (int i = 0; i < d; ++i) {
      angles[i] = (c % kGridSteps) * std::numbers::pi / kGridSteps;
      c /= kGridSteps;
    }
    seeds.push_back({layout, angles, layout_fidelity(layout, angles.data(), target)});
  }
  // Stable order: higher fidelity first, then smaller angle sum.
  std::stable_sort(seeds.begin(), seeds.end(), [](const Candidate& a, const Candidate& b) {
    if (std::abs(a.fidelity - b.fidelity) > 1e-13) return a.fidelity > b.fidelity;
    return a.angle_sum() < b.angle_sum();
  });

  std::vector<Candidate> out;
  const int starts = std::min<int>(kRefinedSeeds, static_cast<int>(seeds.size()));
  for (int s = 0; s < starts; ++s) {
    if (seeds[s].fidelity >= kExactPlanFidelity) {
      out.push_back(seeds[s]);
      continue;
    }
    auto x = refine(layout, target, seeds[s].angles);
    double f = layout_fidelity(layout, x.data(), target);
    // Snap to the nearest pi/16 multiple when that loses nothing.
    auto snapped = x;
    for (double& t : snapped) t = std::fmod(std::round(t * 16.0 / std::numbers::pi), 16.0) * std::numbers::pi / 16.0;
    const double fs = layout_fidelity(layout, snapped.data(), target);
    if (fs >= std::min(f, kExactPlanFidelity)) {
      x = snapped;
      f = fs;
    }
    out.push_back({layout, x, f});
  }
  return out;
}

// Exact candidates beat inexact ones; then higher fidelity (if inexact),
// fewer elements, smaller angle sum.
bool better(const Candidate& a, const Candidate& b) {
  const bool ea = a.fidelity >= kExactPlanFidelity;
  const bool eb = b.fidelity >= kExactPlanFidelity;
  if (ea != eb) return ea;
  if (!ea && std::abs(a.fidelity - b.fidelity) > 1e-12) return a.fidelity > b.fidelity;
  if (a.layout.element_count() != b.layout.element_count())
    return a.layout.element_count() < b.layout.element_count();
  return a.angle_sum() < b.angle_sum() - 1e-12;
}

OpticalPipeline build_pipeline(const Candidate& c, double spacing) {
  std::vector<OpticalElement> elements;
  int a = 0;
  auto add = [&](unsigned slot) {
    if (!(c.layout.slots & (1u << slot))) return;
    const double theta = c.angles[a++];
    switch (slot) {
      case kPreQwp:
      case kPostQwp: elements.push_back(OpticalElement::quarter_wave(theta)); break;
      case kPreHwp:
      case kPostHwp: elements.push_back(OpticalElement::half_wave(theta)); break;
      default: elements.push_back(OpticalElement::polarizer(theta)); break;
    }
  };
  add(kPreQwp);
  add(kPreHwp);
  elements.push_back(OpticalElement::crystal_for_delay(spacing));
  for (unsigned slot : {kPol, kPostHwp, kPostQwp}) add(slot);
  return OpticalPipeline(std::move(elements));
}

}  // namespace

PreparationPlan compile_preparation(const PhotonState& target_in, const PlateBudget& budget) {
  if (std::abs(target_in.norm_squared() - 1.0) > 1e-10)
    throw ConfigurationError("preparation target must be unit norm");
  const PhotonState target = target_in.logical();
  if (std::abs(target.norm_squared() - 1.0) > 1e-10)
    throw ConfigurationError("preparation target must live on the two-bin logical space");

  Eigen::Matrix2cd t;
  t << target.amplitude(Pol::H, 0), target.amplitude(Pol::H, 1), target.amplitude(Pol::V, 0),
      target.amplitude(Pol::V, 1);

  const std::array<bool, kSlotCount> allowed{budget.pre_qwp, budget.pre_hwp, budget.polarizer,
                                             budget.post_hwp, budget.post_qwp};
  unsigned allowed_mask = 0;
  for (unsigned s = 0; s < kSlotCount; ++s)
    if (allowed[s]) allowed_mask |= 1u << s;

  std::vector<Candidate> best_per_count;
  std::optional<Candidate> best;
  for (int plates = 0; plates <= std::popcount(allowed_mask); ++plates) {
    for (Pol source : {Pol::H, Pol::V}) {
      for (unsigned mask = 0; mask < (1u << kSlotCount); ++mask) {
        if ((mask & ~allowed_mask) || std::popcount(mask) != plates) continue;
        for (const auto& c : search_layout({source, mask}, t))
          if (!best || better(c, *best)) best = c;
      }
    }
    // Layouts are visited by increasing element count; stop at the first
    // count that reaches an exact preparation.
    if (best && best->fidelity >= kExactPlanFidelity) break;
  }

  const double spacing = target.lattice().spacing();
  OpticalPipeline pipeline = build_pipeline(*best, spacing);
  PhotonState input = PhotonState::basis(best->layout.source, 0, target.lattice(), target.packet());
  const PhotonState out = apply_pipeline(pipeline, input);
  const double fidelity = std::clamp(preparation_fidelity(target, out), 0.0, 1.0);
  return {std::move(pipeline), std::move(input), fidelity, out.norm_squared(),
          fidelity >= kExactPlanFidelity};
}

}  // namespace tbq
