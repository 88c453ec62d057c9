#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <ceres/ceres.h>

#include "solver_logging.hpp"

#include "tbq/errors.hpp"
#include "tbq/philox.hpp"
#include "tbq/tomography.hpp"

namespace tbq {

namespace {

constexpr int kDim = 4;
constexpr int kParams = kDim * kDim;
constexpr double kMinRate = 1e-300;

// Parameter layout: the four real diagonal entries of T, then the real and
// imaginary parts of the strictly lower entries in row-major order.
Eigen::Matrix4cd unpack(const double* x) {
  Eigen::Matrix4cd t = Eigen::Matrix4cd::Zero();
  int k = kDim;
  for (int i = 0; i < kDim; ++i) {
    t(i, i) = x[i];
    for (int j = 0; j < i; ++j, k += 2) t(i, j) = Complex(x[k], x[k + 1]);
  }
  return t;
}

std::vector<double> pack(const Eigen::Matrix4cd& t) {
  std::vector<double> x(kParams);
  int k = kDim;
  for (int i = 0; i < kDim; ++i) {
    x[i] = t(i, i).real();
    for (int j = 0; j < i; ++j, k += 2) {
      x[k] = t(i, j).real();
      x[k + 1] = t(i, j).imag();
    }
  }
  return x;
}

Eigen::Matrix4cd density_from(const Eigen::Matrix4cd& t) {
  const Eigen::Matrix4cd a = t.adjoint() * t;
  return a / a.trace().real();
}

// Lower-triangular T with T^dagger T = rho, via Cholesky of the
// index-reversed matrix. Eigenvalues are floored to keep rho definite.
Eigen::Matrix4cd triangular_factor(const ComplexMatrix& rho_in) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> eig{Eigen::Matrix4cd(rho_in)};
  Eigen::Vector4d w = eig.eigenvalues().cwiseMax(1e-9);
  w /= w.sum();
  const Eigen::Matrix4cd rho = eig.eigenvectors() * w.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
  Eigen::Matrix4cd reversed = rho.reverse();
  Eigen::LLT<Eigen::Matrix4cd> llt(reversed);
  const Eigen::Matrix4cd l = llt.matrixL();
  const Eigen::Matrix4cd upper = l.reverse();
  return upper.adjoint();
}

class PoissonDeviance final : public ceres::FirstOrderFunction {
 public:
  PoissonDeviance(const std::vector<ProjectionCounts>& counts, const std::vector<Eigen::Vector4cd>& projectors,
                  double visibility)
      : counts_(counts), projectors_(projectors), visibility_(visibility) {}

  bool Evaluate(const double* x, double* cost, double* gradient) const override {
    const Eigen::Matrix4cd t = unpack(x);
    const double a = t.squaredNorm();
    if (!(a > 0.0) || !std::isfinite(a)) return false;
    double f = (a - 1.0) * (a - 1.0);
    Eigen::Matrix4cd g = 4.0 * (a - 1.0) * t;
    for (std::size_t i = 0; i < projectors_.size(); ++i) {
      const Eigen::Vector4cd z = t * projectors_[i];
      const double p = z.squaredNorm() / a;
      const double q = std::max(1.0 - visibility_ * p, kMinRate);
      const double n = counts_[i].observed;
      const double big_n = counts_[i].baseline;
      const double mu = big_n * q;
      f += n > 0.0 ? mu - n + n * std::log(n / mu) : mu;
      // d/dp of the deviance term, chained through p = |T psi|^2 / Tr(T^dagger T).
      const double dp = -visibility_ * (big_n - n / q);
      if (gradient) g += dp * (2.0 * z * projectors_[i].adjoint() - 2.0 * p * t) / a;
    }
    cost[0] = f;
    if (gradient) {
      int k = kDim;
      for (int i = 0; i < kDim; ++i) {
        gradient[i] = g(i, i).real();
        for (int j = 0; j < i; ++j, k += 2) {
          gradient[k] = g(i, j).real();
          gradient[k + 1] = g(i, j).imag();
        }
      }
    }
    return std::isfinite(f);
  }
  int NumParameters() const override { return kParams; }

 private:
  const std::vector<ProjectionCounts>& counts_;
  const std::vector<Eigen::Vector4cd>& projectors_;
  double visibility_;
};

struct Fit {
  Eigen::Matrix4cd rho;
  double nll;
  int iterations;
  bool converged;
};

}  // namespace

TomographyResult mle_reconstruct(const std::vector<ProjectionCounts>& counts, const TomographySet& set,
                                 const MleOptions& options) {
  if (counts.size() != set.members.size()) throw DimensionError("one count pair per tomography member expected");
  for (const auto& c : counts)
    if (!(c.baseline > 0.0) || c.observed < 0.0) throw ConfigurationError("counts need N_i > 0 and n_i >= 0");
  if (options.restarts < 3) throw ConfigurationError("at least three MLE restarts are required");
  const double vis = options.visibility;
  if (!(vis > 0.0 && vis <= 1.0)) throw ConfigurationError("MLE visibility must lie in (0, 1]");

  std::vector<Eigen::Vector4cd> projectors;
  for (const auto& m : set.members) projectors.push_back(m.state.logical().amplitudes());

  std::vector<std::vector<double>> starts;
  starts.push_back(pack(Eigen::Matrix4cd::Identity() * 0.5));
  {
    std::vector<double> p;
    for (const auto& c : counts) p.push_back(std::clamp((1.0 - c.observed / c.baseline) / vis, 0.0, 1.0));
    starts.push_back(pack(triangular_factor(linear_inversion(p, set).rho)));
  }
  for (int r = 2; r < options.restarts; ++r) {
    PhiloxEngine rng(options.seed, 0x3A1Eu, static_cast<std::uint32_t>(r));
    std::normal_distribution<double> normal;
    std::vector<double> x(kParams);
    for (double& v : x) v = normal(rng);
    starts.push_back(std::move(x));
  }

  detail::quiet_solver_logging();
  ceres::GradientProblem problem(new PoissonDeviance(counts, projectors, vis));
  ceres::GradientProblemSolver::Options solver;
  solver.line_search_direction_type = ceres::BFGS;
  solver.max_num_iterations = options.max_iterations;
  solver.function_tolerance = options.function_tolerance;
  solver.gradient_tolerance = 1e-12;
  solver.parameter_tolerance = 1e-14;

  std::optional<Fit> best;
  double best_any = std::numeric_limits<double>::infinity();
  for (auto& x : starts) {
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(solver, problem, x.data(), &summary);
    const Eigen::Matrix4cd rho = density_from(unpack(x.data()));
    const double nll = poisson_nll(rho, counts, set, vis);
    best_any = std::min(best_any, nll);
    const bool converged = summary.termination_type == ceres::CONVERGENCE;
    if (!converged || !std::isfinite(nll)) continue;
    if (!best || nll < best->nll) best = Fit{rho, nll, static_cast<int>(summary.iterations.size()), true};
  }
  if (!best) throw NumericalError("maximum-likelihood fit did not converge", best_any);

  const TimeBinLattice lattice = set.members.front().state.lattice().with_bins(2);
  const Wavepacket packet = set.members.front().state.packet();
  TomographyResult result{DensityMatrix(best->rho, lattice, packet), std::nullopt, 0.0, 0.0, 0, 0, 0, {}, {}};
  result.nll = best->nll;
  result.iterations = best->iterations;
  return result;
}

double poisson_nll(const ComplexMatrix& rho, const std::vector<ProjectionCounts>& counts,
                   const TomographySet& set, double visibility) {
  double nll = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const ComplexVector psi = set.members[i].state.logical().amplitudes();
    const double p = psi.dot(rho * psi).real();
    const double mu = counts[i].baseline * std::max(1.0 - visibility * p, kMinRate);
    nll += mu - (counts[i].observed > 0.0 ? counts[i].observed * std::log(mu) : 0.0);
  }
  return nll;
}

}  // namespace tbq
