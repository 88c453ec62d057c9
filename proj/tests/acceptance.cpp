// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "tbq/cli.hpp"
#include "tbq/experiment.hpp"
#include "tbq/hom.hpp"
#include "tbq/optics.hpp"
#include "tbq/tomography.hpp"

#ifndef TBQ_PROPERTY_SUITE
#error "TBQ_PROPERTY_SUITE must name the property-test executable"
#endif

using namespace tbq;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const cli::ExperimentConfig kDefaults{};
constexpr double kTau = kDefaultBinSpacing;

PhotonState named(const std::string& name) { return *cli::named_state(name, kDefaults.lattice(), kDefaults.packet()); }

PhotonState prepared(const PhotonState& target) {
  const auto plan = compile_preparation(target);
  return normalize(apply_pipeline(plan.pipeline, plan.input_state)).state;
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

const TomographySet& tomo_set() {
  static const TomographySet set = default_tomography_set(kDefaults.lattice(), kDefaults.packet());
  return set;
}

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome encoding() {
  const auto h0 = PhotonState::basis(Pol::H, 0, kDefaults.lattice(), kDefaults.packet());
  const OpticalPipeline pipeline({OpticalElement::half_wave(std::numbers::pi / 8),
                                  OpticalElement::crystal_for_delay(kTau)});
  const auto phi = named("phi_plus");
  double f = 0.0;
  const int reps = 1000;
  const auto t0 = Clock::now();
  for (int i = 0; i < reps; ++i) {
    const auto out = apply_pipeline(pipeline, h0);
    f = std::norm(phi.amplitudes().dot(out.logical().amplitudes()));
  }
  const double per_call = seconds_since(t0) / reps;
  std::ostringstream d;
  d << "1 - F = " << 1.0 - f << ", " << per_call * 1e6 << " us per call";
  return {f >= 1.0 - 1e-12 && per_call < 1e-3, d.str()};
}

Outcome gate() {
  const Eigen::Matrix4cd u = gate_matrix();
  const double phys = (u - projected_crystal_matrix(kDefaults.lattice(), kDefaults.packet())).cwiseAbs().maxCoeff();
  Eigen::Matrix4cd d = Eigen::Matrix4cd::Identity();
  d(3, 3) = 0.0;
  const double unit = (u.adjoint() * u - d).cwiseAbs().maxCoeff();
  Eigen::Matrix4cd cnot = Eigen::Matrix4cd::Zero();
  cnot(0, 0) = cnot(1, 1) = cnot(3, 2) = cnot(2, 3) = 1.0;
  const double c = (u.leftCols(3) - cnot.leftCols(3)).cwiseAbs().maxCoeff();
  std::ostringstream s;
  s << "|U - projected crystal| = " << phys << ", |U^H U - diag(1,1,1,0)| = " << unit << ", CNOT columns diff = " << c;
  return {phys <= 1e-12 && unit <= 1e-12 && c == 0.0, s.str()};
}

Outcome oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> bins(2, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_state = [&] {
    const int n = bins(rng);
    ComplexVector a(2 * n);
    for (int k = 0; k < a.size(); ++k) a(k) = Complex(normal(rng), normal(rng));
    return PhotonState(a.normalized(), TimeBinLattice(n, kTau), kDefaults.packet());
  };
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto e = random_state();
    const auto a = random_state();
    const double delay = (2.0 * u(rng) - 1.0) * 4.0 * kTau;
    worst = std::max(worst, std::abs(fock_oracle_ratio(e, a, delay) - coincidence_ratio(e, a, delay).ratio));
  }
  const double t = seconds_since(t0);
  std::ostringstream d;
  d << "max |dR| = " << worst << " over 200 triples in " << t << " s";
  return {worst <= 1e-9 && t < 10.0, d.str()};
}

Outcome dip_structure() {
  const auto grid = kDefaults.delays();
  auto trace = [&](const std::string& enc, const std::string& anc) {
    const ScanConfig cfg{grid, 1000.0, 0, 0, VisibilityModel(1.0), true};
    return sample_scan(prepared(named(enc)), named(anc), cfg);
  };
  auto at = [](const ScanTrace& t, double d) { return t.points[grid_index(t, d)].ratio_hat; };
  const auto a = trace("phi_plus", "phi_plus");
  const auto b = trace("phi_plus", "phi_minus");
  const auto c = trace("p_plus", "p_plus");
  const auto d = trace("p_plus", "p_minus");
  double b_min = 1.0;
  for (const auto& p : b.points) b_min = std::min(b_min, p.ratio_hat);
  const bool ok_a = std::abs(at(a, 0.0)) <= 1e-12 && at(a, kTau) >= 1 - 1e-6 && at(a, -kTau) >= 1 - 1e-6;
  const bool ok_b = b_min >= 1 - 1e-6;
  bool ok_cd = true;
  for (const auto* t : {&c, &d})
    for (double lag : {-kTau, kTau}) ok_cd = ok_cd && std::abs(at(*t, lag) - 0.75) <= 1e-6;
  std::ostringstream s;
  s << "(a) R(0)=" << at(a, 0.0) << " R(+-tau)=" << at(a, -kTau) << "," << at(a, kTau) << "; (b) min R=" << b_min
    << "; (c) R(+-tau)=" << at(c, -kTau) << "," << at(c, kTau) << "; (d) R(+-tau)=" << at(d, -kTau) << ","
    << at(d, kTau);
  return {ok_a && ok_b && ok_cd, s.str()};
}

Outcome visibility_recovery() {
  const auto phi = named("phi_plus");
  const auto enc = prepared(phi);
  std::ostringstream s;
  bool ok = true;
  for (double v : {0.94, 0.89}) {
    int within = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const ScanConfig cfg{kDefaults.delays(), 1e4, seed, 0, VisibilityModel(v), false};
      within += std::abs(estimate_visibility(sample_scan(enc, phi, cfg)) - v) <= 0.02;
    }
    ok = ok && within >= 190;
    s << "V=" << v << ": " << within << "/200 within 0.02; ";
  }
  return {ok, s.str()};
}

Outcome noiseless_round_trip() {
  std::vector<std::pair<EncodedState, TomographyTarget>> cases;
  for (const char* name : {"phi_plus", "p_plus", "eq6_state3"}) cases.emplace_back(prepared(named(name)), named(name));
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 100; ++i) {
    ComplexMatrix g(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) g(r, c) = Complex(normal(rng), normal(rng));
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    const DensityMatrix dm(rho, kDefaults.lattice(), kDefaults.packet());
    cases.emplace_back(dm, dm);
  }
  double worst_f = 1.0;
  double worst_td = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const AcquisitionOptions opts{kDefaults.delays(), 1000.0, 0.94, i, true, true};
    const auto acq = acquire_tomography_data(cases[i].first, tomo_set(), opts);
    MleOptions mle;
    mle.visibility = acq.visibility;
    const auto fit = mle_reconstruct(acq.counts, tomo_set(), mle);
    std::vector<double> p;
    for (const auto& c : acq.counts) p.push_back((1.0 - c.observed / c.baseline) / acq.visibility);
    const auto li = linear_inversion(p, tomo_set());
    worst_f = std::min(worst_f, fidelity(fit.rho_hat, cases[i].second));
    worst_td = std::max(worst_td, trace_distance(fit.rho_hat.matrix(), li.rho));
  }
  std::ostringstream s;
  s << "min fidelity " << worst_f << ", max MLE-LI trace distance " << worst_td << " over " << cases.size() << " states";
  return {worst_f >= 0.999 && worst_td <= 1e-6, s.str()};
}

Outcome nominal_regime() {
  const auto t0 = Clock::now();
  std::ostringstream s;
  bool ok = true;
  for (const char* name : {"phi_plus", "p_plus", "eq6_state3"}) {
    const auto target = named(name);
    const auto enc = prepared(target);
    std::vector<double> fids;
    std::vector<double> stds;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const AcquisitionOptions opts{kDefaults.delays(), 1000.0, 0.94, seed, false, true};
      const auto acq = acquire_tomography_data(enc, tomo_set(), opts);
      MleOptions mle;
      mle.visibility = acq.visibility;
      mle.seed = seed;
      fids.push_back(fidelity(mle_reconstruct(acq.counts, tomo_set(), mle).rho_hat, target));
      stds.push_back(bootstrap_errors(acq.counts, tomo_set(), 100, seed, mle, target).fidelity_std);
    }
    const double mf = median(fids);
    const double ms = median(stds);
    const bool this_ok = mf >= 0.95 && ms >= 0.003 && ms <= 0.03;
    ok = ok && this_ok;
    s << name << ": median F=" << mf << " median std=" << ms << (this_ok ? "" : " (out of range)") << "; ";
  }
  const double t = seconds_since(t0);
  s << t << " s";
  return {ok && t < 300.0, s.str()};
}

Outcome invariant_suite() {
  const int rc = std::system(TBQ_PROPERTY_SUITE " --minimal");
  return {rc == 0, std::string("property suite ") + TBQ_PROPERTY_SUITE + " exit status " + std::to_string(rc)};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "tbq_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path cfg = root / "config.json";
  std::ofstream(cfg) << R"({"encoded": "eq6_state3", "ancilla": "phi_plus", "visibility": 0.94, "replicas": 20})";
  bool ok = true;
  int compared = 0;
  for (const std::string cmd : {"scan", "tomography"}) {
    for (const char* run : {"a", "b"}) {
      std::vector<std::string> args{"tbq", cmd, "--config", cfg.string(), "--seed", "77", "--out",
                                    (root / (cmd + run)).string()};
      std::vector<char*> argv;
      for (auto& a : args) argv.push_back(a.data());
      std::ostringstream out;
      std::ostringstream err;
      ok = ok && cli::run(static_cast<int>(argv.size()), argv.data(), out, err) == 0;
    }
    for (const auto& entry : fs::directory_iterator(root / (cmd + "a"))) {
      ok = ok && slurp(entry.path()) == slurp(root / (cmd + "b") / entry.path().filename());
      ++compared;
    }
  }
  fs::remove_all(root);
  return {ok && compared >= 7, std::to_string(compared) + " output files compared byte for byte"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"encoding HWP(pi/8) + crystal yields phi+", encoding},
      {"gate matrix vs physical crystal, CNOT columns", gate},
      {"HOM projection vs Fock-space oracle", oracle},
      {"dip structure of the four reference scans", dip_structure},
      {"visibility recovery at N0 = 1e4", visibility_recovery},
      {"noiseless tomography round trip", noiseless_round_trip},
      {"tomography at N0 = 1000, V = 0.94", nominal_regime},
      {"invariant property suite", invariant_suite},
      {"byte-identical scan and tomography outputs", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << "  ["
              << o.detail << "]" << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
