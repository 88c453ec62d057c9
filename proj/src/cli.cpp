#include "tbq/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "tbq/errors.hpp"
#include "tbq/experiment.hpp"
#include "tbq/optics.hpp"
#include "tbq/philox.hpp"
#include "tbq/tomography.hpp"

namespace tbq::cli {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kConfigKeys{
    "encoded",  "ancilla",        "tau_s",          "bins",      "sigma_t_s",      "bandwidth_nm",
    "wavelength_nm", "visibility", "grid",          "delays_s",  "baseline_counts", "seed",
    "replicas", "oracle_samples", "noiseless",      "calibrate_visibility", "timestamp"};

void write_json(const fs::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw ConfigurationError("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigurationError("cannot write " + path.string());
  return os;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void stamp(Json& j, const ExperimentConfig& cfg) {
  if (cfg.timestamp) j["generated_at"] = utc_timestamp();
}

// The encoded photon as it leaves its compiled preparation pipeline, or the
// given density matrix.
struct PreparedEncoded {
  EncodedState state;
  TomographyTarget target;
  std::optional<PreparationPlan> plan;
};

PreparedEncoded prepare_encoded(const ExperimentConfig& cfg, std::ostream& log) {
  const auto lattice = cfg.lattice();
  const auto packet = cfg.packet();
  if (cfg.encoded.is_object() && cfg.encoded.contains("rho")) {
    DensityMatrix rho(matrix_from_json(cfg.encoded.at("rho")), lattice.with_bins(2), packet);
    return {rho, rho, std::nullopt};
  }
  const PhotonState target = resolve_state(cfg.encoded, lattice, packet);
  PreparationPlan plan = compile_preparation(target);
  if (!plan.exactly_encodable)
    log << "warning: encoded target is not exactly encodable (fidelity " << plan.predicted_fidelity << ")\n";
  const PhotonState out = normalize(apply_pipeline(plan.pipeline, plan.input_state)).state;
  return {out, target, std::move(plan)};
}

int guarded(const std::function<int()>& body, std::ostream& log) {
  try {
    return body();
  } catch (const NumericalError& e) {
    log << "numerical failure: " << e.what() << " (best objective " << e.best_objective() << ")\n";
    return kNumericalFailure;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Json::exception& e) {
    log << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace

double bandwidth_to_sigma(double bandwidth_nm, double wavelength_nm) {
  if (!(bandwidth_nm > 0.0) || !(wavelength_nm > 0.0))
    throw ConfigurationError("bandwidth and wavelength must be positive");
  const double lambda = wavelength_nm * 1e-9;
  const double dnu = kSpeedOfLight * bandwidth_nm * 1e-9 / (lambda * lambda);
  const double fwhm_t = 2.0 * std::numbers::ln2 / (std::numbers::pi * dnu);
  return fwhm_t / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

Wavepacket ExperimentConfig::packet() const {
  if (sigma_t_s) return Wavepacket(*sigma_t_s);
  return Wavepacket(bandwidth_to_sigma(bandwidth_nm.value_or(kDefaultBandwidthNm),
                                       wavelength_nm.value_or(kDefaultWavelengthNm)));
}

std::vector<double> ExperimentConfig::delays() const {
  if (!delays_s.empty()) return delays_s;
  return make_delay_grid(grid_half_width_s, grid_step_s, {-tau_s, 0.0, tau_s});
}

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig cfg;
  std::vector<std::string> problems;
  if (!j.is_object()) throw ConfigurationError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kConfigKeys.count(key)) problems.push_back("unknown key '" + key + "'");

  auto positive = [&](const char* key, double& field) {
    if (!j.contains(key)) return;
    if (!j[key].is_number() || !(j[key].get<double>() > 0.0))
      problems.push_back(std::string(key) + " must be a positive number");
    else
      field = j[key].get<double>();
  };
  auto optional_positive = [&](const char* key, std::optional<double>& field) {
    if (!j.contains(key)) return;
    double v = 0.0;
    positive(key, v);
    if (v > 0.0) field = v;
  };

  if (j.contains("encoded")) cfg.encoded = j["encoded"];
  if (j.contains("ancilla")) cfg.ancilla = j["ancilla"];
  positive("tau_s", cfg.tau_s);
  if (j.contains("bins")) {
    if (!j["bins"].is_number_integer() || j["bins"].get<int>() < 2)
      problems.push_back("bins must be an integer >= 2");
    else
      cfg.bins = j["bins"].get<int>();
  }
  optional_positive("sigma_t_s", cfg.sigma_t_s);
  optional_positive("bandwidth_nm", cfg.bandwidth_nm);
  optional_positive("wavelength_nm", cfg.wavelength_nm);
  if (cfg.sigma_t_s && (cfg.bandwidth_nm || cfg.wavelength_nm))
    problems.push_back("give either sigma_t_s or bandwidth_nm/wavelength_nm, not both");
  if (j.contains("visibility")) {
    const double v = j["visibility"].is_number() ? j["visibility"].get<double>() : -1.0;
    if (!(v >= 0.0 && v <= 1.0))
      problems.push_back("visibility must lie in [0, 1]");
    else
      cfg.visibility = v;
  }
  if (j.contains("grid")) {
    const Json& g = j["grid"];
    if (!g.is_object()) {
      problems.push_back("grid must be an object {half_width_s, step_s}");
    } else {
      if (g.contains("half_width_s")) cfg.grid_half_width_s = g["half_width_s"].get<double>();
      if (g.contains("step_s")) cfg.grid_step_s = g["step_s"].get<double>();
      if (!(cfg.grid_half_width_s > 0.0) || !(cfg.grid_step_s > 0.0))
        problems.push_back("grid half_width_s and step_s must be positive");
    }
  }
  if (j.contains("delays_s")) {
    if (!j["delays_s"].is_array() || j["delays_s"].empty())
      problems.push_back("delays_s must be a non-empty array");
    else
      cfg.delays_s = j["delays_s"].get<std::vector<double>>();
  }
  positive("baseline_counts", cfg.baseline_counts);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0)
      problems.push_back("seed must be a non-negative integer");
    else
      cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("replicas")) {
    if (!j["replicas"].is_number_integer() || j["replicas"].get<int>() < 0)
      problems.push_back("replicas must be a non-negative integer");
    else
      cfg.replicas = j["replicas"].get<int>();
  }
  if (j.contains("oracle_samples")) {
    if (!j["oracle_samples"].is_number_integer() || j["oracle_samples"].get<int>() < 1)
      problems.push_back("oracle_samples must be a positive integer");
    else
      cfg.oracle_samples = j["oracle_samples"].get<int>();
  }
  for (auto [key, field] : {std::pair{"noiseless", &cfg.noiseless},
                            std::pair{"calibrate_visibility", &cfg.calibrate_visibility},
                            std::pair{"timestamp", &cfg.timestamp}}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_boolean())
      problems.push_back(std::string(key) + " must be a boolean");
    else
      *field = j[key].get<bool>();
  }

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << "invalid config:";
    for (const auto& p : problems) msg << "\n  - " << p;
    throw ConfigurationError(msg.str());
  }
  return cfg;
}

Json config_to_json(const ExperimentConfig& cfg) {
  Json j{{"encoded", cfg.encoded},
         {"ancilla", cfg.ancilla},
         {"tau_s", cfg.tau_s},
         {"bins", cfg.bins},
         {"sigma_t_s", cfg.packet().sigma_t()},
         {"visibility", cfg.visibility},
         {"baseline_counts", cfg.baseline_counts},
         {"seed", cfg.seed},
         {"replicas", cfg.replicas},
         {"oracle_samples", cfg.oracle_samples},
         {"noiseless", cfg.noiseless},
         {"calibrate_visibility", cfg.calibrate_visibility}};
  if (cfg.delays_s.empty())
    j["grid"] = {{"half_width_s", cfg.grid_half_width_s}, {"step_s", cfg.grid_step_s}};
  else
    j["delays_s"] = cfg.delays_s;
  if (!cfg.sigma_t_s) {
    j["bandwidth_nm"] = cfg.bandwidth_nm.value_or(kDefaultBandwidthNm);
    j["wavelength_nm"] = cfg.wavelength_nm.value_or(kDefaultWavelengthNm);
  }
  return j;
}

std::optional<PhotonState> named_state(const std::string& name, const TimeBinLattice& lattice_in,
                                       const Wavepacket& packet) {
  const TimeBinLattice lattice = lattice_in.with_bins(2);
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i{0.0, 1.0};
  auto from = [&](Complex h0, Complex ht, Complex v0, Complex vt) {
    ComplexVector a(4);
    a << h0, ht, v0, vt;
    return PhotonState(a, lattice, packet);
  };
  if (name == "phi_plus") return from(s, 0.0, 0.0, s);
  if (name == "phi_minus") return from(s, 0.0, 0.0, -s);
  if (name == "eq6_state3") {
    // (|r,0> - i |l,tau>) / sqrt2
    const JonesVector r = polarization::r();
    const JonesVector l = polarization::l();
    return from(s * r(0), -i * s * l(0), s * r(1), -i * s * l(1));
  }
  const auto sep = name.find('_');
  if (sep == std::string::npos) return std::nullopt;
  const auto pol = polarization::by_name(name.substr(0, sep));
  const auto bin = timebin::by_name(name.substr(sep + 1));
  if (!pol || !bin) return std::nullopt;
  return PhotonState::product(*pol, *bin, lattice, packet);
}

PhotonState resolve_state(const Json& spec, const TimeBinLattice& lattice, const Wavepacket& packet) {
  if (spec.is_string()) {
    auto s = named_state(spec.get<std::string>(), lattice, packet);
    if (!s) throw ConfigurationError("unknown state name '" + spec.get<std::string>() + "'");
    return *s;
  }
  if (spec.is_object() && spec.contains("amps")) {
    const Json& amps = spec.at("amps");
    ComplexVector a(amps.size());
    for (std::size_t k = 0; k < amps.size(); ++k)
      a(static_cast<int>(k)) = Complex(amps[k].at(0).get<double>(), amps[k].at(1).get<double>());
    if (a.size() % 2 != 0) throw DimensionError("amplitude list must have even length");
    return {a, lattice.with_bins(static_cast<int>(a.size() / 2)), packet};
  }
  throw ConfigurationError("state must be a name or an object with \"amps\"");
}

int cmd_prepare(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
  return guarded(
      [&] {
        const PhotonState target = resolve_state(cfg.encoded, cfg.lattice(), cfg.packet());
        const PreparationPlan plan = compile_preparation(target);
        fs::create_directories(out);
        Json j = plan_to_json(plan);
        j["target"] = state_to_json(target);
        j["config"] = config_to_json(cfg);
        stamp(j, cfg);
        write_json(out / "plan.json", j);
        log << "plan: " << plan.pipeline.size() << " elements, fidelity " << plan.predicted_fidelity
            << ", success probability " << plan.success_probability << '\n';
        return plan.exactly_encodable ? kSuccess : kBestEffort;
      },
      log);
}

int cmd_scan(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
  return guarded(
      [&] {
        if (cfg.ancilla.is_string() && cfg.ancilla.get<std::string>() == "tomography")
          throw ConfigurationError("scan needs a single ancilla state, not \"tomography\"");
        const auto packet = cfg.packet();
        if (auto w = resolvability_warning(cfg.lattice(), packet)) log << "warning: " << *w << '\n';
        const PreparedEncoded enc = prepare_encoded(cfg, log);
        const PhotonState ancilla = resolve_state(cfg.ancilla, cfg.lattice(), packet);
        const VisibilityModel vis(cfg.visibility);
        const ScanConfig scan{cfg.delays(), cfg.baseline_counts, cfg.seed, 0, vis, cfg.noiseless};
        const ScanTrace trace = sample_scan(enc.state, ancilla, scan);

        fs::create_directories(out);
        auto csv = open_out(out / "trace.csv");
        write_trace_csv(csv, trace);
        auto expected_csv = open_out(out / "expected.csv");
        write_expected_csv(expected_csv, scan_trace(enc.state, ancilla, scan.delays, vis));

        const double tau = cfg.tau_s;
        const double r0 = trace.points[grid_index(trace, 0.0)].ratio_hat;
        const double rm = trace.points[grid_index(trace, -tau)].ratio_hat;
        const double rp = trace.points[grid_index(trace, tau)].ratio_hat;
        double min_r = r0;
        for (const auto& p : trace.points) min_r = std::min(min_r, p.ratio_hat);
        Json summary{{"config", config_to_json(cfg)},
                     {"seed", cfg.seed},
                     {"baseline", trace.baseline},
                     {"R_hat_zero", r0},
                     {"R_hat_minus_tau", rm},
                     {"R_hat_plus_tau", rp},
                     {"visibility_hat", estimate_visibility(trace)},
                     {"side_dip_depths", {1.0 - rm, 1.0 - rp}},
                     {"min_R_hat", min_r}};
        if (enc.plan) summary["encoded_plan"] = plan_to_json(*enc.plan);
        stamp(summary, cfg);
        write_json(out / "summary.json", summary);
        log << "scan: baseline " << trace.baseline << ", R_hat(0) " << r0 << '\n';
        return enc.plan && !enc.plan->exactly_encodable ? kBestEffort : kSuccess;
      },
      log);
}

int cmd_tomography(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
  return guarded(
      [&] {
        const auto packet = cfg.packet();
        if (auto w = resolvability_warning(cfg.lattice(), packet)) log << "warning: " << *w << '\n';
        const PreparedEncoded enc = prepare_encoded(cfg, log);
        const TomographySet set = default_tomography_set(cfg.lattice(), packet);
        AcquisitionOptions acq_opts{cfg.delays(), cfg.baseline_counts, cfg.visibility, cfg.seed,
                                    cfg.noiseless, cfg.calibrate_visibility};
        const Acquisition acq = acquire_tomography_data(enc.state, set, acq_opts);

        MleOptions mle;
        mle.visibility = acq.visibility;
        mle.seed = cfg.seed;
        TomographyResult result = mle_reconstruct(acq.counts, set, mle);
        result.fidelity_vs_target = fidelity(result.rho_hat, enc.target);
        if (cfg.replicas >= 2) {
          const BootstrapSummary boot = bootstrap_errors(acq.counts, set, cfg.replicas, cfg.seed, mle, enc.target);
          result.fidelity_std = boot.fidelity_std;
          result.bootstrap_replicas = boot.replicas_used;
          result.dropped_replicas = boot.dropped;
          result.real_std = boot.real_std;
          result.imag_std = boot.imag_std;
        }

        std::vector<double> corrected;
        for (const auto& c : acq.counts)
          corrected.push_back(std::clamp((1.0 - c.observed / c.baseline) / acq.visibility, 0.0, 1.0));
        const LinearInversion li = linear_inversion(corrected, set);

        fs::create_directories(out);
        Json j = result_to_json(result, cfg.seed);
        j["config"] = config_to_json(cfg);
        j["visibility_used"] = acq.visibility;
        j["linear_inversion"] = {{"rho", matrix_to_json(li.rho)},
                                 {"min_eigenvalue", li.min_eigenvalue},
                                 {"physical", li.physical}};
        if (enc.plan) j["encoded_plan"] = plan_to_json(*enc.plan);
        stamp(j, cfg);
        write_json(out / "result.json", j);
        auto re = open_out(out / "rho_real.csv");
        write_matrix_csv(re, result.rho_hat.matrix(), false);
        auto im = open_out(out / "rho_imag.csv");
        write_matrix_csv(im, result.rho_hat.matrix(), true);
        auto proj = open_out(out / "projections.csv");
        proj << "label,scan,delay_s,counts,baseline,p_hat\n";
        for (std::size_t i = 0; i < set.members.size(); ++i) {
          const auto& m = set.members[i];
          proj << m.label << ',' << m.scan << ',' << format_number(m.bin_shift * cfg.tau_s) << ','
               << format_number(acq.counts[i].observed) << ',' << format_number(acq.counts[i].baseline) << ','
               << format_number(acq.projections[i]) << '\n';
        }
        log << "tomography: fidelity " << *result.fidelity_vs_target << " +- " << result.fidelity_std << '\n';
        return enc.plan && !enc.plan->exactly_encodable ? kBestEffort : kSuccess;
      },
      log);
}

int cmd_oracle_check(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
  return guarded(
      [&] {
        const auto packet = cfg.packet();
        const double tau = cfg.tau_s;
        double max_dev = 0.0;
        Json samples = Json::array();
        for (int s = 0; s < cfg.oracle_samples; ++s) {
          PhiloxEngine rng(cfg.seed, 0x0AC1Eu, static_cast<std::uint32_t>(s));
          std::uniform_int_distribution<int> bins(2, 4);
          std::normal_distribution<double> normal;
          std::uniform_real_distribution<double> uni(0.0, 1.0);
          auto random_state = [&] {
            const int n = bins(rng);
            ComplexVector a(2 * n);
            for (int k = 0; k < a.size(); ++k) a(k) = Complex(normal(rng), normal(rng));
            a.normalize();
            return PhotonState(a, TimeBinLattice(n, tau), packet);
          };
          const PhotonState e = random_state();
          const PhotonState a = random_state();
          const double delay = (2.0 * uni(rng) - 1.0) * 4.0 * tau;
          const VisibilityModel vis(0.8 + 0.2 * uni(rng));
          const double direct = coincidence_ratio(e, a, delay, vis).ratio;
          const double oracle = fock_oracle_ratio(e, a, delay, vis);
          max_dev = std::max(max_dev, std::abs(direct - oracle));
        }
        fs::create_directories(out);
        Json j{{"config", config_to_json(cfg)},
               {"samples", cfg.oracle_samples},
               {"max_abs_deviation", max_dev},
               {"tolerance", 1e-9},
               {"pass", max_dev <= 1e-9}};
        stamp(j, cfg);
        write_json(out / "oracle.json", j);
        log << "oracle-check: max |R_direct - R_fock| = " << max_dev << " over " << cfg.oracle_samples
            << " samples\n";
        return max_dev <= 1e-9 ? kSuccess : kNumericalFailure;
      },
      log);
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polarization / time-bin photon state simulator and tomography toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  bool noiseless = false;
  bool timestamp = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "random seed (overrides config)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--noiseless", noiseless, "use expected counts instead of Poisson draws");
    sub->add_flag("--timestamp", timestamp, "embed a generation timestamp in JSON outputs");
  };
  auto* prepare = app.add_subcommand("prepare", "compile a preparation plan for the encoded state");
  auto* scan = app.add_subcommand("scan", "simulate an HOM delay scan");
  auto* tomo = app.add_subcommand("tomography", "simulate 16-projection tomography with MLE and bootstrap");
  auto* oracle = app.add_subcommand("oracle-check", "compare the projection formula with the Fock-space oracle");
  for (auto* sub : {prepare, scan, tomo, oracle}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  ExperimentConfig cfg;
  try {
    Json j = Json::object();
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      j = Json::parse(is);
    }
    cfg = config_from_json(j);
  } catch (const Json::exception& e) {
    err << "error: cannot parse config: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
  if (seed) cfg.seed = *seed;
  if (noiseless) cfg.noiseless = true;
  if (timestamp) cfg.timestamp = true;

  if (prepare->parsed()) return cmd_prepare(cfg, out_dir, err);
  if (scan->parsed()) return cmd_scan(cfg, out_dir, err);
  if (tomo->parsed()) return cmd_tomography(cfg, out_dir, err);
  return cmd_oracle_check(cfg, out_dir, err);
}

}  // namespace tbq::cli
