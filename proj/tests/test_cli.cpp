#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "support.hpp"
#include "tbq/cli.hpp"
#include "tbq/errors.hpp"

using namespace tbq;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("tbq_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(std::vector<std::string> args, std::string* err_text = nullptr) {
  args.insert(args.begin(), "tbq");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (err_text) *err_text = err.str();
  return code;
}

fs::path write_config(const fs::path& dir, const Json& j) {
  const auto p = dir / "config.json";
  std::ofstream(p) << j.dump();
  return p;
}

// Standard deviation of |f(t)|^2 where f is the Fourier transform of the
// square root of a Gaussian spectral intensity with the given FWHM (Hz).
double temporal_sigma_by_dft(double fwhm_nu) {
  const double sigma_nu = fwhm_nu / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  const int nn = 1601;
  const double dnu = 16.0 * sigma_nu / (nn - 1);
  const double t_max = 8.0 / (4.0 * std::numbers::pi * sigma_nu);
  const int nt = 801;
  const double dt = 2.0 * t_max / (nt - 1);
  double w = 0.0;
  double w2 = 0.0;
  for (int j = 0; j < nt; ++j) {
    const double t = -t_max + j * dt;
    Complex f = 0.0;
    for (int k = 0; k < nn; ++k) {
      const double nu = -8.0 * sigma_nu + k * dnu;
      const double amp = std::exp(-nu * nu / (4.0 * sigma_nu * sigma_nu));
      f += amp * std::polar(1.0, -2.0 * std::numbers::pi * nu * t);
    }
    const double intensity = std::norm(f);
    w += intensity;
    w2 += intensity * t * t;
  }
  return std::sqrt(w2 / w);
}

}  // namespace

TEST_CASE("bandwidth to coherence time matches a numerical Fourier transform") {
  for (auto [bw, lambda] : {std::pair{3.0, 780.0}, std::pair{1.0, 1550.0}, std::pair{10.0, 405.0}}) {
    const double l = lambda * 1e-9;
    const double fwhm_nu = kSpeedOfLight * bw * 1e-9 / (l * l);
    CHECK(cli::bandwidth_to_sigma(bw, lambda) == doctest::Approx(temporal_sigma_by_dft(fwhm_nu)).epsilon(1e-6));
  }
  CHECK(cli::bandwidth_to_sigma(3.0, 780.0) == doctest::Approx(1.2676e-13).epsilon(1e-3));
  CHECK_THROWS_AS(cli::bandwidth_to_sigma(0.0, 780.0), ConfigurationError);
}

TEST_CASE("config parsing and validation") {
  const auto defaults = cli::config_from_json(Json::object());
  CHECK(defaults.tau_s == kDefaultBinSpacing);
  CHECK(defaults.packet().sigma_t() == doctest::Approx(cli::bandwidth_to_sigma(3.0, 780.0)));
  const auto grid = defaults.delays();
  CHECK(std::count(grid.begin(), grid.end(), kDefaultBinSpacing) == 1);

  const auto c = cli::config_from_json(Json{{"sigma_t_s", 1e-13}, {"seed", 5}, {"visibility", 0.9}});
  CHECK(c.packet().sigma_t() == 1e-13);
  CHECK(c.seed == 5);

  try {
    cli::config_from_json(Json{{"tau", 1.0}, {"visibility", 1.5}, {"sigma_t_s", 1e-13}, {"bandwidth_nm", 3.0}});
    FAIL("expected a configuration error");
  } catch (const ConfigurationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("unknown key 'tau'") != std::string::npos);
    CHECK(msg.find("visibility") != std::string::npos);
    CHECK(msg.find("not both") != std::string::npos);
  }
  CHECK_THROWS_AS(cli::config_from_json(Json{{"bins", 1}}), ConfigurationError);
  CHECK_THROWS_AS(cli::config_from_json(Json{{"seed", -3}}), ConfigurationError);
  CHECK_THROWS_AS(cli::config_from_json(Json::array()), ConfigurationError);
}

TEST_CASE("state names") {
  const auto lat = testing::two_bins();
  const auto pk = testing::narrow_packet();
  const auto e3 = cli::named_state("eq6_state3", lat, pk);
  REQUIRE(e3.has_value());
  ComplexVector expected(4);
  expected << Complex(0, 0.5), Complex(0, -0.5), 0.5, 0.5;
  CHECK(e3->amplitudes().isApprox(expected, 1e-15));
  CHECK(cli::named_state("r_div", lat, pk).has_value());
  CHECK_FALSE(cli::named_state("q_0", lat, pk).has_value());
  CHECK_FALSE(cli::named_state("phi", lat, pk).has_value());
  const auto s = cli::resolve_state(Json{{"amps", {{1, 0}, {0, 0}, {0, 0}, {0, 0}}}}, lat, pk);
  CHECK(s.amplitude(Pol::H, 0) == Complex(1.0));
  CHECK_THROWS_AS(cli::resolve_state(Json("nope"), lat, pk), ConfigurationError);
}

TEST_CASE("JSON round trips") {
  std::mt19937_64 rng(2);
  const auto s = testing::random_state(rng, 3);
  const auto back = state_from_json(state_to_json(s));
  CHECK(back.amplitudes() == s.amplitudes());
  CHECK(back.lattice() == s.lattice());
  const OpticalPipeline p({OpticalElement::quarter_wave(0.3), OpticalElement::crystal_for_delay(kDefaultBinSpacing),
                           OpticalElement::polarizer(1.1)});
  const auto q = pipeline_from_json(pipeline_to_json(p));
  REQUIRE(q.size() == 3);
  CHECK(q.elements()[0].theta() == p.elements()[0].theta());
  CHECK(q.elements()[1].delay() == p.elements()[1].delay());
  CHECK_THROWS_AS(pipeline_from_json(Json{{"elements", {{{"kind", "MIRROR"}}}}}), ConfigurationError);
  for (double x : {0.1, 1.0 / 3.0, 2.3e-12, -7.0}) CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("prepare command") {
  TempDir dir("prepare");
  const auto cfg = write_config(dir.path, Json{{"encoded", "p_plus"}});
  REQUIRE(run_cli({"prepare", "--config", cfg.string(), "--out", (dir.path / "out").string()}) == 0);
  const Json plan = Json::parse(slurp(dir.path / "out" / "plan.json"));
  CHECK(plan["success_probability"].get<double>() == doctest::Approx(0.5));
  CHECK(plan["pipeline"]["elements"].size() == 3);
  CHECK(plan["config"]["encoded"] == "p_plus");
  CHECK_FALSE(plan.contains("generated_at"));

  const auto odd = write_config(dir.path, Json{{"encoded", {{"amps", {{0.5, 0}, {0.5, 0}, {0.5, 0}, {0.5, 0}}}}}});
  CHECK(run_cli({"prepare", "--config", odd.string(), "--out", (dir.path / "odd").string()}) == 0);
  const double t = 1.0 / std::sqrt(3.0);
  const auto bad = write_config(dir.path, Json{{"encoded", {{"amps", {{t, 0}, {t, 0}, {t, 0}, {0, 0}}}}}});
  CHECK(run_cli({"prepare", "--config", bad.string(), "--out", (dir.path / "bad").string()}) == 2);
}

TEST_CASE("usage and config errors exit with code 1") {
  TempDir dir("errors");
  std::string err;
  CHECK(run_cli({}, &err) == 1);
  CHECK(run_cli({"scan", "--config", (dir.path / "missing.json").string()}, &err) == 1);
  const auto cfg = write_config(dir.path, Json{{"visibility", 2.0}});
  CHECK(run_cli({"scan", "--config", cfg.string(), "--out", dir.path.string()}, &err) == 1);
  CHECK(err.find("visibility") != std::string::npos);
  std::ofstream(dir.path / "broken.json") << "{ not json";
  CHECK(run_cli({"scan", "--config", (dir.path / "broken.json").string()}, &err) == 1);
  const auto anc = write_config(dir.path, Json{{"ancilla", "tomography"}});
  CHECK(run_cli({"scan", "--config", anc.string(), "--out", dir.path.string()}, &err) == 1);
}

TEST_CASE("scan and tomography outputs are byte-identical across runs") {
  TempDir dir("determinism");
  const auto cfg = write_config(dir.path, Json{{"encoded", "eq6_state3"}, {"ancilla", "p_plus"}, {"replicas", 10},
                                               {"visibility", 0.94}});
  for (const std::string cmd : {"scan", "tomography"}) {
    const auto a = dir.path / (cmd + "_a");
    const auto b = dir.path / (cmd + "_b");
    REQUIRE(run_cli({cmd, "--config", cfg.string(), "--seed", "12", "--out", a.string()}) == 0);
    REQUIRE(run_cli({cmd, "--config", cfg.string(), "--seed", "12", "--out", b.string()}) == 0);
    int files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      ++files;
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
    CHECK(files >= 3);
  }
  const Json result = Json::parse(slurp(dir.path / "tomography_a" / "result.json"));
  CHECK(result["seed"] == 12);
  CHECK(result["replicas"] == 10);
  CHECK(result["config"]["seed"] == 12);
  CHECK(result["rho"].size() == 4);
  const std::string header = slurp(dir.path / "tomography_a" / "rho_real.csv").substr(0, 16);
  CHECK(header == "real,h0,ht,v0,vt");
  CHECK(slurp(dir.path / "scan_a" / "trace.csv").rfind("delay_s,counts,R_hat\n", 0) == 0);

  const auto c = dir.path / "scan_c";
  REQUIRE(run_cli({"scan", "--config", cfg.string(), "--seed", "13", "--out", c.string()}) == 0);
  CHECK(slurp(c / "trace.csv") != slurp(dir.path / "scan_a" / "trace.csv"));
}

TEST_CASE("timestamp is opt-in") {
  TempDir dir("timestamp");
  REQUIRE(run_cli({"scan", "--noiseless", "--timestamp", "--out", dir.path.string()}) == 0);
  const Json summary = Json::parse(slurp(dir.path / "summary.json"));
  CHECK(summary.contains("generated_at"));
  CHECK(summary["config"]["noiseless"] == true);
  CHECK(summary["R_hat_zero"].get<double>() == doctest::Approx(0.0));
  CHECK(summary["visibility_hat"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("oracle-check command") {
  TempDir dir("oracle");
  const auto cfg = write_config(dir.path, Json{{"oracle_samples", 20}, {"sigma_t_s", kDefaultBinSpacing / 20}});
  REQUIRE(run_cli({"oracle-check", "--config", cfg.string(), "--out", dir.path.string()}) == 0);
  const Json j = Json::parse(slurp(dir.path / "oracle.json"));
  CHECK(j["pass"] == true);
  CHECK(j["samples"] == 20);
}
