#include "tbq/io.hpp"

#include <charconv>
#include <ostream>

#include "tbq/errors.hpp"

namespace tbq {

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

Json state_to_json(const PhotonState& state) {
  Json amps = Json::array();
  for (int i = 0; i < state.amplitudes().size(); ++i)
    amps.push_back({state.amplitudes()(i).real(), state.amplitudes()(i).imag()});
  return {{"bins", state.bins()},
          {"tau_s", state.lattice().spacing()},
          {"sigma_t_s", state.packet().sigma_t()},
          {"amps", amps}};
}

PhotonState state_from_json(const Json& j) {
  try {
    const int bins = j.at("bins").get<int>();
    const Json& amps = j.at("amps");
    ComplexVector a(amps.size());
    for (std::size_t i = 0; i < amps.size(); ++i)
      a(static_cast<int>(i)) = Complex(amps[i].at(0).get<double>(), amps[i].at(1).get<double>());
    return {a, TimeBinLattice(bins, j.at("tau_s").get<double>()), Wavepacket(j.at("sigma_t_s").get<double>())};
  } catch (const Json::exception& e) {
    throw ConfigurationError(std::string("malformed state JSON: ") + e.what());
  }
}

Json matrix_to_json(const ComplexMatrix& m) {
  Json rows = Json::array();
  for (int r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

ComplexMatrix matrix_from_json(const Json& j) {
  const auto n = static_cast<int>(j.size());
  ComplexMatrix m(n, n);
  for (int r = 0; r < n; ++r) {
    if (static_cast<int>(j[r].size()) != n) throw DimensionError("matrix JSON is not square");
    for (int c = 0; c < n; ++c) m(r, c) = Complex(j[r][c].at(0).get<double>(), j[r][c].at(1).get<double>());
  }
  return m;
}

Json pipeline_to_json(const OpticalPipeline& pipeline) {
  Json elements = Json::array();
  for (const auto& e : pipeline.elements()) {
    if (e.kind() == ElementKind::CRYSTAL)
      elements.push_back({{"kind", "CRYSTAL"}, {"L_m", e.length()}, {"dn", e.index_difference()}});
    else
      elements.push_back({{"kind", to_string(e.kind())}, {"theta_rad", e.theta()}});
  }
  return {{"elements", elements}};
}

OpticalPipeline pipeline_from_json(const Json& j) {
  std::vector<OpticalElement> elements;
  try {
    for (const auto& e : j.at("elements")) {
      const auto kind = e.at("kind").get<std::string>();
      if (kind == "HWP")
        elements.push_back(OpticalElement::half_wave(e.at("theta_rad").get<double>()));
      else if (kind == "QWP")
        elements.push_back(OpticalElement::quarter_wave(e.at("theta_rad").get<double>()));
      else if (kind == "POL")
        elements.push_back(OpticalElement::polarizer(e.at("theta_rad").get<double>()));
      else if (kind == "CRYSTAL")
        elements.push_back(OpticalElement::crystal(e.at("L_m").get<double>(), e.at("dn").get<double>()));
      else
        throw ConfigurationError("unknown element kind '" + kind + "'");
    }
  } catch (const Json::exception& e) {
    throw ConfigurationError(std::string("malformed pipeline JSON: ") + e.what());
  }
  return OpticalPipeline(std::move(elements));
}

Json plan_to_json(const PreparationPlan& plan) {
  return {{"pipeline", pipeline_to_json(plan.pipeline)},
          {"input_state", state_to_json(plan.input_state)},
          {"predicted_fidelity", plan.predicted_fidelity},
          {"success_probability", plan.success_probability},
          {"exactly_encodable", plan.exactly_encodable}};
}

Json result_to_json(const TomographyResult& result, std::uint64_t seed) {
  Json j{{"rho", matrix_to_json(result.rho_hat.matrix())},
         {"fidelity", result.fidelity_vs_target ? Json(*result.fidelity_vs_target) : Json(nullptr)},
         {"fidelity_std", result.fidelity_std},
         {"nll", result.nll},
         {"iterations", result.iterations},
         {"replicas", result.bootstrap_replicas},
         {"dropped_replicas", result.dropped_replicas},
         {"seed", seed}};
  if (result.real_std.size() > 0) {
    ComplexMatrix stds(result.real_std.rows(), result.real_std.cols());
    for (int r = 0; r < stds.rows(); ++r)
      for (int c = 0; c < stds.cols(); ++c) stds(r, c) = Complex(result.real_std(r, c), result.imag_std(r, c));
    j["rho_std"] = matrix_to_json(stds);
  }
  return j;
}

void write_trace_csv(std::ostream& os, const ScanTrace& trace) {
  os << "delay_s,counts,R_hat\n";
  for (const auto& p : trace.points)
    os << format_number(p.delay) << ',' << format_number(p.counts) << ',' << format_number(p.ratio_hat) << '\n';
}

void write_expected_csv(std::ostream& os, const std::vector<TracePoint>& trace) {
  os << "delay_s,R\n";
  for (const auto& p : trace) os << format_number(p.delay) << ',' << format_number(p.ratio) << '\n';
}

void write_matrix_csv(std::ostream& os, const ComplexMatrix& m, bool imaginary) {
  static const char* kLabels[] = {"h0", "ht", "v0", "vt"};
  const bool labelled = m.rows() == 4;
  os << (imaginary ? "imag" : "real");
  for (int c = 0; c < m.cols(); ++c) os << ',' << (labelled ? kLabels[c] : std::to_string(c));
  os << '\n';
  for (int r = 0; r < m.rows(); ++r) {
    os << (labelled ? kLabels[r] : std::to_string(r));
    for (int c = 0; c < m.cols(); ++c) os << ',' << format_number(imaginary ? m(r, c).imag() : m(r, c).real());
    os << '\n';
  }
}

}  // namespace tbq
