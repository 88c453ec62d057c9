#pragma once

// JSON and CSV serialization of states, pipelines, plans, traces and
// tomography results. Numbers are written with round-trip precision so
// repeated runs produce byte-identical files.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "tbq/experiment.hpp"
#include "tbq/hilbert.hpp"
#include "tbq/hom.hpp"
#include "tbq/optics.hpp"
#include "tbq/tomography.hpp"

namespace tbq {

using Json = nlohmann::json;

/// {"bins": n, "tau_s": t, "sigma_t_s": s, "amps": [[re, im], ...]}
Json state_to_json(const PhotonState& state);
PhotonState state_from_json(const Json& j);

Json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);

/// {"elements": [{"kind": "HWP", "theta_rad": x}, {"kind": "CRYSTAL", "L_m": l, "dn": d}, ...]}
Json pipeline_to_json(const OpticalPipeline& pipeline);
OpticalPipeline pipeline_from_json(const Json& j);

Json plan_to_json(const PreparationPlan& plan);

/// {"rho": [[[re, im], ...], ...], "fidelity": f, "fidelity_std": s, "nll": v,
///  "replicas": n, "seed": k, ...}
Json result_to_json(const TomographyResult& result, std::uint64_t seed);

/// Shortest decimal that round-trips the double.
std::string format_number(double x);

/// delay_s,counts,R_hat
void write_trace_csv(std::ostream& os, const ScanTrace& trace);
/// delay_s,R
void write_expected_csv(std::ostream& os, const std::vector<TracePoint>& trace);
/// Square matrix with row and column labels h0, ht, v0, vt (4x4) or indices.
void write_matrix_csv(std::ostream& os, const ComplexMatrix& m, bool imaginary);

}  // namespace tbq
