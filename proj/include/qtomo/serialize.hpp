#pragma once

#include <string>
#include <vector>

// Single-header nlohmann/json from vendor/.
#include <json.hpp>

#include "qtomo/forward.hpp"
#include "qtomo/measure.hpp"
#include "qtomo/montecarlo.hpp"
#include "qtomo/reconstruct.hpp"

namespace qtomo {

using Json = nlohmann::json;

/// {dim, re: row-major, im: row-major}; round trips bit-exactly.
Json density_to_json(const DensityMatrix& rho);
DensityMatrix density_from_json(const Json& j);

Json fit_to_json(const FitResult& fit);
FitResult fit_from_json(const Json& j);

/// {rho, distance, converged, iterations, rank_deficient
///  [, fidelity_vs_truth]}.
Json reconstruction_to_json(const ReconstructionResult& r);

Json trace_meta_to_json(const TraceMeta& meta);
TraceMeta trace_meta_from_json(const Json& j);

/// CSV with header `t,delta_alpha[,delta_epsilon,delta_abs,delta_phase]`,
/// full round-trip precision scientific notation.
std::string trace_to_csv(const SignalTrace& trace);
SignalTrace trace_from_csv(const std::string& csv);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

/// Minimal line/scatter SVG of a trace set or sweep, one series per input.
std::string traces_to_svg(const std::vector<SignalTrace>& traces);
std::string sweep_to_svg(const std::vector<SweepRow>& rows);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace qtomo
