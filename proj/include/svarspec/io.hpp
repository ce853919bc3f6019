#pragma once

// JSON file formats for graphs, parameters, exact values, certificates and
// spectral estimates.

#include <string>

#include "json.hpp"
#include "svarspec/graph.hpp"
#include "svarspec/identify.hpp"
#include "svarspec/ratfield.hpp"
#include "svarspec/ratlinalg.hpp"
#include "svarspec/simulate.hpp"
#include "svarspec/svar.hpp"

namespace svarspec::io {

using Json = nlohmann::ordered_json;

/// Throws FormatError when the file cannot be read or parsed.
Json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);

Json to_json(const Poly& p);
Poly poly_from_json(const Json& j);
Json to_json(const RatFn& r);
RatFn ratfn_from_json(const Json& j);
Json to_json(const RatMatrix& m);
RatMatrix ratmatrix_from_json(const Json& j);

/// {observed, latent, edges: [{from, to, lags}], auto: {label: [lags]}}
TimeSeriesGraph graph_from_json(const Json& j);
Json to_json(const TimeSeriesGraph& tsg);

/// {cross: [{from, to, lag, coeff}], auto: [{vertex, lag, coeff}], noise: [{vertex, variance}]}
SvarParams params_from_json(const TimeSeriesGraph& tsg, const Json& j);
Json params_to_json(const TimeSeriesGraph& tsg, const SvarParams& p);

Json to_json(const SpectrumBundle& b);

Json certificate_to_json(const ProcessGraph& g, const IdentificationCertificate& c);
/// Reads steps (vertex and triple) and stored solutions; systems are not
/// needed for replay and are left empty.
IdentificationCertificate certificate_from_json(const ProcessGraph& g, const Json& j);

Json edge_functions_to_json(const ProcessGraph& g, const EdgeFunctions& f);
Json cpdag_to_json(const std::vector<std::string>& labels, const Cpdag& c);
Json to_json(const SpectrumEstimate& e);

SeriesSample read_series(const std::string& path);

}  // namespace svarspec::io
