#include "svarspec/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "svarspec/errors.hpp"
#include "svarspec/graph.hpp"
#include "svarspec/identify.hpp"
#include "svarspec/io.hpp"
#include "svarspec/simulate.hpp"
#include "svarspec/svar.hpp"

namespace svarspec {

namespace {

using io::Json;

// Raised for bad flag combinations discovered after parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

std::vector<std::string> split_labels(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::vector<double> parse_frequencies(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_labels(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("invalid frequency '" + tok + "'");
    }
  }
  return out;
}

std::vector<double> default_frequencies() {
  std::vector<double> out;
  for (int k = 1; k <= 8; ++k) out.push_back(std::numbers::pi * k / 9.0);
  return out;
}

struct Options {
  std::string graph, params, spectrum, certificate, series, out;
  std::string x, y, z, frequencies;
  std::optional<std::uint64_t> seed;
  int trials = 3;
  std::size_t length = 4096, burn_in = 500, segment_length = 0, segments = 0;
  double overlap = 0.5, threshold = 0.1;
  std::string query_kind;
};

class Report {
 public:
  explicit Report(std::string command) : command_(std::move(command)) {}

  std::string read_input(const std::string& path) {
    std::string text = io::read_text_file(path);
    inputs_[path] = sha256_hex(text);
    return text;
  }
  Json read_json(const std::string& path) {
    const std::string text = read_input(path);
    try {
      return Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw FormatError("'" + path + "' is not valid JSON: " + e.what());
    }
  }
  void seed(std::uint64_t s) { seeds_.push_back(s); }
  void warn(std::string w) { warnings_.push_back(std::move(w)); }
  Json& outputs() { return outputs_; }

  Json finish(double ms, int status, const std::string& error) const {
    Json r{{"command", command_},
           {"inputs", inputs_},
           {"seeds", seeds_},
           {"outputs", outputs_},
           {"warnings", warnings_},
           {"timing_ms", std::round(ms * 1000.0) / 1000.0},
           {"status", status}};
    if (!error.empty()) r["error"] = error;
    return r;
  }

 private:
  std::string command_;
  Json inputs_ = Json::object();
  std::vector<std::uint64_t> seeds_;
  Json outputs_ = Json::object();
  std::vector<std::string> warnings_;
};

// Writes the primary output to --out when given, otherwise into the report.
void emit(const Options& o, Report& r, const char* key, const Json& value) {
  if (o.out.empty()) {
    r.outputs()[key] = value;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw FormatError("cannot write '" + o.out + "'");
  f << value.dump(2) << "\n";
  r.outputs()["written"] = o.out;
}

std::uint64_t require_seed(const Options& o, const char* what) {
  if (!o.seed) throw UsageError(std::string(what) + " is randomized and needs an explicit --seed");
  return *o.seed;
}

TimeSeriesGraph load_graph(const Options& o, Report& r) {
  if (o.graph.empty()) throw UsageError("--graph is required");
  return io::graph_from_json(r.read_json(o.graph));
}

VertexSet observed_set(const ProcessGraph& g, const std::string& labels, const char* flag) {
  VertexSet s = g.ids(split_labels(labels));
  if (s & g.latent()) throw UsageError(std::string(flag) + " must name observed vertices");
  return s;
}

RatMatrix load_spectrum(const Options& o, const TimeSeriesGraph& tsg, Report& r) {
  if (!o.params.empty()) {
    const SvarParams p = io::params_from_json(tsg, r.read_json(o.params));
    return spectrum(tsg, p).s;
  }
  if (!o.spectrum.empty()) {
    const Json j = r.read_json(o.spectrum);
    return io::ratmatrix_from_json(j.contains("S") ? j.at("S") : j);
  }
  throw UsageError("need --params or --spectrum");
}

void cmd_validate(const Options& o, Report& r) {
  const TimeSeriesGraph tsg = load_graph(o, r);
  const ProcessGraph& g = tsg.graph();
  r.outputs() = Json{{"valid", true},
                     {"observed", g.labels_of(g.observed())},
                     {"latent", g.labels_of(g.latent())},
                     {"edges", g.edges().size()},
                     {"order", tsg.order()},
                     {"acyclic", g.acyclic()},
                     {"contemporaneous_acyclic", tsg.contemporaneous_acyclic()}};
  if (!g.acyclic()) r.warn("process graph is cyclic; separation and identification queries need a DAG");
}

void cmd_query(const Options& o, Report& r) {
  const TimeSeriesGraph tsg = load_graph(o, r);
  const ProcessGraph& g = tsg.graph();
  const VertexSet x = g.ids(split_labels(o.x));
  const VertexSet y = g.ids(split_labels(o.y));
  const VertexSet z = g.ids(split_labels(o.z));
  if (o.query_kind == "dsep") {
    r.outputs()["d_separated"] = d_separated(g, x, y, z);
  } else if (o.query_kind == "tsep") {
    const TSeparation t = t_separation_min(g, x, y);
    r.outputs() = Json{{"size", t.size}, {"Z_X", g.labels_of(t.zx)}, {"Z_Y", g.labels_of(t.zy)}};
  } else if (o.query_kind == "rank") {
    const std::uint64_t seed = require_seed(o, "rank");
    r.seed(seed);
    observed_set(g, o.x, "--x");
    observed_set(g, o.y, "--y");
    r.outputs() = Json{{"generic_rank", generic_rank(tsg, x, y, o.trials, seed)}, {"trials", o.trials}};
  } else if (o.query_kind == "treks") {
    Json list = Json::array();
    for (VertexId a : members(x))
      for (VertexId b : members(y)) {
        Json treks = Json::array();
        for (const Trek& t : enumerate_treks(g, a, b)) treks.push_back(format_trek(g, t));
        list.push_back({{"from", g.label(a)}, {"to", g.label(b)}, {"treks", std::move(treks)}});
      }
    r.outputs()["treks"] = std::move(list);
  } else {
    throw UsageError("unknown query '" + o.query_kind + "' (expected dsep, tsep, rank or treks)");
  }
}

void cmd_spectrum(const Options& o, Report& r) {
  const TimeSeriesGraph tsg = load_graph(o, r);
  if (o.params.empty()) throw UsageError("--params is required");
  const SvarParams p = io::params_from_json(tsg, r.read_json(o.params));
  emit(o, r, "spectrum", io::to_json(spectrum(tsg, p)));
}

void cmd_identify(const Options& o, Report& r) {
  const TimeSeriesGraph tsg = load_graph(o, r);
  const ProcessGraph& g = tsg.graph();
  g.require_acyclic("identification");
  IdentificationCertificate cert;
  if (o.params.empty() && o.spectrum.empty()) {
    const std::uint64_t seed = require_seed(o, "identify without --params/--spectrum");
    r.seed(seed);
    SampledIdentification s = identify_sampled(tsg, seed);
    for (auto& w : s.warnings) r.warn(std::move(w));
    if (s.seed_used != seed) r.seed(s.seed_used);
    r.outputs()["params"] = io::params_to_json(tsg, s.params);
    cert = std::move(s.certificate);
  } else {
    cert = identify_all(g, load_spectrum(o, tsg, r));
  }
  Json unresolved = Json::array();
  for (const Edge& e : cert.unresolved) unresolved.push_back(g.label(e.from) + " -> " + g.label(e.to));
  r.outputs()["solved_edges"] = cert.all_solved().size();
  r.outputs()["unresolved"] = unresolved;
  if (!cert.unresolved.empty()) r.warn("some observed edges have no identification formula");
  emit(o, r, "certificate", io::certificate_to_json(g, cert));
}

void cmd_replay(const Options& o, Report& r) {
  const TimeSeriesGraph tsg = load_graph(o, r);
  const ProcessGraph& g = tsg.graph();
  if (o.certificate.empty()) throw UsageError("--certificate is required");
  const Json cj = r.read_json(o.certificate);
  const IdentificationCertificate cert = io::certificate_from_json(g, cj);
  const EdgeFunctions solved = replay_certificate(g, load_spectrum(o, tsg, r), cert);
  r.outputs()["matches_certificate"] = solved == cert.all_solved();
  emit(o, r, "solved", io::edge_functions_to_json(g, solved));
}

void cmd_simulate(const Options& o, Report& r) {
  const TimeSeriesGraph tsg = load_graph(o, r);
  if (o.params.empty()) throw UsageError("--params is required");
  if (o.out.empty()) throw UsageError("--out is required for simulate");
  const std::uint64_t seed = require_seed(o, "simulate");
  r.seed(seed);
  const SvarParams p = io::params_from_json(tsg, r.read_json(o.params));
  const SeriesSample s = simulate_series(tsg, p, o.length, o.burn_in, seed);
  std::ofstream f(o.out);
  if (!f) throw FormatError("cannot write '" + o.out + "'");
  write_series(f, s);
  r.outputs() = Json{{"written", o.out}, {"length", o.length}, {"burn_in", o.burn_in}, {"labels", s.labels}};
}

std::size_t segment_length_for(const Options& o, std::size_t length) {
  if (o.segment_length) return o.segment_length;
  if (o.segments) {
    // With overlap q, N segments of length L cover L + (N - 1) L (1 - q) samples.
    const double span = 1.0 + static_cast<double>(o.segments - 1) * (1.0 - o.overlap);
    return static_cast<std::size_t>(std::floor(static_cast<double>(length) / span));
  }
  return std::min<std::size_t>(256, length);
}

SpectrumEstimate load_estimate(const Options& o, Report& r) {
  if (o.series.empty()) throw UsageError("--series is required");
  r.read_input(o.series);
  const SeriesSample s = io::read_series(o.series);
  const auto freqs = o.frequencies.empty() ? default_frequencies() : parse_frequencies(o.frequencies);
  return estimate_spectrum(s, freqs, segment_length_for(o, s.length), o.overlap);
}

void cmd_estimate(const Options& o, Report& r) {
  const SpectrumEstimate e = load_estimate(o, r);
  r.outputs()["segments"] = e.segments;
  r.outputs()["segment_length"] = e.segment_length;
  emit(o, r, "estimate", io::to_json(e));
}

void cmd_discover(const Options& o, Report& r) {
  Cpdag c;
  std::vector<std::string> labels;
  if (!o.series.empty()) {
    const SpectrumEstimate e = load_estimate(o, r);
    labels = e.labels;
    r.outputs()["oracle"] = "empirical";
    r.outputs()["threshold"] = o.threshold;
    r.warn("empirical oracle uses a fixed, uncalibrated threshold");
    c = discover_cpdag(
        [&](VertexSet x, VertexSet y, VertexSet z) {
          auto names = [&labels](VertexSet s) {
            std::vector<std::string> out;
            for (VertexId i : members(s)) out.push_back(labels.at(static_cast<std::size_t>(i)));
            return out;
          };
          return empirical_ci_test(e, names(x), names(y), names(z), o.threshold);
        },
        static_cast<int>(labels.size()));
  } else {
    const TimeSeriesGraph tsg = load_graph(o, r);
    const ProcessGraph& g = tsg.graph();
    RatMatrix s;
    if (o.params.empty() && o.spectrum.empty()) {
      const std::uint64_t seed = require_seed(o, "discover without --params/--spectrum");
      r.seed(seed);
      s = spectrum(tsg, sample_stable_params(tsg, seed)).s;
    } else {
      s = load_spectrum(o, tsg, r);
    }
    labels = observed_labels(g);
    r.outputs()["oracle"] = "exact";
    std::map<std::tuple<VertexSet, VertexSet, VertexSet>, bool> memo;
    const CiOracle exact = spectral_ci_oracle(g, s);
    c = discover_cpdag(
        [&](VertexSet x, VertexSet y, VertexSet z) {
          auto key = std::make_tuple(std::min(x, y), std::max(x, y), z);
          auto it = memo.find(key);
          if (it != memo.end()) return it->second;
          return memo[key] = exact(x, y, z);
        },
        static_cast<int>(labels.size()));
  }
  for (const auto& w : c.report) r.warn(w);
  emit(o, r, "cpdag", io::cpdag_to_json(labels, c));
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SingularMatrixError*>(&e)) return kExitNonGeneric;
  if (dynamic_cast<const EstimationError*>(&e)) return kExitEstimation;
  if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const FormatError*>(&e) ||
      dynamic_cast<const GraphError*>(&e) || dynamic_cast<const ParamError*>(&e) ||
      dynamic_cast<const LabelError*>(&e) || dynamic_cast<const DimensionError*>(&e)) {
    return kExitValidation;
  }
  return kExitError;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact frequency-domain tools for SVAR process graphs"};
  app.require_subcommand(1);
  Options o;
  std::function<void(const Options&, Report&)> handler;
  std::string command;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--out", o.out, "Write the primary output to this file");
  };
  auto add_sets = [&o](CLI::App* sub) {
    sub->add_option("--x", o.x, "Comma-separated labels");
    sub->add_option("--y", o.y, "Comma-separated labels");
    sub->add_option("--z", o.z, "Comma-separated labels");
  };
  auto add_seed = [&o](CLI::App* sub) { sub->add_option("--seed", o.seed, "Random seed"); };
  auto add_estimation = [&o](CLI::App* sub) {
    sub->add_option("--series", o.series, "Columnar series file");
    sub->add_option("--frequencies", o.frequencies, "Comma-separated angles in [0, pi]");
    sub->add_option("--segment-length", o.segment_length, "Welch segment length");
    sub->add_option("--segments", o.segments, "Number of Welch segments (sets the length)");
    sub->add_option("--overlap", o.overlap, "Segment overlap fraction");
  };
  auto bind = [&](CLI::App* sub, std::function<void(const Options&, Report&)> fn) {
    sub->callback([&, sub, fn] {
      command = sub->get_name();
      handler = fn;
    });
  };

  auto* validate = app.add_subcommand("validate", "Parse and check a graph file");
  validate->add_option("--graph", o.graph)->required();
  bind(validate, cmd_validate);

  auto* query = app.add_subcommand("query", "Separation, rank and trek queries");
  query->add_option("kind", o.query_kind, "dsep | tsep | rank | treks")->required();
  query->add_option("--graph", o.graph)->required();
  query->add_option("--trials", o.trials, "Parameter draws for rank");
  add_sets(query);
  add_seed(query);
  bind(query, cmd_query);

  auto* spec = app.add_subcommand("spectrum", "Compute H, S^I, S^LI and S");
  spec->add_option("--graph", o.graph)->required();
  spec->add_option("--params", o.params)->required();
  add_common(spec);
  bind(spec, cmd_spectrum);

  auto* ident = app.add_subcommand("identify", "Identify link functions via LF-HTC");
  ident->add_option("--graph", o.graph)->required();
  ident->add_option("--params", o.params);
  ident->add_option("--spectrum", o.spectrum);
  add_seed(ident);
  add_common(ident);
  bind(ident, cmd_identify);

  auto* replay = app.add_subcommand("replay", "Re-execute a certificate on a spectrum");
  replay->add_option("--graph", o.graph)->required();
  replay->add_option("--certificate", o.certificate)->required();
  replay->add_option("--params", o.params);
  replay->add_option("--spectrum", o.spectrum);
  add_common(replay);
  bind(replay, cmd_replay);

  auto* sim = app.add_subcommand("simulate", "Simulate the structural recursion");
  sim->add_option("--graph", o.graph)->required();
  sim->add_option("--params", o.params)->required();
  sim->add_option("--length", o.length, "Number of time steps kept");
  sim->add_option("--burn-in", o.burn_in, "Discarded initial steps");
  add_seed(sim);
  add_common(sim);
  bind(sim, cmd_simulate);

  auto* est = app.add_subcommand("estimate", "Welch cross-spectral estimate");
  add_estimation(est);
  add_common(est);
  bind(est, cmd_estimate);

  auto* disc = app.add_subcommand("discover", "CPDAG from a spectral CI oracle");
  disc->add_option("--graph", o.graph);
  disc->add_option("--params", o.params);
  disc->add_option("--spectrum", o.spectrum);
  disc->add_option("--threshold", o.threshold, "Empirical partial coherence threshold");
  add_seed(disc);
  add_estimation(disc);
  add_common(disc);
  bind(disc, cmd_discover);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  Report report(command);
  const auto start = std::chrono::steady_clock::now();
  int status = kExitOk;
  std::string error;
  try {
    handler(o, report);
  } catch (const std::exception& e) {
    status = exit_code_for(e);
    error = e.what();
    err << "error: " << error << "\n";
  }
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out << report.finish(ms, status, error).dump(2) << "\n";
  return status;
}

}  // namespace svarspec
