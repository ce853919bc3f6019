#include "svarspec/io.hpp"

#include <fstream>
#include <sstream>

#include "svarspec/errors.hpp"

namespace svarspec::io {

namespace {

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

std::string as_string(const Json& j, const std::string& where) {
  if (!j.is_string()) throw FormatError(where + ": expected a string");
  return j.get<std::string>();
}

int as_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw FormatError(where + ": expected an integer");
  return j.get<int>();
}

Rational as_rational(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (!j.is_string()) throw FormatError(where + ": expected a rational string \"p/q\"");
  try {
    return parse_rational(j.get<std::string>());
  } catch (const FormatError& e) {
    throw FormatError(where + ": " + e.what());
  }
}

std::vector<std::string> string_list(const Json& j, const std::string& where) {
  if (!j.is_array()) throw FormatError(where + ": expected an array of labels");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_string(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Json labels_json(const ProcessGraph& g, VertexSet s) { return Json(g.labels_of(s)); }

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::string& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw FormatError("'" + path + "' is not valid JSON: " + e.what());
  }
}

Json to_json(const Poly& p) {
  Json out = Json::array();
  for (const auto& c : p.coeffs()) out.push_back(format_rational(c));
  return out;
}

Poly poly_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("polynomial: expected an array of coefficients");
  std::vector<Rational> c;
  for (std::size_t i = 0; i < j.size(); ++i) {
    c.push_back(as_rational(j[i], "polynomial coefficient " + std::to_string(i)));
  }
  return Poly(std::move(c));
}

Json to_json(const RatFn& r) { return Json{{"num", to_json(r.num())}, {"den", to_json(r.den())}}; }

RatFn ratfn_from_json(const Json& j) {
  try {
    return RatFn(poly_from_json(field(j, "num", "rational function")),
                 poly_from_json(field(j, "den", "rational function")));
  } catch (const DivisionByZeroError&) {
    throw FormatError("rational function with zero denominator");
  }
}

Json to_json(const RatMatrix& m) {
  Json entries = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(to_json(m(i, k)));
    entries.push_back(std::move(row));
  }
  return Json{{"rows", m.row_labels()}, {"cols", m.col_labels()}, {"entries", std::move(entries)}};
}

RatMatrix ratmatrix_from_json(const Json& j) {
  RatMatrix m(string_list(field(j, "rows", "matrix"), "matrix.rows"),
              string_list(field(j, "cols", "matrix"), "matrix.cols"));
  const Json& e = field(j, "entries", "matrix");
  if (!e.is_array() || e.size() != m.rows()) throw FormatError("matrix.entries: wrong row count");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (!e[i].is_array() || e[i].size() != m.cols()) {
      throw FormatError("matrix.entries[" + std::to_string(i) + "]: wrong column count");
    }
    for (std::size_t k = 0; k < m.cols(); ++k) m(i, k) = ratfn_from_json(e[i][k]);
  }
  return m;
}

TimeSeriesGraph graph_from_json(const Json& j) {
  const auto observed = string_list(field(j, "observed", "graph"), "graph.observed");
  const auto latent = j.contains("latent") ? string_list(j.at("latent"), "graph.latent")
                                           : std::vector<std::string>{};
  const Json& edges = field(j, "edges", "graph");
  if (!edges.is_array()) throw FormatError("graph.edges: expected an array");
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::vector<int>> lag_sets;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "graph.edges[" + std::to_string(i) + "]";
    const Json& e = edges[i];
    pairs.emplace_back(as_string(field(e, "from", where), where + ".from"),
                       as_string(field(e, "to", where), where + ".to"));
    const Json& lags = field(e, "lags", where);
    if (!lags.is_array()) throw FormatError(where + ".lags: expected an array");
    std::vector<int> ls;
    for (std::size_t k = 0; k < lags.size(); ++k) ls.push_back(as_int(lags[k], where + ".lags"));
    lag_sets.push_back(std::move(ls));
  }
  ProcessGraph g(observed, latent, pairs);
  std::map<Edge, std::vector<int>> cross;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    cross[{g.id(pairs[i].first), g.id(pairs[i].second)}] = lag_sets[i];
  }
  std::map<VertexId, std::vector<int>> autos;
  if (j.contains("auto")) {
    const Json& a = j.at("auto");
    if (!a.is_object()) throw FormatError("graph.auto: expected an object keyed by label");
    for (const auto& [label, lags] : a.items()) {
      const std::string where = "graph.auto." + label;
      VertexId v;
      try {
        v = g.id(label);
      } catch (const LabelError&) {
        throw GraphError(where + ": unknown vertex");
      }
      if (!lags.is_array()) throw FormatError(where + ": expected an array");
      for (const auto& k : lags) autos[v].push_back(as_int(k, where));
    }
  }
  return TimeSeriesGraph(std::move(g), std::move(cross), std::move(autos));
}

Json to_json(const TimeSeriesGraph& tsg) {
  const ProcessGraph& g = tsg.graph();
  Json edges = Json::array();
  for (const auto& [e, lags] : tsg.all_cross_lags()) {
    edges.push_back({{"from", g.label(e.from)}, {"to", g.label(e.to)}, {"lags", lags}});
  }
  Json autos = Json::object();
  for (const auto& [v, lags] : tsg.all_auto_lags()) autos[g.label(v)] = lags;
  return Json{{"observed", g.labels_of(g.observed())},
              {"latent", g.labels_of(g.latent())},
              {"edges", std::move(edges)},
              {"auto", std::move(autos)}};
}

SvarParams params_from_json(const TimeSeriesGraph& tsg, const Json& j) {
  const ProcessGraph& g = tsg.graph();
  auto vertex = [&g](const Json& x, const std::string& where) {
    const std::string label = as_string(x, where);
    try {
      return g.id(label);
    } catch (const LabelError&) {
      throw ParamError(where + ": unknown vertex '" + label + "'");
    }
  };
  SvarParams p;
  if (j.contains("cross")) {
    const Json& c = j.at("cross");
    if (!c.is_array()) throw FormatError("params.cross: expected an array");
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::string where = "params.cross[" + std::to_string(i) + "]";
      const VertexId from = vertex(field(c[i], "from", where), where + ".from");
      const VertexId to = vertex(field(c[i], "to", where), where + ".to");
      if (!g.has_edge(from, to)) {
        throw ParamError(where + ": " + g.label(from) + " -> " + g.label(to) + " is not an edge");
      }
      const int lag = as_int(field(c[i], "lag", where), where + ".lag");
      const auto& lags = tsg.cross_lags({from, to});
      if (std::find(lags.begin(), lags.end(), lag) == lags.end()) {
        throw ParamError(where + ": lag " + std::to_string(lag) + " is not in the edge's lag set");
      }
      if (!p.cross.emplace(SvarParams::CrossKey{{from, to}, lag},
                           as_rational(field(c[i], "coeff", where), where + ".coeff"))
               .second) {
        throw ParamError(where + ": duplicate entry");
      }
    }
  }
  if (j.contains("auto")) {
    const Json& a = j.at("auto");
    if (!a.is_array()) throw FormatError("params.auto: expected an array");
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string where = "params.auto[" + std::to_string(i) + "]";
      const VertexId v = vertex(field(a[i], "vertex", where), where + ".vertex");
      const int lag = as_int(field(a[i], "lag", where), where + ".lag");
      const auto& lags = tsg.auto_lags(v);
      if (std::find(lags.begin(), lags.end(), lag) == lags.end()) {
        throw ParamError(where + ": lag " + std::to_string(lag) + " is not an auto lag of '" +
                         g.label(v) + "'");
      }
      if (!p.autos.emplace(SvarParams::AutoKey{v, lag},
                           as_rational(field(a[i], "coeff", where), where + ".coeff"))
               .second) {
        throw ParamError(where + ": duplicate entry");
      }
    }
  }
  p.noise.assign(static_cast<std::size_t>(g.size()), Rational(0));
  std::vector<bool> seen(static_cast<std::size_t>(g.size()), false);
  const Json& n = field(j, "noise", "params");
  if (!n.is_array()) throw FormatError("params.noise: expected an array");
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string where = "params.noise[" + std::to_string(i) + "]";
    const VertexId v = vertex(field(n[i], "vertex", where), where + ".vertex");
    if (seen[static_cast<std::size_t>(v)]) throw ParamError(where + ": duplicate entry");
    seen[static_cast<std::size_t>(v)] = true;
    p.noise[static_cast<std::size_t>(v)] = as_rational(field(n[i], "variance", where), where + ".variance");
  }
  for (VertexId v = 0; v < g.size(); ++v) {
    if (!seen[static_cast<std::size_t>(v)]) {
      throw ParamError("params.noise: no variance for '" + g.label(v) + "'");
    }
  }
  return p;
}

Json params_to_json(const TimeSeriesGraph& tsg, const SvarParams& p) {
  const ProcessGraph& g = tsg.graph();
  Json cross = Json::array(), autos = Json::array(), noise = Json::array();
  for (const auto& [k, c] : p.cross) {
    cross.push_back({{"from", g.label(k.edge.from)},
                     {"to", g.label(k.edge.to)},
                     {"lag", k.lag},
                     {"coeff", format_rational(c)}});
  }
  for (const auto& [k, c] : p.autos) {
    autos.push_back({{"vertex", g.label(k.vertex)}, {"lag", k.lag}, {"coeff", format_rational(c)}});
  }
  for (VertexId v = 0; v < g.size(); ++v) {
    noise.push_back({{"vertex", g.label(v)},
                     {"variance", format_rational(p.noise.at(static_cast<std::size_t>(v)))}});
  }
  return Json{{"cross", std::move(cross)}, {"auto", std::move(autos)}, {"noise", std::move(noise)}};
}

Json to_json(const SpectrumBundle& b) {
  return Json{{"H", to_json(b.h)}, {"S_I", to_json(b.s_i)}, {"S_LI", to_json(b.s_li)}, {"S", to_json(b.s)}};
}

Json edge_functions_to_json(const ProcessGraph& g, const EdgeFunctions& f) {
  Json out = Json::array();
  for (const auto& [e, h] : f) {
    out.push_back({{"from", g.label(e.from)}, {"to", g.label(e.to)}, {"h", to_json(h)}});
  }
  return out;
}

Json certificate_to_json(const ProcessGraph& g, const IdentificationCertificate& c) {
  Json steps = Json::array();
  for (const auto& st : c.steps) {
    Json aux = Json::array();
    const auto ws = g.labels_of(st.triple.w);
    for (std::size_t i = 0; i < st.auxiliary.size(); ++i) {
      aux.push_back({{"w", ws.at(i)}, {"f", to_json(st.auxiliary[i])}});
    }
    Json g_col = Json::array();
    for (const auto& x : st.system.g) g_col.push_back(to_json(x));
    steps.push_back({
        {"vertex", g.label(st.vertex)},
        {"method", st.method == StepMethod::regression ? "regression" : "lfhtc"},
        {"Y", labels_json(g, st.triple.y)},
        {"W", labels_json(g, st.triple.w)},
        {"L", labels_json(g, st.triple.lp)},
        {"system", {{"A", to_json(st.system.a)},
                    {"B", to_json(st.system.b)},
                    {"g", std::move(g_col)},
                    {"unknowns", st.system.unknowns}}},
        {"solved", edge_functions_to_json(g, st.solved)},
        {"auxiliary", std::move(aux)},
    });
  }
  Json unresolved = Json::array();
  for (const Edge& e : c.unresolved) unresolved.push_back({{"from", g.label(e.from)}, {"to", g.label(e.to)}});
  return Json{{"steps", std::move(steps)}, {"unresolved", std::move(unresolved)}};
}

IdentificationCertificate certificate_from_json(const ProcessGraph& g, const Json& j) {
  IdentificationCertificate c;
  const Json& steps = field(j, "steps", "certificate");
  if (!steps.is_array()) throw FormatError("certificate.steps: expected an array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string where = "certificate.steps[" + std::to_string(i) + "]";
    const Json& s = steps[i];
    CertificateStep st;
    st.vertex = g.id(as_string(field(s, "vertex", where), where + ".vertex"));
    st.triple.y = g.ids(string_list(field(s, "Y", where), where + ".Y"));
    st.triple.w = g.ids(string_list(field(s, "W", where), where + ".W"));
    st.triple.lp = g.ids(string_list(field(s, "L", where), where + ".L"));
    st.method = s.value("method", "lfhtc") == "regression" ? StepMethod::regression : StepMethod::lfhtc;
    if (s.contains("solved")) {
      for (const auto& e : s.at("solved")) {
        st.solved[{g.id(as_string(field(e, "from", where), where)),
                   g.id(as_string(field(e, "to", where), where))}] =
            ratfn_from_json(field(e, "h", where));
      }
    }
    c.steps.push_back(std::move(st));
  }
  if (j.contains("unresolved")) {
    for (const auto& e : j.at("unresolved")) {
      c.unresolved.push_back({g.id(as_string(field(e, "from", "unresolved"), "unresolved")),
                              g.id(as_string(field(e, "to", "unresolved"), "unresolved"))});
    }
  }
  return c;
}

Json cpdag_to_json(const std::vector<std::string>& labels, const Cpdag& c) {
  Json directed = Json::array(), undirected = Json::array();
  for (const Edge& e : c.directed) {
    directed.push_back({labels.at(static_cast<std::size_t>(e.from)), labels.at(static_cast<std::size_t>(e.to))});
  }
  for (const Edge& e : c.undirected) {
    undirected.push_back({labels.at(static_cast<std::size_t>(e.from)), labels.at(static_cast<std::size_t>(e.to))});
  }
  return Json{{"vertices", labels}, {"directed", directed}, {"undirected", undirected}, {"report", c.report}};
}

Json to_json(const SpectrumEstimate& e) {
  Json mats = Json::array();
  for (std::size_t f = 0; f < e.matrices.size(); ++f) {
    Json re = Json::array(), im = Json::array();
    for (Eigen::Index i = 0; i < e.matrices[f].rows(); ++i) {
      Json rr = Json::array(), ii = Json::array();
      for (Eigen::Index k = 0; k < e.matrices[f].cols(); ++k) {
        rr.push_back(e.matrices[f](i, k).real());
        ii.push_back(e.matrices[f](i, k).imag());
      }
      re.push_back(std::move(rr));
      im.push_back(std::move(ii));
    }
    mats.push_back({{"frequency", e.frequencies[f]}, {"re", std::move(re)}, {"im", std::move(im)}});
  }
  return Json{{"labels", e.labels},
              {"window", e.window},
              {"segments", e.segments},
              {"segment_length", e.segment_length},
              {"matrices", std::move(mats)}};
}

SeriesSample read_series(const std::string& path) {
  std::istringstream in(read_text_file(path));
  SeriesSample s;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("'" + path + "': empty series file");
  {
    std::istringstream header(line);
    std::string label;
    while (header >> label) s.labels.push_back(label);
  }
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::vector<double> vals;
    double x;
    while (row >> x) vals.push_back(x);
    if (vals.size() != s.labels.size()) {
      throw FormatError("'" + path + "' line " + std::to_string(lineno) + ": expected " +
                        std::to_string(s.labels.size()) + " values");
    }
    rows.push_back(std::move(vals));
  }
  s.length = rows.size();
  s.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(s.labels.size()));
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (std::size_t k = 0; k < s.labels.size(); ++k)
      s.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = rows[t][k];
  return s;
}

}  // namespace svarspec::io
