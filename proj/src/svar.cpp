#include "svarspec/svar.hpp"

#include <algorithm>
#include <random>

#include "svarspec/errors.hpp"

namespace svarspec {

namespace {

Rational abs_sum_autos(const SvarParams& p, VertexId v) {
  Rational s = 0;
  for (const auto& [key, c] : p.autos)
    if (key.vertex == v) s += abs(c);
  return s;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// (I - H)^{-1} restricted to `within`, labels in id order. Uses a
// topological recursion when possible and exact inversion otherwise.
RatMatrix path_sums(const ProcessGraph& g, const RatMatrix& h, VertexSet within) {
  const auto vs = members(within);
  std::vector<std::string> labels;
  for (VertexId v : vs) labels.push_back(g.label(v));
  const std::size_t n = vs.size();
  std::vector<std::size_t> pos(static_cast<std::size_t>(g.size()), n);
  for (std::size_t i = 0; i < n; ++i) pos[static_cast<std::size_t>(vs[i])] = i;

  // Topological order of the induced subgraph.
  std::vector<VertexId> order;
  VertexSet done = 0;
  for (bool moved = true; moved;) {
    moved = false;
    for (VertexId v : vs) {
      if (contains(done, v) || (g.parents(v) & within & ~done)) continue;
      order.push_back(v);
      done |= bit(v);
      moved = true;
    }
  }
  if (order.size() < n) {
    RatMatrix a(labels, labels);
    for (std::size_t i = 0; i < n; ++i) {
      a(i, i) = RatFn(1);
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) a(i, j) = -h(static_cast<std::size_t>(vs[i]), static_cast<std::size_t>(vs[j]));
      }
    }
    return inverse(a);
  }
  RatMatrix out(labels, labels);
  for (std::size_t i = 0; i < n; ++i) {
    out(i, i) = RatFn(1);
    for (VertexId w : order) {
      const std::size_t j = pos[static_cast<std::size_t>(w)];
      if (j == i) continue;
      std::vector<RatFn> terms;
      for (VertexId x : members(g.parents(w) & within)) {
        const RatFn& gx = out(i, pos[static_cast<std::size_t>(x)]);
        if (!gx.is_zero()) terms.push_back(gx * h(static_cast<std::size_t>(x), static_cast<std::size_t>(w)));
      }
      out(i, j) = sum(terms);
    }
  }
  return out;
}

// G^T D G* where D is arbitrary and G square over the same labels. Only the
// upper triangle is computed; the rest follows from Hermitian symmetry.
RatMatrix congruence(const RatMatrix& g, const RatMatrix& d) {
  const std::size_t n = g.rows();
  RatMatrix gt_d(g.col_labels(), d.col_labels());
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t b = 0; b < n; ++b) {
      std::vector<RatFn> terms;
      for (std::size_t a = 0; a < n; ++a) {
        if (g(a, v).is_zero() || d(a, b).is_zero()) continue;
        terms.push_back(g(a, v) * d(a, b));
      }
      gt_d(v, b) = sum(terms);
    }
  std::vector<RatFn> gconj;
  gconj.reserve(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) gconj.push_back(g(a, b).conj());
  RatMatrix out(g.col_labels(), g.col_labels());
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t w = v; w < n; ++w) {
      std::vector<RatFn> terms;
      for (std::size_t b = 0; b < n; ++b) {
        if (gt_d(v, b).is_zero() || gconj[b * n + w].is_zero()) continue;
        terms.push_back(gt_d(v, b) * gconj[b * n + w]);
      }
      RatFn acc = sum(terms);
      if (w != v) out(w, v) = acc.conj();
      out(v, w) = std::move(acc);
    }
  return out;
}

}  // namespace

std::vector<std::string> observed_labels(const ProcessGraph& g) { return g.labels_of(g.observed()); }

void validate_params(const TimeSeriesGraph& tsg, const SvarParams& params) {
  const ProcessGraph& g = tsg.graph();
  auto edge_name = [&g](Edge e) { return g.label(e.from) + " -> " + g.label(e.to); };
  std::size_t expected_cross = 0;
  for (const auto& [e, lags] : tsg.all_cross_lags()) {
    for (int k : lags) {
      if (!params.cross.count({e, k})) {
        throw ParamError("missing coefficient for " + edge_name(e) + " at lag " + std::to_string(k));
      }
    }
    expected_cross += lags.size();
  }
  if (params.cross.size() != expected_cross) {
    for (const auto& [key, c] : params.cross) {
      const bool known = key.edge.from >= 0 && key.edge.to >= 0 && key.edge.from < g.size() &&
                         key.edge.to < g.size() && g.has_edge(key.edge.from, key.edge.to);
      const auto& lags = known ? tsg.cross_lags(key.edge) : std::vector<int>{};
      if (!known || std::find(lags.begin(), lags.end(), key.lag) == lags.end()) {
        throw ParamError("coefficient given for a lag the time series graph does not have (lag " +
                         std::to_string(key.lag) + ")");
      }
    }
  }
  std::size_t expected_auto = 0;
  for (const auto& [v, lags] : tsg.all_auto_lags()) {
    for (int k : lags) {
      if (!params.autos.count({v, k})) {
        throw ParamError("missing auto coefficient for '" + g.label(v) + "' at lag " + std::to_string(k));
      }
    }
    expected_auto += lags.size();
  }
  if (params.autos.size() != expected_auto) {
    throw ParamError("auto coefficient given for a lag the time series graph does not have");
  }
  if (params.noise.size() != static_cast<std::size_t>(g.size())) {
    throw ParamError("need one noise variance per vertex");
  }
  for (VertexId v = 0; v < g.size(); ++v) {
    if (params.noise[static_cast<std::size_t>(v)] <= 0) {
      throw ParamError("noise variance of '" + g.label(v) + "' must be positive");
    }
    const Rational s = abs_sum_autos(params, v);
    if (s >= 1) {
      throw ParamError("stability: sum_k |phi_{" + g.label(v) + "," + g.label(v) + "}(k)| = " +
                       s.get_str() + " is not < 1");
    }
  }
  if (!g.observed_acyclic()) {
    Rational s = 0;
    for (const auto& [key, c] : params.cross) {
      if (!g.is_latent(key.edge.from) && !g.is_latent(key.edge.to)) s += abs(c);
    }
    if (s >= 1) {
      throw ParamError("stability: observed graph is cyclic and sum |phi_{v,w}(k)| over observed "
                       "edges = " + s.get_str() + " is not < 1");
    }
  }
}

Poly lag_poly(const TimeSeriesGraph& tsg, const SvarParams& params, VertexId x, VertexId y) {
  std::vector<Rational> c(static_cast<std::size_t>(tsg.order()) + 1);
  if (x == y) {
    for (int k : tsg.auto_lags(x)) c[static_cast<std::size_t>(k)] = params.autos.at({x, k});
    return Poly(std::move(c));
  }
  const Edge e{x, y};
  if (!tsg.graph().has_edge(x, y)) {
    throw GraphError("no edge " + tsg.graph().label(x) + " -> " + tsg.graph().label(y));
  }
  for (int k : tsg.cross_lags(e)) {
    auto it = params.cross.find({e, k});
    if (it == params.cross.end()) throw ParamError("missing coefficient");
    c[static_cast<std::size_t>(k)] = it->second;
  }
  return Poly(std::move(c));
}

RatMatrix transfer_matrix(const TimeSeriesGraph& tsg, const SvarParams& params) {
  const ProcessGraph& g = tsg.graph();
  RatMatrix h(g.labels(), g.labels());
  std::vector<Poly> one_minus(static_cast<std::size_t>(g.size()));
  for (VertexId v = 0; v < g.size(); ++v) {
    one_minus[static_cast<std::size_t>(v)] = Poly::constant(1) - lag_poly(tsg, params, v, v);
  }
  for (const Edge& e : g.edges()) {
    h(static_cast<std::size_t>(e.from), static_cast<std::size_t>(e.to)) =
        RatFn(lag_poly(tsg, params, e.from, e.to), one_minus[static_cast<std::size_t>(e.to)]);
  }
  return h;
}

RatMatrix internal_spectrum(const TimeSeriesGraph& tsg, const SvarParams& params) {
  const ProcessGraph& g = tsg.graph();
  RatMatrix s(g.labels(), g.labels());
  for (VertexId v = 0; v < g.size(); ++v) {
    const RatFn a(Poly::constant(1), Poly::constant(1) - lag_poly(tsg, params, v, v));
    s(static_cast<std::size_t>(v), static_cast<std::size_t>(v)) =
        RatFn(params.noise.at(static_cast<std::size_t>(v))) * a * a.conj();
  }
  return s;
}

namespace {

RatMatrix projected_from(const ProcessGraph& g, const RatMatrix& h, const RatMatrix& s_i) {
  const auto obs = members(g.observed());
  RatMatrix out(observed_labels(g), observed_labels(g));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto v = static_cast<std::size_t>(obs[i]);
    out(i, i) = s_i(v, v);
    for (std::size_t j = i; j < obs.size(); ++j) {
      const auto w = static_cast<std::size_t>(obs[j]);
      RatFn acc;
      for (VertexId l : members(g.latent_parents(obs[i]) & g.latent_parents(obs[j]))) {
        const auto li = static_cast<std::size_t>(l);
        acc += h(li, v) * s_i(li, li) * h(li, w).conj();
      }
      if (i == j) {
        out(i, i) += acc;
      } else {
        out(j, i) = acc.conj();
        out(i, j) = std::move(acc);
      }
    }
  }
  return out;
}

}  // namespace

RatMatrix projected_internal_spectrum(const TimeSeriesGraph& tsg, const SvarParams& params) {
  return projected_from(tsg.graph(), transfer_matrix(tsg, params), internal_spectrum(tsg, params));
}

SpectrumBundle spectrum(const TimeSeriesGraph& tsg, const SvarParams& params) {
  validate_params(tsg, params);
  const ProcessGraph& g = tsg.graph();
  SpectrumBundle b;
  b.h = transfer_matrix(tsg, params);
  b.s_i = internal_spectrum(tsg, params);
  b.s_li = projected_from(g, b.h, b.s_i);
  const RatMatrix g_o = path_sums(g, b.h, g.observed());
  b.s = congruence(g_o, b.s_li);
  return b;
}

RatMatrix total_effects(const TimeSeriesGraph& tsg, const SvarParams& params) {
  return path_sums(tsg.graph(), transfer_matrix(tsg, params), tsg.graph().all());
}

RatMatrix full_spectrum(const TimeSeriesGraph& tsg, const SvarParams& params) {
  const ProcessGraph& g = tsg.graph();
  const RatMatrix h = transfer_matrix(tsg, params);
  return congruence(path_sums(g, h, g.all()), internal_spectrum(tsg, params));
}

RatFn path_function(const TimeSeriesGraph& tsg, const SvarParams& params, const Path& p) {
  RatFn out(1);
  for (std::size_t i = 1; i < p.size(); ++i) {
    const Poly one_minus = Poly::constant(1) - lag_poly(tsg, params, p[i], p[i]);
    out *= RatFn(lag_poly(tsg, params, p[i - 1], p[i]), one_minus);
  }
  return out;
}

RatFn trek_function(const TimeSeriesGraph& tsg, const SvarParams& params, const Trek& t) {
  const VertexId top = t.top;
  const RatFn a(Poly::constant(1), Poly::constant(1) - lag_poly(tsg, params, top, top));
  const RatFn s_top = RatFn(params.noise.at(static_cast<std::size_t>(top))) * a * a.conj();
  return path_function(tsg, params, t.left) * s_top * path_function(tsg, params, t.right).conj();
}

RatMatrix spectrum_trek(const TimeSeriesGraph& tsg, const SvarParams& params) {
  const ProcessGraph& g = tsg.graph();
  g.require_acyclic("the trek rule");
  const auto obs = members(g.observed());
  RatMatrix out(observed_labels(g), observed_labels(g));
  for (std::size_t i = 0; i < obs.size(); ++i)
    for (std::size_t j = 0; j < obs.size(); ++j) {
      std::vector<RatFn> terms;
      for (const Trek& t : enumerate_treks(g, obs[i], obs[j])) terms.push_back(trek_function(tsg, params, t));
      out(i, j) = sum(terms);
    }
  return out;
}

RatMatrix conditional_spectrum(const RatMatrix& s, const std::vector<std::string>& x,
                               const std::vector<std::string>& y,
                               const std::vector<std::string>& z) {
  RatMatrix sxy = submatrix(s, x, y);
  if (z.empty()) return sxy;
  const RatMatrix szz = submatrix(s, z, z);
  const RatMatrix szy = submatrix(s, z, y);
  const RatMatrix sxz = submatrix(s, x, z);
  RatMatrix sol;
  try {
    sol = solve(szz, szy);
  } catch (const SingularMatrixError&) {
    throw SingularMatrixError("conditioning block S_{Z,Z} is singular");
  }
  return subtract(sxy, multiply(sxz, sol));
}

RatFn det_path_expansion(const TimeSeriesGraph& tsg, const SvarParams& params,
                         const std::vector<VertexId>& x, const std::vector<VertexId>& y) {
  std::vector<RatFn> terms;
  for (const PathSystem& ps : nonintersecting_path_systems(tsg.graph(), x, y)) {
    RatFn term(ps.sign);
    for (const Path& p : ps.paths) term *= path_function(tsg, params, p);
    terms.push_back(std::move(term));
  }
  return sum(terms);
}

RatFn trek_system_function(const TimeSeriesGraph& tsg, const SvarParams& params,
                           const TrekSystem& t) {
  RatFn term(t.sign);
  for (const Trek& tr : t.treks) term *= trek_function(tsg, params, tr);
  return term;
}

RatFn det_trek_expansion(const TimeSeriesGraph& tsg, const SvarParams& params,
                         const std::vector<VertexId>& x, const std::vector<VertexId>& y) {
  std::vector<RatFn> terms;
  for (const TrekSystem& ts : sided_nonintersecting_trek_systems(tsg.graph(), x, y)) {
    terms.push_back(trek_system_function(tsg, params, ts));
  }
  return sum(terms);
}

SvarParams sample_stable_params(const TimeSeriesGraph& tsg, std::uint64_t seed,
                                const Rational& magnitude_bound) {
  const ProcessGraph& g = tsg.graph();
  std::mt19937_64 rng(seed);
  auto raw = [&rng]() {
    std::uniform_int_distribution<int> den(1, 64);
    const int q = den(rng);
    std::uniform_int_distribution<int> num(-q, q - 1);
    int p = num(rng);
    if (p >= 0) ++p;  // skip zero
    Rational r(p, q);
    r.canonicalize();
    return r;
  };
  SvarParams out;
  Rational cross_scale = magnitude_bound;
  if (!g.observed_acyclic()) {
    int n = 0;
    for (const auto& [e, lags] : tsg.all_cross_lags()) {
      if (!g.is_latent(e.from)) n += static_cast<int>(lags.size());
    }
    if (n > 0) cross_scale = std::min(cross_scale, Rational(9, 10 * n));
  }
  for (const auto& [e, lags] : tsg.all_cross_lags()) {
    const Rational scale = g.is_latent(e.from) ? magnitude_bound : cross_scale;
    for (int k : lags) out.cross[{e, k}] = raw() * scale;
  }
  for (const auto& [v, lags] : tsg.all_auto_lags()) {
    const Rational scale(9, 10 * static_cast<int>(lags.size()));
    for (int k : lags) out.autos[{v, k}] = raw() * scale;
  }
  out.noise.resize(static_cast<std::size_t>(g.size()));
  for (auto& w : out.noise) {
    std::uniform_int_distribution<int> den(1, 16);
    const int q = den(rng);
    std::uniform_int_distribution<int> num(1, 4 * q);
    w = Rational(num(rng), q);
    w.canonicalize();
  }
  return out;
}

int generic_rank(const TimeSeriesGraph& tsg, VertexSet x, VertexSet y, int trials,
                 std::uint64_t seed) {
  const ProcessGraph& g = tsg.graph();
  if (x == 0 || y == 0) return 0;
  const auto xs = g.labels_of(x);
  const auto ys = g.labels_of(y);
  int best = 0;
  for (int t = 0; t < std::max(trials, 1); ++t) {
    const SvarParams p = sample_stable_params(tsg, splitmix(seed + static_cast<std::uint64_t>(t)));
    const RatMatrix s = spectrum(tsg, p).s;
    best = std::max(best, rank(submatrix(s, xs, ys)));
  }
  return best;
}

TimeSeriesGraph restrict_edges(const TimeSeriesGraph& tsg, const std::vector<Edge>& keep) {
  std::map<Edge, std::vector<int>> cross;
  for (const Edge& e : keep) cross[e] = tsg.cross_lags(e);
  return TimeSeriesGraph(tsg.graph().with_edges(keep), std::move(cross), tsg.all_auto_lags());
}

SvarParams restrict_params(const TimeSeriesGraph& restricted, const SvarParams& params) {
  SvarParams out;
  for (const auto& [key, c] : params.cross) {
    if (restricted.graph().has_edge(key.edge.from, key.edge.to)) out.cross[key] = c;
  }
  out.autos = params.autos;
  out.noise = params.noise;
  return out;
}

}  // namespace svarspec
