#include "svarspec/identify.hpp"

#include <algorithm>
#include <set>

#include "svarspec/errors.hpp"

namespace svarspec {

namespace {

const RatFn& known_link(const ProcessGraph& g, const EdgeFunctions& known, VertexId u, VertexId w) {
  auto it = known.find({u, w});
  if (it == known.end()) {
    throw IdentificationError("link function " + g.label(u) + " -> " + g.label(w) +
                              " is required but has not been identified");
  }
  return it->second;
}

}  // namespace

EdgeFunctions identify_regression(const ProcessGraph& g, const RatMatrix& s, VertexId v) {
  const auto pa = members(g.observed_parents(v));
  EdgeFunctions out;
  if (pa.empty()) return out;
  const std::size_t n = pa.size();
  RatMatrix a(n, n);
  std::vector<RatFn> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& y = g.label(pa[i]);
    for (std::size_t j = 0; j < n; ++j) a(i, j) = s.at(g.label(pa[j]), y);
    rhs[i] = s.at(g.label(v), y);
  }
  std::vector<RatFn> x;
  try {
    x = solve(a, rhs);
  } catch (const SingularMatrixError&) {
    throw SingularMatrixError("parent block of '" + g.label(v) + "' is singular");
  }
  for (std::size_t j = 0; j < n; ++j) out[{pa[j], v}] = x[j];
  return out;
}

RatFn identify_instrument(const RatMatrix& s, const std::string& u, const std::string& v,
                          const std::string& w) {
  const RatFn& den = s.at(v, u);
  if (den.is_zero()) {
    throw IdentificationError("instrument '" + u + "' is not correlated with '" + v +
                              "' (S_{" + v + "," + u + "} = 0)");
  }
  return s.at(w, u) / den;
}

IdentificationSystem lfhtc_system_matrices(const ProcessGraph& g, const RatMatrix& s, VertexId v,
                                           const LfhtcTriple& t, const EdgeFunctions& known) {
  const auto ys = members(t.y);
  const auto pa = members(g.observed_parents(v));
  const auto ws = members(t.w);
  const VertexSet reach = htr(g, t.w | bit(v), t.lp);
  auto S = [&](VertexId a, VertexId b) -> const RatFn& { return s.at(g.label(a), g.label(b)); };

  // [S (I - H*)]_{x,y}
  auto right_reduced = [&](VertexId x, VertexId y) {
    RatFn out = S(x, y);
    for (VertexId p : members(g.observed_parents(y))) out -= S(x, p) * known_link(g, known, p, y).conj();
    return out;
  };
  // [(I - H^T) S]_{w,y}
  auto left_reduced = [&](VertexId w, VertexId y) {
    RatFn out = S(w, y);
    for (VertexId p : members(g.observed_parents(w))) out -= known_link(g, known, p, w) * S(p, y);
    return out;
  };
  // [(I - H^T) S (I - H*)]_{w,y}
  auto both_reduced = [&](VertexId w, VertexId y) {
    RatFn out = right_reduced(w, y);
    for (VertexId p : members(g.observed_parents(w))) {
      out -= known_link(g, known, p, w) * right_reduced(p, y);
    }
    return out;
  };

  std::vector<std::string> rows, pa_labels, w_labels;
  for (VertexId y : ys) rows.push_back(g.label(y));
  for (VertexId u : pa) pa_labels.push_back(g.label(u));
  for (VertexId w : ws) w_labels.push_back(g.label(w));

  IdentificationSystem sys{RatMatrix(rows, pa_labels), RatMatrix(rows, w_labels), {}, pa_labels};
  sys.unknowns.insert(sys.unknowns.end(), w_labels.begin(), w_labels.end());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const VertexId y = ys[i];
    const bool reduced = contains(reach, y);
    for (std::size_t j = 0; j < pa.size(); ++j) {
      sys.a(i, j) = reduced ? right_reduced(pa[j], y) : S(pa[j], y);
    }
    for (std::size_t j = 0; j < ws.size(); ++j) {
      sys.b(i, j) = reduced ? both_reduced(ws[j], y) : left_reduced(ws[j], y);
    }
    sys.g.push_back(reduced ? right_reduced(v, y) : S(v, y));
  }
  return sys;
}

StepResult lfhtc_identify_step(const ProcessGraph& g, const RatMatrix& s, VertexId v,
                               const LfhtcTriple& t, const EdgeFunctions& known) {
  for (const Edge& e : lfhtc_prerequisites(g, v, t)) known_link(g, known, e.from, e.to);
  StepResult out{lfhtc_system_matrices(g, s, v, t, known), {}, {}};
  const auto pa = members(g.observed_parents(v));
  const std::size_t n = out.system.unknowns.size();
  if (out.system.g.size() != n) {
    throw IdentificationError("system for '" + g.label(v) + "' is not square");
  }
  if (n == 0) return out;
  RatMatrix m(out.system.a.row_labels(), out.system.unknowns);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < pa.size(); ++j) m(i, j) = out.system.a(i, j);
    for (std::size_t j = pa.size(); j < n; ++j) m(i, j) = out.system.b(i, j - pa.size());
  }
  std::vector<RatFn> x;
  try {
    x = solve(m, out.system.g);
  } catch (const SingularMatrixError&) {
    throw SingularMatrixError("identification system for '" + g.label(v) +
                              "' is singular (non-generic parameters)");
  }
  for (std::size_t j = 0; j < pa.size(); ++j) out.solved[{pa[j], v}] = x[j];
  out.auxiliary.assign(x.begin() + static_cast<std::ptrdiff_t>(pa.size()), x.end());
  return out;
}

EdgeFunctions IdentificationCertificate::all_solved() const {
  EdgeFunctions out;
  for (const auto& st : steps) out.insert(st.solved.begin(), st.solved.end());
  return out;
}

IdentificationCertificate identify_all(const ProcessGraph& g, const RatMatrix& s) {
  IdentificationCertificate cert;
  const LfhtcOrder order = lfhtc_order(g);
  EdgeFunctions known;
  for (const auto& [v, t] : order.steps) {
    StepResult r = lfhtc_identify_step(g, s, v, t, known);
    const bool regression = t.lp == 0 && t.w == 0 && t.y == g.observed_parents(v) &&
                            (t.y & htr(g, bit(v), 0)) == 0;
    known.insert(r.solved.begin(), r.solved.end());
    cert.steps.push_back({v, t, regression ? StepMethod::regression : StepMethod::lfhtc,
                          std::move(r.system), std::move(r.solved), std::move(r.auxiliary)});
  }
  for (VertexId v : members(order.unresolved))
    for (VertexId u : members(g.observed_parents(v))) cert.unresolved.push_back({u, v});
  return cert;
}

EdgeFunctions replay_certificate(const ProcessGraph& g, const RatMatrix& s,
                                 const IdentificationCertificate& cert) {
  EdgeFunctions known;
  for (const auto& st : cert.steps) {
    const LfhtcCheck check = lfhtc_check(g, st.vertex, st.triple);
    if (!check.ok) {
      throw IdentificationError("certificate step for '" + g.label(st.vertex) +
                                "' fails the criterion: " + check.reason);
    }
    StepResult r = lfhtc_identify_step(g, s, st.vertex, st.triple, known);
    known.insert(r.solved.begin(), r.solved.end());
  }
  return known;
}

SampledIdentification identify_sampled(const TimeSeriesGraph& tsg, std::uint64_t seed,
                                       int max_resamples) {
  SampledIdentification out;
  std::uint64_t current = seed;
  for (int attempt = 0; attempt <= max_resamples; ++attempt) {
    out.params = sample_stable_params(tsg, current);
    out.seed_used = current;
    try {
      out.certificate = identify_all(tsg.graph(), spectrum(tsg, out.params).s);
      return out;
    } catch (const SingularMatrixError& e) {
      out.warnings.push_back("seed " + std::to_string(current) + ": " + e.what() + "; resampling");
    }
    current = current * 6364136223846793005ULL + 1442695040888963407ULL;
  }
  throw SingularMatrixError("identification systems stayed singular after " +
                            std::to_string(max_resamples) + " resamples");
}

bool lag_pair_recoverable(const Poly& phi_vw, const Poly& phi_ww) {
  return resultant(phi_vw, Poly::constant(1) - phi_ww) != 0;
}

LagRecovery recover_lag_coefficients(const RatFn& h, const std::vector<int>* expected_cross,
                                     const std::vector<int>* expected_auto) {
  const Rational c0 = h.den().coeff(0);
  if (c0 == 0) {
    throw IdentificationError("denominator vanishes at z = 0; cannot normalize to 1 - phi(z)");
  }
  LagRecovery out;
  const Rational inv = 1 / c0;
  for (std::size_t k = 0; k < h.num().coeffs().size(); ++k) {
    if (h.num().coeffs()[k] != 0) out.cross[static_cast<int>(k)] = h.num().coeffs()[k] * inv;
  }
  for (std::size_t k = 1; k < h.den().coeffs().size(); ++k) {
    if (h.den().coeffs()[k] != 0) out.autos[static_cast<int>(k)] = -h.den().coeffs()[k] * inv;
  }
  auto check = [&out](const std::map<int, Rational>& got, const std::vector<int>* lags,
                      int degree, const char* what) {
    if (!lags) return;
    for (const auto& [k, c] : got) {
      if (std::find(lags->begin(), lags->end(), k) == lags->end()) {
        out.recoverable = false;
        out.note += std::string(what) + " coefficient at unexpected lag " + std::to_string(k) + "; ";
      }
    }
    const int want = lags->empty() ? 0 : *std::max_element(lags->begin(), lags->end());
    if (degree < want) {
      out.recoverable = false;
      out.note += std::string(what) + " degree " + std::to_string(degree) + " below expected lag " +
                  std::to_string(want) + " (common factor cancelled); ";
    }
  };
  check(out.cross, expected_cross, h.num().degree(), "cross");
  check(out.autos, expected_auto, h.den().degree(), "auto");
  return out;
}

// ---------------------------------------------------------------- CPDAG

namespace {

struct Pdag {
  int n;
  std::vector<VertexSet> adj;     // skeleton
  std::vector<VertexSet> arrow;   // arrow[a] bit b: a -> b oriented
  bool adjacent(int a, int b) const { return contains(adj[static_cast<std::size_t>(a)], b); }
  bool directed(int a, int b) const { return contains(arrow[static_cast<std::size_t>(a)], b); }
  bool undirected(int a, int b) const {
    return adjacent(a, b) && !directed(a, b) && !directed(b, a);
  }
  void orient(int a, int b) { arrow[static_cast<std::size_t>(a)] |= bit(b); }
};

void meek(Pdag& p) {
  for (bool changed = true; changed;) {
    changed = false;
    for (int a = 0; a < p.n; ++a) {
      for (int b = 0; b < p.n; ++b) {
        if (a == b || !p.undirected(a, b)) continue;
        bool orient = false;
        // R1: c -> a - b with c, b nonadjacent.
        for (int c = 0; c < p.n && !orient; ++c) {
          if (c != b && p.directed(c, a) && !p.adjacent(c, b)) orient = true;
        }
        // R2: a -> c -> b.
        for (int c = 0; c < p.n && !orient; ++c) {
          if (p.directed(a, c) && p.directed(c, b)) orient = true;
        }
        // R3: a - c -> b, a - d -> b, c and d nonadjacent.
        for (int c = 0; c < p.n && !orient; ++c) {
          if (!p.undirected(a, c) || !p.directed(c, b)) continue;
          for (int d = c + 1; d < p.n && !orient; ++d) {
            if (p.undirected(a, d) && p.directed(d, b) && !p.adjacent(c, d)) orient = true;
          }
        }
        if (orient) {
          p.orient(a, b);
          changed = true;
        }
      }
    }
  }
}

Cpdag to_cpdag(const Pdag& p, std::vector<std::string> report) {
  Cpdag out;
  out.n = p.n;
  out.report = std::move(report);
  for (int a = 0; a < p.n; ++a)
    for (int b = 0; b < p.n; ++b) {
      if (!p.adjacent(a, b)) continue;
      if (p.directed(a, b) && !p.directed(b, a)) out.directed.push_back({a, b});
      else if (a < b && (p.undirected(a, b) || (p.directed(a, b) && p.directed(b, a)))) {
        out.undirected.push_back({a, b});
      }
    }
  return out;
}

void orient_vstructure(Pdag& p, int a, int c, int b, std::vector<std::string>& report) {
  for (int from : {a, b}) {
    if (p.directed(c, from)) {
      report.push_back("conflicting orientation on edge " + std::to_string(from) + " - " +
                       std::to_string(c));
    }
    p.orient(from, c);
  }
}

}  // namespace

Cpdag discover_cpdag(const CiOracle& ci, int n) {
  Pdag p{n, std::vector<VertexSet>(static_cast<std::size_t>(n), 0),
         std::vector<VertexSet>(static_cast<std::size_t>(n), 0)};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b) p.adj[static_cast<std::size_t>(a)] |= bit(b);
  std::map<std::pair<int, int>, VertexSet> sepset;

  for (int k = 0;; ++k) {
    bool any = false;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (a == b || !p.adjacent(a, b)) continue;
        const VertexSet others = p.adj[static_cast<std::size_t>(a)] & ~bit(b);
        if (count(others) < k) continue;
        any = true;
        const auto pool = members(others);
        // Enumerate k-subsets of pool.
        std::vector<int> idx(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
        const int m = static_cast<int>(pool.size());
        for (;;) {
          VertexSet z = 0;
          for (int i : idx) z |= bit(pool[static_cast<std::size_t>(i)]);
          if (ci(bit(a), bit(b), z)) {
            p.adj[static_cast<std::size_t>(a)] &= ~bit(b);
            p.adj[static_cast<std::size_t>(b)] &= ~bit(a);
            sepset[{std::min(a, b), std::max(a, b)}] = z;
            break;
          }
          int i = k - 1;
          while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - k + i) --i;
          if (i < 0) break;
          ++idx[static_cast<std::size_t>(i)];
          for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
      }
    }
    if (!any) break;
  }

  std::vector<std::string> report;
  for (int c = 0; c < n; ++c) {
    const auto nb = members(p.adj[static_cast<std::size_t>(c)]);
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        const int a = nb[i], b = nb[j];
        if (p.adjacent(a, b)) continue;
        auto it = sepset.find({std::min(a, b), std::max(a, b)});
        if (it != sepset.end() && !contains(it->second, c)) orient_vstructure(p, a, c, b, report);
      }
  }
  meek(p);
  return to_cpdag(p, std::move(report));
}

Cpdag dag_to_cpdag(const ProcessGraph& g) {
  g.require_acyclic("CPDAG construction");
  const int n = g.size();
  Pdag p{n, std::vector<VertexSet>(static_cast<std::size_t>(n), 0),
         std::vector<VertexSet>(static_cast<std::size_t>(n), 0)};
  for (const Edge& e : g.edges()) {
    p.adj[static_cast<std::size_t>(e.from)] |= bit(e.to);
    p.adj[static_cast<std::size_t>(e.to)] |= bit(e.from);
  }
  std::vector<std::string> report;
  for (VertexId c = 0; c < n; ++c) {
    const auto pa = members(g.parents(c));
    for (std::size_t i = 0; i < pa.size(); ++i)
      for (std::size_t j = i + 1; j < pa.size(); ++j)
        if (!p.adjacent(pa[i], pa[j])) orient_vstructure(p, pa[i], c, pa[j], report);
  }
  meek(p);
  return to_cpdag(p, std::move(report));
}

CiOracle spectral_ci_oracle(const ProcessGraph& g, const RatMatrix& s) {
  const auto obs = members(g.observed());
  auto labels = [&g, obs](VertexSet set) {
    std::vector<std::string> out;
    for (VertexId i : members(set)) out.push_back(g.label(obs.at(static_cast<std::size_t>(i))));
    return out;
  };
  return [labels, &s](VertexSet x, VertexSet y, VertexSet z) {
    return conditional_spectrum(s, labels(x), labels(y), labels(z)).is_zero();
  };
}

}  // namespace svarspec
