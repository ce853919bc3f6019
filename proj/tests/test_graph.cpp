#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <functional>
#include <numeric>

#include "support.hpp"
#include "svarspec/errors.hpp"
#include "svarspec/graph.hpp"
#include "svarspec/io.hpp"

using namespace svarspec;
using testsupport::path_counts;
using testsupport::random_dag;

namespace {

ProcessGraph latent_chain() {
  return io::graph_from_json(io::read_json_file(SVARSPEC_TEST_DATA "/latent_chain_graph.json")).graph();
}

// Directed paths by depth-first search.
std::vector<Path> dfs_paths(const ProcessGraph& g, VertexId x, VertexId y) {
  std::vector<Path> out;
  Path cur{x};
  std::function<void(VertexId)> go = [&](VertexId v) {
    if (v == y) out.push_back(cur);
    for (const Edge& e : g.edges()) {
      if (e.from != v) continue;
      cur.push_back(e.to);
      go(e.to);
      cur.pop_back();
    }
  };
  go(x);
  return out;
}

VertexSet path_set(const Path& p) {
  VertexSet s = 0;
  for (VertexId v : p) s |= bit(v);
  return s;
}

// Does every trek between X and Y hit zx on its X side or zy on its Y side?
bool brute_t_separates(const ProcessGraph& g, VertexSet x, VertexSet y, VertexSet zx, VertexSet zy) {
  for (VertexId top = 0; top < g.size(); ++top)
    for (VertexId a : members(x))
      for (const Path& left : dfs_paths(g, top, a)) {
        if (path_set(left) & zx) continue;
        for (VertexId b : members(y))
          for (const Path& right : dfs_paths(g, top, b))
            if (!(path_set(right) & zy)) return false;
      }
  return true;
}

// d-separation by enumerating simple paths of the skeleton.
bool brute_d_separated(const ProcessGraph& g, VertexSet x, VertexSet y, VertexSet z) {
  const auto counts = path_counts(g);
  auto has_desc_in_z = [&](VertexId m) {
    for (VertexId d : members(z))
      if (counts[static_cast<std::size_t>(m)][static_cast<std::size_t>(d)] > 0) return true;
    return false;
  };
  std::vector<VertexId> cur;
  std::function<bool(VertexId, VertexSet)> active_from = [&](VertexId v, VertexSet seen) {
    if (contains(y, v)) {
      bool open = true;
      for (std::size_t i = 1; i + 1 < cur.size(); ++i) {
        const VertexId a = cur[i - 1], m = cur[i], b = cur[i + 1];
        const bool collider = g.has_edge(a, m) && g.has_edge(b, m);
        if (collider ? !has_desc_in_z(m) : contains(z, m)) open = false;
      }
      if (open) return true;
    }
    for (VertexId w = 0; w < g.size(); ++w) {
      if (contains(seen, w) || !(g.has_edge(v, w) || g.has_edge(w, v))) continue;
      cur.push_back(w);
      const bool found = active_from(w, seen | bit(w));
      cur.pop_back();
      if (found) return true;
    }
    return false;
  };
  for (VertexId a : members(x)) {
    cur = {a};
    if (active_from(a, bit(a))) return false;
  }
  return true;
}

int perm_sign(const std::vector<std::size_t>& p) {
  int inv = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) inv += p[i] > p[j];
  return inv % 2 ? -1 : 1;
}

// Counts vertex-disjoint path systems and their signed sum by brute force.
std::pair<long, long> brute_path_systems(const ProcessGraph& g, const std::vector<VertexId>& x,
                                         const std::vector<VertexId>& y) {
  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  long count = 0, signed_sum = 0;
  do {
    std::vector<std::vector<Path>> choices;
    for (std::size_t i = 0; i < x.size(); ++i) choices.push_back(dfs_paths(g, x[i], y[perm[i]]));
    std::function<void(std::size_t, VertexSet)> go = [&](std::size_t i, VertexSet used) {
      if (i == x.size()) {
        ++count;
        signed_sum += perm_sign(perm);
        return;
      }
      for (const Path& p : choices[i])
        if (!(path_set(p) & used)) go(i + 1, used | path_set(p));
    };
    go(0, 0);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {count, signed_sum};
}

std::vector<VertexId> random_subset(std::mt19937_64& rng, VertexSet pool, int k) {
  std::vector<VertexId> m = members(pool);
  std::shuffle(m.begin(), m.end(), rng);
  m.resize(static_cast<std::size_t>(std::min<int>(k, static_cast<int>(m.size()))));
  return m;
}

}  // namespace

TEST_CASE("construction and validation") {
  const ProcessGraph g({"b", "a"}, {"l"}, {{"a", "b"}, {"l", "a"}});
  CHECK(g.labels() == std::vector<std::string>{"a", "b", "l"});
  CHECK(g.is_latent(g.id("l")));
  CHECK(g.parents(g.id("a")) == bit(g.id("l")));
  CHECK_THROWS_AS(ProcessGraph({"a", "a"}, {}, {}), GraphError);
  CHECK_THROWS_AS(ProcessGraph({"a"}, {}, {{"a", "a"}}), GraphError);
  CHECK_THROWS_AS(ProcessGraph({"a"}, {"l"}, {{"a", "l"}}), GraphError);
  CHECK_THROWS_AS(ProcessGraph({"a", "b"}, {}, {{"a", "c"}}), GraphError);
  CHECK_THROWS_AS(g.id("zz"), LabelError);

  const ProcessGraph cyc({"a", "b"}, {}, {{"a", "b"}, {"b", "a"}});
  CHECK_FALSE(cyc.acyclic());
  CHECK_THROWS_AS(cyc.topological_order(), CyclicGraphError);
  const TimeSeriesGraph tsg(cyc, {{{0, 1}, {1}}, {{1, 0}, {0}}}, {});
  CHECK(tsg.contemporaneous_acyclic());
  CHECK_FALSE(TimeSeriesGraph(cyc, {{{0, 1}, {0}}, {{1, 0}, {0}}}, {}).contemporaneous_acyclic());
}

TEST_CASE("time series graph validation") {
  const ProcessGraph g({"a", "b"}, {}, {{"a", "b"}});
  CHECK_THROWS_AS(TimeSeriesGraph(g, {{{0, 1}, {-1}}}, {}), GraphError);
  CHECK_THROWS_AS(TimeSeriesGraph(g, {{{0, 1}, {}}}, {}), GraphError);
  CHECK_THROWS_AS(TimeSeriesGraph(g, {}, {}), GraphError);
  CHECK_THROWS_AS(TimeSeriesGraph(g, {{{0, 1}, {0}}}, {{0, {0}}}), GraphError);
  CHECK_THROWS_AS(TimeSeriesGraph(g, {{{0, 1}, {1, 1}}}, {}), GraphError);
  const TimeSeriesGraph t(g, {{{0, 1}, {0, 2}}}, {{1, {1, 3}}});
  CHECK(t.order() == 3);
  CHECK(TimeSeriesGraph::full_order(g, 2).auto_lags(0) == std::vector<int>{1, 2});
  CHECK_THROWS_AS(io::graph_from_json(io::read_json_file(SVARSPEC_TEST_DATA "/invalid_negative_lag.json")),
                  GraphError);
  CHECK_THROWS_AS(io::graph_from_json(io::read_json_file(SVARSPEC_TEST_DATA "/invalid_latent_target.json")),
                  GraphError);
}

TEST_CASE("path and trek counts agree with adjacency powers") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 40; ++trial) {
    const ProcessGraph g = random_dag(rng, 5, 0.5, trial % 2);
    const auto counts = path_counts(g);
    for (VertexId a = 0; a < g.size(); ++a)
      for (VertexId b = 0; b < g.size(); ++b) {
        const auto paths = enumerate_paths(g, a, b);
        CHECK(static_cast<long>(paths.size()) == counts[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
        long treks = 0;
        for (VertexId t = 0; t < g.size(); ++t)
          treks += counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)] *
                   counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)];
        const auto found = enumerate_treks(g, a, b);
        CHECK(static_cast<long>(found.size()) == treks);
        for (const Trek& tr : found) {
          CHECK(tr.source() == a);
          CHECK(tr.target() == b);
        }
      }
  }
}

TEST_CASE("formatting") {
  const ProcessGraph g = latent_chain();
  const auto treks = enumerate_treks(g, g.id("v1"), g.id("v2"));
  REQUIRE(treks.size() == 1);
  CHECK(format_trek(g, treks[0]) == "v1 <- l -> v2");
  CHECK(format_path(g, {g.id("v2"), g.id("v3")}) == "v2 -> v3");
  CHECK(permutation_sign({1, 0, 2}) == -1);
  CHECK(permutation_sign({1, 2, 0}) == 1);
}

TEST_CASE("non-intersecting path systems match brute force") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const ProcessGraph g = random_dag(rng, 6, 0.5);
    const int k = 1 + trial % 3;
    const auto x = random_subset(rng, g.all(), k);
    const auto y = random_subset(rng, g.all(), k);
    const auto systems = nonintersecting_path_systems(g, x, y);
    long signed_sum = 0;
    for (const auto& s : systems) signed_sum += s.sign;
    const auto [count, expected] = brute_path_systems(g, x, y);
    CHECK(static_cast<long>(systems.size()) == count);
    CHECK(signed_sum == expected);
  }
  const ProcessGraph g = random_dag(rng, 3, 0.5);
  CHECK_THROWS_AS(nonintersecting_path_systems(g, {0, 1}, {2}), DimensionError);
}

TEST_CASE("sided non-intersecting trek systems are sided disjoint") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const ProcessGraph g = random_dag(rng, 4, 0.5, 1);
    const auto x = random_subset(rng, g.observed(), 2);
    const auto y = random_subset(rng, g.observed(), 2);
    for (const auto& sys : sided_nonintersecting_trek_systems(g, x, y)) {
      VertexSet left = 0, right = 0;
      for (std::size_t i = 0; i < sys.treks.size(); ++i) {
        const Trek& t = sys.treks[i];
        CHECK(t.source() == x[i]);
        CHECK((path_set(t.left) & left) == 0);
        CHECK((path_set(t.right) & right) == 0);
        left |= path_set(t.left);
        right |= path_set(t.right);
      }
    }
  }
}

TEST_CASE("d-separation matches path blocking") {
  std::mt19937_64 rng(6);
  CHECK_THROWS_AS(d_separated(random_dag(rng, 3, 0.5), 1, 1, 0), GraphError);
  for (int trial = 0; trial < 40; ++trial) {
    const ProcessGraph g = random_dag(rng, 5, 0.45);
    for (VertexId a = 0; a < g.size(); ++a)
      for (VertexId b = a + 1; b < g.size(); ++b) {
        const VertexSet rest = g.all() & ~bit(a) & ~bit(b);
        for (VertexSet z = rest;; z = (z - 1) & rest) {
          CHECK(d_separated(g, bit(a), bit(b), z) == brute_d_separated(g, bit(a), bit(b), z));
          if (z == 0) break;
        }
      }
  }
}

TEST_CASE("minimal t-separation matches exhaustive search") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 25; ++trial) {
    const ProcessGraph g = random_dag(rng, 4, 0.5, 1);
    const VertexSet x = set_of(random_subset(rng, g.observed(), 1 + trial % 2));
    const VertexSet y = set_of(random_subset(rng, g.observed(), 2));
    int best = 64;
    for (VertexSet zx = 0; zx <= g.all(); ++zx)
      for (VertexSet zy = 0; zy <= g.all(); ++zy)
        if (count(zx) + count(zy) < best && brute_t_separates(g, x, y, zx, zy)) best = count(zx) + count(zy);
    const TSeparation t = t_separation_min(g, x, y);
    CHECK(t.size == best);
    CHECK(count(t.zx) + count(t.zy) == t.size);
    CHECK(t_separates(g, x, y, t.zx, t.zy));
    CHECK(brute_t_separates(g, x, y, t.zx, t.zy));
  }
}

TEST_CASE("half-trek reachability") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const ProcessGraph g = random_dag(rng, 5, 0.4, 2);
    for (VertexId x : members(g.observed())) {
      for (VertexSet lp = 0;; lp = (lp - g.latent()) & g.latent()) {
        VertexSet expected = 0;
        for (VertexId t : members(g.observed())) {
          if (t == x) continue;
          for (const Trek& h : latent_factor_halftreks(g, x, t))
            if (!contains(lp, h.top)) expected |= bit(t);
        }
        CHECK(htr(g, bit(x), lp) == expected);
        if (lp == g.latent()) break;
      }
    }
  }
}

TEST_CASE("latent-factor half-treks have the required shape") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 30; ++trial) {
    const ProcessGraph g = random_dag(rng, 4, 0.5, 1);
    for (VertexId a : members(g.observed()))
      for (VertexId b : members(g.observed())) {
        std::size_t expected = 0;
        for (const Trek& t : enumerate_treks(g, a, b)) {
          const bool directed = t.top == a && t.left.size() == 1;
          // The factor's first observed child must differ from the source.
          const bool factor = g.is_latent(t.top) && t.left.size() == 2 && t.right[1] != a;
          if (directed || factor) ++expected;
        }
        CHECK(latent_factor_halftreks(g, a, b).size() == expected);
      }
  }
}

TEST_CASE("LF-HTC on the five-vertex latent factor example") {
  const ProcessGraph g = latent_chain();
  const auto v = [&](const char* s) { return g.id(s); };
  const LfhtcTriple for_v4{bit(v("v2")) | bit(v("v3")), bit(v("v1")), bit(v("l"))};
  const LfhtcTriple for_v3{bit(v("v2")) | bit(v("v1")), bit(v("v4")), bit(v("l"))};
  CHECK(lfhtc_check(g, v("v4"), for_v4).ok);
  CHECK(lfhtc_check(g, v("v3"), for_v3).ok);
  CHECK(lfhtc_prerequisites(g, v("v3"), for_v3) == EdgeSet{{v("v3"), v("v4")}});
  CHECK(lfhtc_prerequisites(g, v("v4"), for_v4).empty());

  const LfhtcCheck small = lfhtc_check(g, v("v4"), {bit(v("v2")), bit(v("v1")), bit(v("l"))});
  CHECK_FALSE(small.ok);
  CHECK(small.failure == LfhtcFailure::cardinality);
  CHECK_THROWS_AS(lfhtc_check(g, v("v4"), {bit(v("v4")) | bit(v("v3")), bit(v("v1")), bit(v("l"))}),
                  GraphError);
  CHECK_THROWS_AS(lfhtc_check(g, v("v4"), {bit(v("v2")) | bit(v("v3")), bit(v("v1")), bit(v("v5"))}),
                  GraphError);

  const LfhtcOrder order = lfhtc_order(g);
  CHECK(order.complete());
  std::map<VertexId, LfhtcTriple> found;
  std::map<VertexId, std::size_t> position;
  for (std::size_t i = 0; i < order.steps.size(); ++i) {
    found[order.steps[i].first] = order.steps[i].second;
    position[order.steps[i].first] = i;
  }
  CHECK(found.at(v("v4")) == for_v4);
  CHECK(found.at(v("v3")) == for_v3);
  CHECK(position.at(v("v4")) < position.at(v("v3")));
  CHECK(lfhtc_check(g, v("v5"), found.at(v("v5"))).ok);

  const auto sys = lfhtc_system(g, v("v4"), for_v4);
  REQUIRE(sys.has_value());
  const TrekSystem minimal = minimal_halftrek_subsystem(g, *sys);
  const auto used = system_edges(*sys);
  for (const Edge& e : system_edges(minimal)) CHECK(std::find(used.begin(), used.end(), e) != used.end());
  for (std::size_t i = 0; i < minimal.treks.size(); ++i) {
    CHECK(minimal.treks[i].source() == sys->treks[i].source());
  }
}

TEST_CASE("LF-HTC search on random graphs returns valid triples") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 30; ++trial) {
    const ProcessGraph g = random_dag(rng, 5, 0.4, 1);
    for (const auto& [v, t] : lfhtc_order(g).steps) CHECK(lfhtc_check(g, v, t).ok);
  }
}
