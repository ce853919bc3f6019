#include "svarspec/graph.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

#include "svarspec/errors.hpp"

namespace svarspec {

std::vector<VertexId> members(VertexSet s) {
  std::vector<VertexId> out;
  while (s) {
    out.push_back(std::countr_zero(s));
    s &= s - 1;
  }
  return out;
}

VertexSet set_of(const std::vector<VertexId>& vs) {
  VertexSet s = 0;
  for (VertexId v : vs) s |= bit(v);
  return s;
}

namespace {

// Calls fn for every k-subset of `pool`, in lexicographic order of members.
// Stops early when fn returns true; returns whether it stopped.
bool for_each_subset(const std::vector<VertexId>& pool, int k,
                     const std::function<bool(VertexSet)>& fn) {
  if (k < 0 || k > static_cast<int>(pool.size())) return false;
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  const int n = static_cast<int>(pool.size());
  for (;;) {
    VertexSet s = 0;
    for (int i : idx) s |= bit(pool[static_cast<std::size_t>(i)]);
    if (fn(s)) return true;
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return false;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

// Kahn's algorithm restricted to `within`, smallest id first.
std::vector<VertexId> kahn(const std::vector<VertexSet>& parents, VertexSet within) {
  std::vector<VertexId> order;
  VertexSet done = 0;
  const auto pending = members(within);
  bool progress = true;
  while (progress) {
    progress = false;
    for (VertexId v : pending) {
      if (contains(done, v)) continue;
      if ((parents[static_cast<std::size_t>(v)] & within & ~done) == 0) {
        order.push_back(v);
        done |= bit(v);
        progress = true;
        break;
      }
    }
  }
  return order;
}

}  // namespace

// ---------------------------------------------------------------- ProcessGraph

ProcessGraph::ProcessGraph(const std::vector<std::string>& observed,
                           const std::vector<std::string>& latent,
                           const std::vector<std::pair<std::string, std::string>>& edges) {
  labels_ = observed;
  labels_.insert(labels_.end(), latent.begin(), latent.end());
  std::sort(labels_.begin(), labels_.end());
  if (auto dup = std::adjacent_find(labels_.begin(), labels_.end()); dup != labels_.end()) {
    throw GraphError("vertex '" + *dup + "' is declared twice");
  }
  if (labels_.size() > 64) throw GraphError("at most 64 vertices are supported");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw GraphError("empty vertex label");
    index_[labels_[i]] = static_cast<VertexId>(i);
  }
  for (const auto& o : observed) observed_ |= bit(index_[o]);
  parents_.assign(labels_.size(), 0);
  children_.assign(labels_.size(), 0);
  for (const auto& [from, to] : edges) {
    auto f = index_.find(from);
    auto t = index_.find(to);
    if (f == index_.end() || t == index_.end()) {
      throw GraphError("edge " + from + " -> " + to + " uses an undeclared vertex");
    }
    if (f->second == t->second) throw GraphError("self-loop at '" + from + "'");
    if (is_latent(t->second)) {
      throw GraphError("edge " + from + " -> " + to + " points into latent vertex '" + to +
                       "'; latent vertices must have no incoming edges");
    }
    if (has_edge(f->second, t->second)) {
      throw GraphError("edge " + from + " -> " + to + " is listed twice");
    }
    children_[static_cast<std::size_t>(f->second)] |= bit(t->second);
    parents_[static_cast<std::size_t>(t->second)] |= bit(f->second);
  }
  finish();
}

void ProcessGraph::finish() {
  edges_.clear();
  for (VertexId u = 0; u < size(); ++u)
    for (VertexId v : members(children(u))) edges_.push_back({u, v});
  topo_ = kahn(parents_, all());
  acyclic_ = static_cast<int>(topo_.size()) == size();
}

VertexId ProcessGraph::id(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) throw LabelError("unknown vertex '" + label + "'");
  return it->second;
}

VertexSet ProcessGraph::ids(const std::vector<std::string>& labels) const {
  VertexSet s = 0;
  for (const auto& l : labels) s |= bit(id(l));
  return s;
}

std::vector<std::string> ProcessGraph::labels_of(VertexSet s) const {
  std::vector<std::string> out;
  for (VertexId v : members(s)) out.push_back(label(v));
  return out;
}

bool ProcessGraph::observed_acyclic() const {
  return static_cast<int>(kahn(parents_, observed_).size()) == count(observed_);
}

const std::vector<VertexId>& ProcessGraph::topological_order() const {
  require_acyclic("topological order");
  return topo_;
}

void ProcessGraph::require_acyclic(const char* what) const {
  if (!acyclic_) throw CyclicGraphError(std::string(what) + " requires an acyclic process graph");
}

ProcessGraph ProcessGraph::with_edges(const std::vector<Edge>& keep) const {
  ProcessGraph out = *this;
  std::fill(out.parents_.begin(), out.parents_.end(), 0);
  std::fill(out.children_.begin(), out.children_.end(), 0);
  for (const Edge& e : keep) {
    if (!has_edge(e.from, e.to)) throw GraphError("with_edges: edge not in graph");
    out.children_[static_cast<std::size_t>(e.from)] |= bit(e.to);
    out.parents_[static_cast<std::size_t>(e.to)] |= bit(e.from);
  }
  out.finish();
  return out;
}

ProcessGraph ProcessGraph::all_observed() const {
  ProcessGraph out = *this;
  out.observed_ = all();
  return out;
}

// ---------------------------------------------------------------- TimeSeriesGraph

TimeSeriesGraph::TimeSeriesGraph(ProcessGraph base, std::map<Edge, std::vector<int>> cross_lags,
                                 std::map<VertexId, std::vector<int>> auto_lags)
    : base_(std::move(base)), cross_(std::move(cross_lags)), auto_(std::move(auto_lags)) {
  auto edge_name = [this](Edge e) { return base_.label(e.from) + " -> " + base_.label(e.to); };
  for (const Edge& e : base_.edges()) {
    if (!cross_.count(e)) throw GraphError("edge " + edge_name(e) + " has no lag set");
  }
  for (auto& [e, lags] : cross_) {
    if (e.from < 0 || e.to < 0 || e.from >= base_.size() || e.to >= base_.size() ||
        !base_.has_edge(e.from, e.to)) {
      throw GraphError("lag set given for a pair that is not an edge of the process graph");
    }
    if (lags.empty()) throw GraphError("edge " + edge_name(e) + " has an empty lag set");
    std::sort(lags.begin(), lags.end());
    if (std::adjacent_find(lags.begin(), lags.end()) != lags.end()) {
      throw GraphError("edge " + edge_name(e) + " repeats a lag");
    }
    if (lags.front() < 0) {
      throw GraphError("edge " + edge_name(e) + " has negative lag " + std::to_string(lags.front()));
    }
    order_ = std::max(order_, lags.back());
  }
  for (auto it = auto_.begin(); it != auto_.end();) {
    auto& [v, lags] = *it;
    if (v < 0 || v >= base_.size()) throw GraphError("auto lags for an unknown vertex");
    std::sort(lags.begin(), lags.end());
    if (std::adjacent_find(lags.begin(), lags.end()) != lags.end()) {
      throw GraphError("auto lags of '" + base_.label(v) + "' repeat a lag");
    }
    if (!lags.empty() && lags.front() < 1) {
      throw GraphError("auto lag " + std::to_string(lags.front()) + " of '" + base_.label(v) +
                       "' must be at least 1");
    }
    if (lags.empty()) {
      it = auto_.erase(it);
      continue;
    }
    order_ = std::max(order_, lags.back());
    ++it;
  }
}

const std::vector<int>& TimeSeriesGraph::cross_lags(Edge e) const {
  auto it = cross_.find(e);
  if (it == cross_.end()) throw GraphError("no such edge");
  return it->second;
}

const std::vector<int>& TimeSeriesGraph::auto_lags(VertexId v) const {
  static const std::vector<int> kNone;
  auto it = auto_.find(v);
  return it == auto_.end() ? kNone : it->second;
}

bool TimeSeriesGraph::contemporaneous_acyclic() const {
  std::vector<VertexSet> parents(static_cast<std::size_t>(base_.size()), 0);
  for (const auto& [e, lags] : cross_) {
    if (lags.front() == 0) parents[static_cast<std::size_t>(e.to)] |= bit(e.from);
  }
  return static_cast<int>(kahn(parents, base_.all()).size()) == base_.size();
}

TimeSeriesGraph TimeSeriesGraph::full_order(const ProcessGraph& g, int p) {
  std::map<Edge, std::vector<int>> cross;
  std::map<VertexId, std::vector<int>> autos;
  std::vector<int> cross_lags(static_cast<std::size_t>(p) + 1);
  std::iota(cross_lags.begin(), cross_lags.end(), 0);
  for (const Edge& e : g.edges()) cross[e] = cross_lags;
  if (p >= 1) {
    std::vector<int> auto_lags(cross_lags.begin() + 1, cross_lags.end());
    for (VertexId v = 0; v < g.size(); ++v) autos[v] = auto_lags;
  }
  return TimeSeriesGraph(g, std::move(cross), std::move(autos));
}

// ---------------------------------------------------------------- paths and treks

int permutation_sign(const std::vector<int>& perm) {
  std::vector<bool> seen(perm.size(), false);
  int sign = 1;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    std::size_t len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
      seen[j] = true;
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

std::string format_path(const ProcessGraph& g, const Path& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += " -> ";
    out += g.label(p[i]);
  }
  return out;
}

std::string format_trek(const ProcessGraph& g, const Trek& t) {
  std::string out;
  for (std::size_t i = t.left.size(); i-- > 1;) out += g.label(t.left[i]) + " <- ";
  out += g.label(t.top);
  for (std::size_t i = 1; i < t.right.size(); ++i) out += " -> " + g.label(t.right[i]);
  return out;
}

namespace {

// Simple directed paths x ~> y; `allowed` restricts every vertex after x.
void collect_paths(const ProcessGraph& g, VertexId y, VertexSet allowed, Path& cur, VertexSet on,
                   std::vector<Path>& out) {
  const VertexId at = cur.back();
  if (at == y) {
    out.push_back(cur);
    return;
  }
  for (VertexId c : members(g.children(at) & allowed & ~on)) {
    cur.push_back(c);
    collect_paths(g, y, allowed, cur, on | bit(c), out);
    cur.pop_back();
  }
}

std::vector<Path> simple_paths(const ProcessGraph& g, VertexId x, VertexId y, VertexSet allowed) {
  std::vector<Path> out;
  Path cur{x};
  collect_paths(g, y, allowed, cur, bit(x), out);
  return out;
}

}  // namespace

std::vector<Path> enumerate_paths(const ProcessGraph& g, VertexId x, VertexId y) {
  g.require_acyclic("path enumeration");
  return simple_paths(g, x, y, g.all());
}

std::vector<Trek> enumerate_treks(const ProcessGraph& g, VertexId v, VertexId w) {
  g.require_acyclic("trek enumeration");
  std::vector<Trek> out;
  for (VertexId top = 0; top < g.size(); ++top) {
    auto lefts = simple_paths(g, top, v, g.all());
    if (lefts.empty()) continue;
    auto rights = simple_paths(g, top, w, g.all());
    for (const auto& l : lefts)
      for (const auto& r : rights) out.push_back({top, l, r});
  }
  return out;
}

std::vector<PathSystem> nonintersecting_path_systems(const ProcessGraph& g,
                                                     const std::vector<VertexId>& x,
                                                     const std::vector<VertexId>& y) {
  if (x.size() != y.size()) throw DimensionError("path systems need |X| = |Y|");
  g.require_acyclic("path systems");
  const std::size_t n = x.size();
  std::vector<std::vector<std::vector<Path>>> paths(n, std::vector<std::vector<Path>>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) paths[i][j] = simple_paths(g, x[i], y[j], g.all());

  std::vector<PathSystem> out;
  std::vector<int> perm(n);
  std::vector<Path> chosen(n);
  std::vector<bool> used(n, false);
  std::function<void(std::size_t, VertexSet)> rec = [&](std::size_t i, VertexSet occupied) {
    if (i == n) {
      out.push_back({chosen, permutation_sign(perm)});
      return;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      for (const Path& p : paths[i][j]) {
        const VertexSet vs = set_of(p);
        if (vs & occupied) continue;
        used[j] = true;
        perm[i] = static_cast<int>(j);
        chosen[i] = p;
        rec(i + 1, occupied | vs);
        used[j] = false;
      }
    }
  };
  rec(0, 0);
  return out;
}

namespace {

// Backtracking over treks that share no vertex on the same side.
std::vector<TrekSystem> sided_systems(const std::vector<std::vector<std::vector<Trek>>>& treks,
                                      bool first_only) {
  const std::size_t n = treks.size();
  std::vector<TrekSystem> out;
  std::vector<int> perm(n);
  std::vector<Trek> chosen(n);
  std::vector<bool> used(n, false);
  std::function<bool(std::size_t, VertexSet, VertexSet)> rec = [&](std::size_t i, VertexSet lo,
                                                                   VertexSet ro) {
    if (i == n) {
      out.push_back({chosen, permutation_sign(perm)});
      return first_only;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      for (const Trek& t : treks[i][j]) {
        const VertexSet ls = set_of(t.left), rs = set_of(t.right);
        if ((ls & lo) || (rs & ro)) continue;
        used[j] = true;
        perm[i] = static_cast<int>(j);
        chosen[i] = t;
        const bool stop = rec(i + 1, lo | ls, ro | rs);
        used[j] = false;
        if (stop) return true;
      }
    }
    return false;
  };
  rec(0, 0, 0);
  return out;
}

}  // namespace

std::vector<TrekSystem> sided_nonintersecting_trek_systems(const ProcessGraph& g,
                                                           const std::vector<VertexId>& x,
                                                           const std::vector<VertexId>& y) {
  if (x.size() != y.size()) throw DimensionError("trek systems need |X| = |Y|");
  g.require_acyclic("trek systems");
  const std::size_t n = x.size();
  std::vector<std::vector<std::vector<Trek>>> treks(n, std::vector<std::vector<Trek>>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) treks[i][j] = enumerate_treks(g, x[i], y[j]);
  return sided_systems(treks, false);
}

// ---------------------------------------------------------------- separation

bool d_separated(const ProcessGraph& g, VertexSet x, VertexSet y, VertexSet z) {
  if ((x & y) || (x & z) || (y & z)) throw GraphError("d-separation needs disjoint X, Y, Z");
  g.require_acyclic("d-separation");
  // Ancestors of Z (including Z): colliders there are open.
  VertexSet anc = z;
  for (bool grew = true; grew;) {
    grew = false;
    for (VertexId v : members(anc)) {
      if (g.parents(v) & ~anc) {
        anc |= g.parents(v);
        grew = true;
      }
    }
  }
  // Reachability over (vertex, arrived-from-child) states.
  VertexSet seen_up = 0, seen_down = 0;
  std::vector<std::pair<VertexId, bool>> stack;
  for (VertexId v : members(x)) stack.push_back({v, true});
  while (!stack.empty()) {
    auto [v, up] = stack.back();
    stack.pop_back();
    if (up) {
      if (contains(seen_up, v)) continue;
      seen_up |= bit(v);
    } else {
      if (contains(seen_down, v)) continue;
      seen_down |= bit(v);
    }
    const bool in_z = contains(z, v);
    if (!in_z && contains(y, v)) return false;
    if (up) {
      if (in_z) continue;
      for (VertexId p : members(g.parents(v))) stack.push_back({p, true});
      for (VertexId c : members(g.children(v))) stack.push_back({c, false});
    } else {
      if (!in_z) {
        for (VertexId c : members(g.children(v))) stack.push_back({c, false});
      }
      if (contains(anc, v)) {
        for (VertexId p : members(g.parents(v))) stack.push_back({p, true});
      }
    }
  }
  return true;
}

namespace {

// Vertices with a directed path into `targets` that avoids `blocked` entirely.
VertexSet tops_reaching(const ProcessGraph& g, VertexSet targets, VertexSet blocked) {
  VertexSet reach = targets & ~blocked;
  for (bool grew = true; grew;) {
    grew = false;
    for (VertexId v : members(reach)) {
      const VertexSet add = g.parents(v) & ~blocked & ~reach;
      if (add) {
        reach |= add;
        grew = true;
      }
    }
  }
  return reach;
}

VertexSet ancestors_of(const ProcessGraph& g, VertexSet s) { return tops_reaching(g, s, 0); }

}  // namespace

bool t_separates(const ProcessGraph& g, VertexSet x, VertexSet y, VertexSet zx, VertexSet zy) {
  return (tops_reaching(g, x, zx) & tops_reaching(g, y, zy)) == 0;
}

TSeparation t_separation_min(const ProcessGraph& g, VertexSet x, VertexSet y) {
  g.require_acyclic("t-separation");
  const auto cand_x = members(ancestors_of(g, x));
  const auto cand_y = members(ancestors_of(g, y));
  const int bound = std::min(count(x), count(y));
  TSeparation best;
  for (int s = 0; s <= bound; ++s) {
    for (int a = 0; a <= s; ++a) {
      bool found = for_each_subset(cand_x, a, [&](VertexSet zx) {
        return for_each_subset(cand_y, s - a, [&](VertexSet zy) {
          if (!t_separates(g, x, y, zx, zy)) return false;
          best = {s, zx, zy};
          return true;
        });
      });
      if (found) return best;
    }
  }
  // Unreachable: (X, empty) always separates.
  return {count(x), x, 0};
}

// ---------------------------------------------------------------- half-treks

std::vector<Trek> latent_factor_halftreks(const ProcessGraph& g, VertexId y, VertexId t) {
  std::vector<Trek> out;
  const VertexSet obs = g.observed();
  for (Path& p : simple_paths(g, y, t, obs)) out.push_back({y, Path{y}, std::move(p)});
  for (VertexId l : members(g.latent_parents(y))) {
    for (VertexId c : members(g.children(l) & obs)) {
      if (c == y) continue;
      for (Path& p : simple_paths(g, c, t, obs)) {
        Path right{l};
        right.insert(right.end(), p.begin(), p.end());
        out.push_back({l, Path{l, y}, std::move(right)});
      }
    }
  }
  return out;
}

VertexSet htr(const ProcessGraph& g, VertexSet x, VertexSet lp) {
  const VertexSet obs = g.observed();
  VertexSet out = 0;
  for (VertexId v : members(x)) {
    // Starting points of the directed observed part.
    VertexSet frontier = g.children(v) & obs;
    for (VertexId l : members(g.latent_parents(v) & ~lp)) frontier |= g.children(l) & obs & ~bit(v);
    VertexSet reach = frontier;
    while (frontier) {
      VertexSet next = 0;
      for (VertexId u : members(frontier)) next |= g.children(u) & obs;
      frontier = next & ~reach;
      reach |= next;
    }
    out |= reach & ~bit(v);
  }
  return out;
}

namespace {

std::string names(const ProcessGraph& g, VertexSet s) {
  std::string out = "{";
  bool first = true;
  for (const auto& l : g.labels_of(s)) {
    if (!first) out += ",";
    out += l;
    first = false;
  }
  return out + "}";
}

}  // namespace

std::optional<TrekSystem> lfhtc_system(const ProcessGraph& g, VertexId v, const LfhtcTriple& t) {
  const auto sources = members(t.y);
  std::vector<VertexId> targets = members(g.observed_parents(v));
  for (VertexId w : members(t.w)) targets.push_back(w);
  if (sources.size() != targets.size()) return std::nullopt;
  const std::size_t n = sources.size();
  std::vector<std::vector<std::vector<Trek>>> treks(n, std::vector<std::vector<Trek>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const VertexId y = sources[i];
    for (std::size_t j = 0; j < n; ++j) {
      const VertexId target = targets[j];
      if (contains(t.w, target)) {
        for (VertexId l : members(g.parents(y) & g.parents(target) & t.lp)) {
          treks[i][j].push_back({l, Path{l, y}, Path{l, target}});
        }
      } else {
        treks[i][j] = latent_factor_halftreks(g, y, target);
      }
    }
  }
  auto found = sided_systems(treks, true);
  if (found.empty()) return std::nullopt;
  return found.front();
}

LfhtcCheck lfhtc_check(const ProcessGraph& g, VertexId v, const LfhtcTriple& t) {
  if (g.is_latent(v)) throw GraphError("LF-HTC target '" + g.label(v) + "' is latent");
  if ((t.y | t.w) & g.latent()) throw GraphError("Y and W must contain observed vertices only");
  if (contains(t.y, v) || contains(t.w, v)) {
    throw GraphError("Y and W must not contain the target vertex '" + g.label(v) + "'");
  }
  if (t.lp & g.observed()) throw GraphError("L' must contain latent vertices only");

  const VertexSet pa = g.observed_parents(v);
  LfhtcCheck res;
  auto fail = [&](int cond, LfhtcFailure why, std::string reason) {
    res.ok = false;
    res.condition = cond;
    res.failure = why;
    res.reason = std::move(reason);
    return res;
  };
  if (count(t.y) != count(pa) + count(t.lp) || count(t.w) != count(t.lp)) {
    return fail(1, LfhtcFailure::cardinality,
                "need |Y| = |pa_O(v)| + |L'| and |W| = |L'|");
  }
  if (t.w & pa) return fail(1, LfhtcFailure::overlap, "W meets pa_O(v) in " + names(g, t.w & pa));
  if (t.y & t.w) return fail(2, LfhtcFailure::overlap, "Y and W share " + names(g, t.y & t.w));
  VertexSet lat_y = 0, lat_w = g.latent_parents(v);
  for (VertexId y : members(t.y)) lat_y |= g.latent_parents(y);
  for (VertexId w : members(t.w)) lat_w |= g.latent_parents(w);
  if (const VertexSet shared = lat_y & lat_w & ~t.lp) {
    return fail(2, LfhtcFailure::shared_latent,
                "latent parents " + names(g, shared) + " are shared outside L'");
  }
  if (!lfhtc_system(g, v, t)) {
    return fail(3, LfhtcFailure::no_system,
                "no latent-factor half-trek system without sided intersection");
  }
  res.ok = true;
  return res;
}

EdgeSet lfhtc_prerequisites(const ProcessGraph& g, VertexId v, const LfhtcTriple& t) {
  EdgeSet out;
  const VertexSet heads = t.w | (t.y & htr(g, t.w | bit(v), t.lp));
  for (VertexId y : members(heads))
    for (VertexId u : members(g.observed_parents(y))) out.insert({u, y});
  return out;
}

std::optional<LfhtcTriple> lfhtc_search(const ProcessGraph& g, VertexId v, const EdgeSet& solved) {
  if (g.is_latent(v)) throw GraphError("LF-HTC target '" + g.label(v) + "' is latent");
  const VertexSet pa = g.observed_parents(v);
  const auto latents = members(g.latent());
  const auto y_pool = members(g.observed() & ~bit(v));
  std::optional<LfhtcTriple> result;
  for (int k = 0; k <= static_cast<int>(latents.size()) && !result; ++k) {
    for_each_subset(latents, k, [&](VertexSet lp) {
      return for_each_subset(y_pool, count(pa) + k, [&](VertexSet y) {
        const auto w_pool = members(g.observed() & ~bit(v) & ~pa & ~y);
        return for_each_subset(w_pool, k, [&](VertexSet w) {
          const LfhtcTriple t{y, w, lp};
          if (!lfhtc_check(g, v, t).ok) return false;
          for (const Edge& e : lfhtc_prerequisites(g, v, t)) {
            if (!solved.count(e)) return false;
          }
          result = t;
          return true;
        });
      });
    });
  }
  return result;
}

LfhtcOrder lfhtc_order(const ProcessGraph& g) {
  LfhtcOrder out;
  EdgeSet solved;
  VertexSet pending = g.observed();
  for (bool progress = true; progress && pending;) {
    progress = false;
    for (VertexId v : members(pending)) {
      auto t = lfhtc_search(g, v, solved);
      if (!t) continue;
      out.steps.push_back({v, *t});
      for (VertexId u : members(g.observed_parents(v))) solved.insert({u, v});
      pending &= ~bit(v);
      progress = true;
    }
  }
  out.unresolved = pending;
  return out;
}

std::vector<Edge> system_edges(const TrekSystem& t) {
  std::set<Edge> edges;
  for (const Trek& tr : t.treks) {
    for (std::size_t i = 1; i < tr.left.size(); ++i) edges.insert({tr.left[i - 1], tr.left[i]});
    for (std::size_t i = 1; i < tr.right.size(); ++i) edges.insert({tr.right[i - 1], tr.right[i]});
  }
  return {edges.begin(), edges.end()};
}

namespace {

// Condition 1 of the minimal-system property: an ordering in which trek i only
// passes sources placed before it, and its own source appears exactly once.
bool admits_source_ordering(const TrekSystem& t) {
  const std::size_t n = t.treks.size();
  std::vector<VertexId> sources;
  for (const Trek& tr : t.treks) sources.push_back(tr.source());
  std::vector<VertexSet> must_precede(n, 0);  // bit j: source j must come first
  for (std::size_t i = 0; i < n; ++i) {
    const Trek& tr = t.treks[i];
    int own = 0;
    for (VertexId u : tr.left) own += u == sources[i];
    for (std::size_t k = 1; k < tr.right.size(); ++k) own += tr.right[k] == sources[i];
    if (own != 1) return false;
    const VertexSet visited = set_of(tr.left) | set_of(tr.right);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && contains(visited, sources[j])) must_precede[i] |= bit(static_cast<VertexId>(j));
    }
  }
  // Topological sort of the precedence relation.
  VertexSet placed = 0;
  for (std::size_t round = 0; round < n; ++round) {
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (contains(placed, static_cast<VertexId>(i))) continue;
      if ((must_precede[i] & ~placed) == 0) {
        placed |= bit(static_cast<VertexId>(i));
        moved = true;
        break;
      }
    }
    if (!moved) return false;
  }
  return true;
}

}  // namespace

TrekSystem minimal_halftrek_subsystem(const ProcessGraph& g, const TrekSystem& t) {
  const ProcessGraph sub = g.with_edges(system_edges(t));
  const std::size_t n = t.treks.size();
  std::vector<VertexId> sources, targets;
  for (const Trek& tr : t.treks) {
    sources.push_back(tr.source());
    targets.push_back(tr.target());
  }
  std::vector<std::vector<std::vector<Trek>>> treks(n, std::vector<std::vector<Trek>>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) treks[i][j] = latent_factor_halftreks(sub, sources[i], targets[j]);
  auto candidates = sided_systems(treks, false);
  std::stable_sort(candidates.begin(), candidates.end(), [](const TrekSystem& a, const TrekSystem& b) {
    return system_edges(a).size() < system_edges(b).size();
  });
  for (const TrekSystem& c : candidates) {
    if (!g.with_edges(system_edges(c)).acyclic()) continue;
    if (!admits_source_ordering(c)) continue;
    return c;
  }
  throw GraphError("no minimal latent-factor half-trek subsystem exists for the given system");
}

}  // namespace svarspec
