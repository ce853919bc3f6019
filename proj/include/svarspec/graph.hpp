#pragma once

// Process graphs with an observed/latent split, their lag-annotated time
// series versions, and the combinatorics on top of them: paths, treks, trek
// systems, d- and t-separation, half-trek reachability and the latent-factor
// half-trek criterion.

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace svarspec {

using VertexId = int;
/// Bitmask over vertex ids; graphs are limited to 64 vertices.
using VertexSet = std::uint64_t;

inline constexpr VertexSet bit(VertexId v) { return VertexSet{1} << v; }
inline constexpr bool contains(VertexSet s, VertexId v) { return (s >> v) & 1U; }
inline int count(VertexSet s) { return std::popcount(s); }
std::vector<VertexId> members(VertexSet s);
VertexSet set_of(const std::vector<VertexId>& vs);

struct Edge {
  VertexId from;
  VertexId to;
  auto operator<=>(const Edge&) const = default;
};

using EdgeSet = std::set<Edge>;

class ProcessGraph {
 public:
  ProcessGraph() = default;
  /// Vertices are ordered by label. Throws GraphError on duplicate labels,
  /// self-loops, unknown endpoints, or edges into latent vertices.
  ProcessGraph(const std::vector<std::string>& observed, const std::vector<std::string>& latent,
               const std::vector<std::pair<std::string, std::string>>& edges);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& label(VertexId v) const { return labels_.at(static_cast<std::size_t>(v)); }
  const std::vector<std::string>& labels() const { return labels_; }
  /// Throws LabelError.
  VertexId id(const std::string& label) const;
  VertexSet ids(const std::vector<std::string>& labels) const;
  std::vector<std::string> labels_of(VertexSet s) const;

  VertexSet all() const { return size() == 64 ? ~VertexSet{0} : bit(size()) - 1; }
  VertexSet observed() const { return observed_; }
  VertexSet latent() const { return all() & ~observed_; }
  bool is_latent(VertexId v) const { return !contains(observed_, v); }

  VertexSet parents(VertexId v) const { return parents_[static_cast<std::size_t>(v)]; }
  VertexSet children(VertexId v) const { return children_[static_cast<std::size_t>(v)]; }
  VertexSet observed_parents(VertexId v) const { return parents(v) & observed_; }
  VertexSet latent_parents(VertexId v) const { return parents(v) & latent(); }
  bool has_edge(VertexId u, VertexId v) const { return contains(children(u), v); }
  /// Sorted by (from, to).
  const std::vector<Edge>& edges() const { return edges_; }

  bool acyclic() const { return acyclic_; }
  /// Is the subgraph induced on the observed vertices acyclic?
  bool observed_acyclic() const;
  /// Throws CyclicGraphError.
  const std::vector<VertexId>& topological_order() const;
  void require_acyclic(const char* what) const;

  /// Same vertices, only the listed edges.
  ProcessGraph with_edges(const std::vector<Edge>& keep) const;
  /// All vertices turned observed (for full-graph spectra in tests).
  ProcessGraph all_observed() const;

 private:
  void finish();

  std::vector<std::string> labels_;
  std::map<std::string, VertexId> index_;
  VertexSet observed_ = 0;
  std::vector<VertexSet> parents_;
  std::vector<VertexSet> children_;
  std::vector<Edge> edges_;
  bool acyclic_ = true;
  std::vector<VertexId> topo_;
};

class TimeSeriesGraph {
 public:
  TimeSeriesGraph() = default;
  /// cross_lags must be keyed exactly by base.edges() with nonempty sets of
  /// lags >= 0; auto lags are >= 1. Throws GraphError.
  TimeSeriesGraph(ProcessGraph base, std::map<Edge, std::vector<int>> cross_lags,
                  std::map<VertexId, std::vector<int>> auto_lags);

  const ProcessGraph& graph() const { return base_; }
  const std::vector<int>& cross_lags(Edge e) const;
  /// Empty for vertices without auto-dependence.
  const std::vector<int>& auto_lags(VertexId v) const;
  const std::map<Edge, std::vector<int>>& all_cross_lags() const { return cross_; }
  const std::map<VertexId, std::vector<int>>& all_auto_lags() const { return auto_; }
  int order() const { return order_; }
  /// Is the subgraph of lag-0 edges acyclic?
  bool contemporaneous_acyclic() const;

  /// Every edge gets lags 0..p, every vertex auto lags 1..p.
  static TimeSeriesGraph full_order(const ProcessGraph& g, int p);

 private:
  ProcessGraph base_;
  std::map<Edge, std::vector<int>> cross_;
  std::map<VertexId, std::vector<int>> auto_;
  int order_ = 0;
};

/// Vertex sequence v1 -> ... -> vn; a single vertex is the empty path.
using Path = std::vector<VertexId>;

struct Trek {
  VertexId top;
  Path left;   // top -> ... -> source
  Path right;  // top -> ... -> target
  VertexId source() const { return left.back(); }
  VertexId target() const { return right.back(); }
  friend bool operator==(const Trek&, const Trek&) = default;
};

struct PathSystem {
  std::vector<Path> paths;  // paths[i] starts at X[i]
  int sign = 1;
};

struct TrekSystem {
  std::vector<Trek> treks;  // treks[i] has source X[i]
  int sign = 1;
};

/// Sign of the permutation i -> perm[i].
int permutation_sign(const std::vector<int>& perm);

std::string format_path(const ProcessGraph& g, const Path& p);
std::string format_trek(const ProcessGraph& g, const Trek& t);

std::vector<Path> enumerate_paths(const ProcessGraph& g, VertexId x, VertexId y);
std::vector<Trek> enumerate_treks(const ProcessGraph& g, VertexId v, VertexId w);

/// Vertex-disjoint path systems from X to Y (any matching of targets).
/// Throws DimensionError when |X| != |Y|.
std::vector<PathSystem> nonintersecting_path_systems(const ProcessGraph& g,
                                                     const std::vector<VertexId>& x,
                                                     const std::vector<VertexId>& y);
/// Trek systems from X to Y whose left sides are pairwise disjoint and whose
/// right sides are pairwise disjoint.
std::vector<TrekSystem> sided_nonintersecting_trek_systems(const ProcessGraph& g,
                                                           const std::vector<VertexId>& x,
                                                           const std::vector<VertexId>& y);

/// Throws GraphError when X, Y, Z overlap.
bool d_separated(const ProcessGraph& g, VertexSet x, VertexSet y, VertexSet z);

struct TSeparation {
  int size = 0;
  VertexSet zx = 0;
  VertexSet zy = 0;
};

/// Does (zx, zy) t-separate X from Y?
bool t_separates(const ProcessGraph& g, VertexSet x, VertexSet y, VertexSet zx, VertexSet zy);
/// Smallest t-separating pair, searched by increasing total size.
TSeparation t_separation_min(const ProcessGraph& g, VertexSet x, VertexSet y);

/// Observed vertices half-trek reachable from some x in X while avoiding the
/// latent set lp (x itself excluded unless reachable from another member).
VertexSet htr(const ProcessGraph& g, VertexSet x, VertexSet lp);

struct LfhtcTriple {
  VertexSet y = 0;
  VertexSet w = 0;
  VertexSet lp = 0;
  friend bool operator==(const LfhtcTriple&, const LfhtcTriple&) = default;
};

enum class LfhtcFailure { none, cardinality, overlap, shared_latent, no_system };

struct LfhtcCheck {
  bool ok = false;
  LfhtcFailure failure = LfhtcFailure::none;
  int condition = 0;  // 1, 2 or 3 when failing
  std::string reason;
};

/// A latent-factor half-trek: either y -> ... -> t through observed vertices
/// (top y) or y <- l -> x1 -> ... -> t (top l).
std::vector<Trek> latent_factor_halftreks(const ProcessGraph& g, VertexId y, VertexId t);

/// Throws GraphError on a malformed triple (latent labels in Y or W, v in Y
/// or W, observed labels in L').
LfhtcCheck lfhtc_check(const ProcessGraph& g, VertexId v, const LfhtcTriple& t);
/// The system witnessing condition 3, ordered by the members of Y.
std::optional<TrekSystem> lfhtc_system(const ProcessGraph& g, VertexId v, const LfhtcTriple& t);
/// Edges whose link functions a step for v with triple t relies on.
EdgeSet lfhtc_prerequisites(const ProcessGraph& g, VertexId v, const LfhtcTriple& t);
std::optional<LfhtcTriple> lfhtc_search(const ProcessGraph& g, VertexId v, const EdgeSet& solved);

struct LfhtcOrder {
  std::vector<std::pair<VertexId, LfhtcTriple>> steps;
  VertexSet unresolved = 0;
  bool complete() const { return unresolved == 0; }
};

LfhtcOrder lfhtc_order(const ProcessGraph& g);

/// Edges used by the treks of a system.
std::vector<Edge> system_edges(const TrekSystem& t);
/// A latent-factor half-trek system between the same sources and targets that
/// uses only edges of the input system, has an acyclic edge subgraph and
/// admits the ordering required for its determinant to be a single term.
TrekSystem minimal_halftrek_subsystem(const ProcessGraph& g, const TrekSystem& t);

}  // namespace svarspec
