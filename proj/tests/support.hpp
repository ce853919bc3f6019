#pragma once

// Shared helpers for the test binaries: random exact objects.

#include <algorithm>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "svarspec/ratfield.hpp"
#include "svarspec/graph.hpp"
#include "svarspec/ratlinalg.hpp"

namespace testsupport {

using svarspec::Poly;
using svarspec::RatFn;
using svarspec::Rational;

inline Rational random_rational(std::mt19937_64& rng, int bound = 9) {
  std::uniform_int_distribution<int> num(-bound, bound);
  std::uniform_int_distribution<int> den(1, bound);
  Rational r(num(rng), den(rng));
  r.canonicalize();
  return r;
}

inline Poly random_poly(std::mt19937_64& rng, int max_degree = 3, bool nonzero = false) {
  std::uniform_int_distribution<int> deg(0, max_degree);
  for (;;) {
    std::vector<Rational> c(static_cast<std::size_t>(deg(rng)) + 1);
    for (auto& x : c) x = random_rational(rng);
    Poly p(std::move(c));
    if (!nonzero || !p.is_zero()) return p;
  }
}

inline RatFn random_ratfn(std::mt19937_64& rng, int max_degree = 3) {
  return RatFn(random_poly(rng, max_degree), random_poly(rng, max_degree, true));
}

inline RatFn random_nonzero_ratfn(std::mt19937_64& rng, int max_degree = 3) {
  for (;;) {
    RatFn r = random_ratfn(rng, max_degree);
    if (!r.is_zero()) return r;
  }
}

inline svarspec::RatMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                         int max_degree = 2) {
  svarspec::RatMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = random_ratfn(rng, max_degree);
  return m;
}

// Random DAG on observed vertices x0..x{n-1} (edges respect index order) plus
// `latent` source vertices l0.. with random children.
inline svarspec::ProcessGraph random_dag(std::mt19937_64& rng, int n, double p_edge, int latent = 0) {
  std::bernoulli_distribution coin(p_edge);
  std::vector<std::string> obs, lat;
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < n; ++i) obs.push_back("x" + std::to_string(i));
  for (int i = 0; i < latent; ++i) lat.push_back("l" + std::to_string(i));
  // Shuffle so that edge direction is not tied to label order.
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) edges.emplace_back(obs[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])],
                                        obs[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]);
  for (const auto& l : lat)
    for (const auto& o : obs)
      if (coin(rng)) edges.emplace_back(l, o);
  return svarspec::ProcessGraph(obs, lat, edges);
}

// Directed-path counts by powers of the adjacency matrix (DAGs only).
inline std::vector<std::vector<long>> path_counts(const svarspec::ProcessGraph& g) {
  const auto n = static_cast<std::size_t>(g.size());
  std::vector<std::vector<long>> total(n, std::vector<long>(n, 0)), power(n, std::vector<long>(n, 0));
  for (std::size_t i = 0; i < n; ++i) power[i][i] = 1;
  for (std::size_t k = 0; k <= n; ++k) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) total[i][j] += power[i][j];
    std::vector<std::vector<long>> next(n, std::vector<long>(n, 0));
    for (const auto& e : g.edges())
      for (std::size_t i = 0; i < n; ++i)
        next[i][static_cast<std::size_t>(e.to)] += power[i][static_cast<std::size_t>(e.from)];
    power = std::move(next);
  }
  return total;
}

}  // namespace testsupport
