#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "support.hpp"
#include "svarspec/errors.hpp"
#include "svarspec/io.hpp"
#include "svarspec/simulate.hpp"
#include "svarspec/svar.hpp"

using namespace svarspec;
using testsupport::random_dag;

namespace {

struct Fixture {
  TimeSeriesGraph tsg;
  SvarParams params;
};

Fixture load(const std::string& graph, const std::string& params) {
  Fixture f{io::graph_from_json(io::read_json_file(SVARSPEC_TEST_DATA "/" + graph)), {}};
  f.params = io::params_from_json(f.tsg, io::read_json_file(SVARSPEC_TEST_DATA "/" + params));
  return f;
}

Rational q(long p, long d = 1) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

// Spectrum at e^{i theta} straight from the lag coefficients: the full-graph
// spectrum G^T D G^H with G = (I - Phi)^{-1}, restricted to observed indices.
Eigen::MatrixXcd numeric_spectrum(const TimeSeriesGraph& tsg, const SvarParams& p, double theta) {
  const ProcessGraph& g = tsg.graph();
  const auto n = static_cast<Eigen::Index>(g.size());
  const std::complex<double> zeta = std::polar(1.0, theta);
  Eigen::VectorXcd ar = Eigen::VectorXcd::Ones(n);
  for (const auto& [k, c] : p.autos) ar(k.vertex) -= c.get_d() * std::pow(zeta, k.lag);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& [k, c] : p.cross) h(k.edge.from, k.edge.to) += c.get_d() * std::pow(zeta, k.lag);
  for (Eigen::Index v = 0; v < n; ++v) h.col(v) /= ar(v);
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index v = 0; v < n; ++v) d(v, v) = p.noise[static_cast<std::size_t>(v)].get_d() / std::norm(ar(v));
  const Eigen::MatrixXcd gm = (Eigen::MatrixXcd::Identity(n, n) - h).inverse();
  const Eigen::MatrixXcd full = gm.transpose() * d * gm.conjugate();
  const auto obs = members(g.observed());
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(obs.size()), static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i)
    for (std::size_t j = 0; j < obs.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = full(obs[i], obs[j]);
  return out;
}

TimeSeriesGraph random_tsg(std::mt19937_64& rng, int n, int latent) {
  return TimeSeriesGraph::full_order(random_dag(rng, n, 0.5, latent), 1);
}

}  // namespace

TEST_CASE("lag polynomials and link functions") {
  const Fixture f = load("instrument_graph.json", "instrument_params.json");
  const ProcessGraph& g = f.tsg.graph();
  const VertexId u = g.id("u"), v = g.id("v");
  CHECK(lag_poly(f.tsg, f.params, u, v) == Poly{q(1, 2), q(1, 4)});
  CHECK(lag_poly(f.tsg, f.params, v, v) == Poly{0, q(-1, 3)});
  CHECK_THROWS_AS(lag_poly(f.tsg, f.params, v, u), GraphError);
  const RatMatrix h = transfer_matrix(f.tsg, f.params);
  CHECK(h.at("u", "v") == RatFn(Poly{q(1, 2), q(1, 4)}, Poly{1, q(1, 3)}));
  CHECK(h.at("v", "u").is_zero());
  const RatMatrix si = internal_spectrum(f.tsg, f.params);
  // omega_u / ((1 - z/2)(1 - 1/(2z))) = -2z / (z^2 - 5z/2 + 1)
  CHECK(si.at("u", "u") == RatFn(Poly{0, -2}, Poly{1, q(-5, 2), 1}));
  CHECK(si.at("u", "v").is_zero());
}

TEST_CASE("projected internal spectrum on the instrument example") {
  const Fixture f = load("instrument_graph.json", "instrument_params.json");
  const SpectrumBundle b = spectrum(f.tsg, f.params);
  CHECK(b.s_li.at("u", "v").is_zero());
  CHECK(b.s_li.at("u", "w").is_zero());
  CHECK(b.s_li.at("v", "w") == b.h.at("l", "v") * b.s_i.at("l", "l") * b.h.at("l", "w").conj());
  CHECK(b.s_li.at("u", "u") == b.s_i.at("u", "u"));
  CHECK(is_hermitian(b.s_li));
  for (int k = 0; k < 8; ++k) {
    const Eigen::MatrixXcd m = evaluate_on_circle(b.s_li, std::numbers::pi * (k + 0.5) / 8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    CHECK(es.eigenvalues().minCoeff() > 0);
  }
}

TEST_CASE("spectrum agrees with a direct numeric evaluation") {
  std::mt19937_64 rng(31);
  const Fixture f = load("instrument_graph.json", "instrument_params.json");
  std::vector<Fixture> cases{f, load("chain3_graph.json", "chain3_params.json")};
  for (int i = 0; i < 10; ++i) {
    Fixture r{random_tsg(rng, 4, i % 2), {}};
    r.params = sample_stable_params(r.tsg, 100 + static_cast<std::uint64_t>(i));
    cases.push_back(r);
  }
  for (const Fixture& c : cases) {
    const RatMatrix s = spectrum(c.tsg, c.params).s;
    CHECK(is_hermitian(s));
    for (int k = 0; k < 8; ++k) {
      const double theta = std::numbers::pi * (k + 0.25) / 8;
      const Eigen::MatrixXcd expected = numeric_spectrum(c.tsg, c.params, theta);
      CHECK((evaluate_on_circle(s, theta) - expected).norm() < 1e-9 * (1 + expected.norm()));
    }
  }
}

TEST_CASE("spectrum of a cyclic observed graph") {
  const ProcessGraph g({"a", "b"}, {}, {{"a", "b"}, {"b", "a"}});
  const TimeSeriesGraph tsg(g, {{{0, 1}, {1}}, {{1, 0}, {0}}}, {});
  const SvarParams p = sample_stable_params(tsg, 4);
  const RatMatrix s = spectrum(tsg, p).s;
  CHECK(is_hermitian(s));
  const Eigen::MatrixXcd expected = numeric_spectrum(tsg, p, 0.7);
  CHECK((evaluate_on_circle(s, 0.7) - expected).norm() < 1e-9 * (1 + expected.norm()));
  CHECK_THROWS_AS(spectrum_trek(tsg, p), CyclicGraphError);
}

TEST_CASE("trek rule and Gessel-Viennot expansions") {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 12; ++i) {
    const TimeSeriesGraph tsg = random_tsg(rng, 4, i % 2);
    const SvarParams p = sample_stable_params(tsg, 200 + static_cast<std::uint64_t>(i));
    const ProcessGraph& g = tsg.graph();
    const RatMatrix s = spectrum(tsg, p).s;
    CHECK(spectrum_trek(tsg, p) == s);
    const RatMatrix total = total_effects(tsg, p);
    const auto all = members(g.all());
    const auto obs = members(g.observed());
    const std::vector<VertexId> x{all[0], all[1]}, y{all[all.size() - 2], all.back()};
    CHECK(det(submatrix(total, g.labels_of(set_of(x)), g.labels_of(set_of(y)))) ==
          det_path_expansion(tsg, p, x, y));
    const std::vector<VertexId> ox{obs[0], obs[1]}, oy{obs[1], obs[3]};
    CHECK(det(submatrix(s, g.labels_of(set_of(ox)), g.labels_of(set_of(oy)))) ==
          det_trek_expansion(tsg, p, ox, oy));
  }
}

TEST_CASE("parameter validation") {
  const Fixture f = load("instrument_graph.json", "instrument_params.json");
  CHECK_NOTHROW(validate_params(f.tsg, f.params));
  const Fixture bad = load("instrument_graph.json", "instrument_unstable_params.json");
  CHECK_THROWS_AS(spectrum(bad.tsg, bad.params), ParamError);
  SvarParams p = f.params;
  p.noise[0] = 0;
  CHECK_THROWS_AS(validate_params(f.tsg, p), ParamError);
  p = f.params;
  p.cross.erase(p.cross.begin());
  CHECK_THROWS_AS(validate_params(f.tsg, p), ParamError);
  p = f.params;
  p.autos[{0, 2}] = q(1, 10);
  CHECK_THROWS_AS(validate_params(f.tsg, p), ParamError);
}

TEST_CASE("sampled parameters are stable and reproducible") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 20; ++i) {
    const TimeSeriesGraph tsg = random_tsg(rng, 5, 1);
    const SvarParams a = sample_stable_params(tsg, static_cast<std::uint64_t>(i));
    CHECK_NOTHROW(validate_params(tsg, a));
    CHECK(a == sample_stable_params(tsg, static_cast<std::uint64_t>(i)));
  }
}

TEST_CASE("generic rank of the three-vertex example") {
  const TimeSeriesGraph tsg = io::graph_from_json(io::read_json_file(SVARSPEC_TEST_DATA "/fork_graph.json"));
  const ProcessGraph& g = tsg.graph();
  CHECK(generic_rank(tsg, bit(g.id("2")), bit(g.id("3")), 3, 1) == 1);
  CHECK(generic_rank(tsg, g.ids({"1", "2"}), g.ids({"1", "3"}), 3, 1) == 1);
  CHECK(generic_rank(tsg, g.ids({"2", "3"}), g.ids({"2", "3"}), 3, 1) == 2);
}

TEST_CASE("conditional spectrum vanishes under d-separation") {
  const Fixture f = load("chain3_graph.json", "chain3_params.json");
  const RatMatrix s = spectrum(f.tsg, f.params).s;
  CHECK(conditional_spectrum(s, {"a"}, {"c"}, {"b"}).is_zero());
  CHECK_FALSE(conditional_spectrum(s, {"a"}, {"c"}, {}).is_zero());
  RatMatrix singular = s;
  for (std::size_t j = 0; j < 3; ++j) singular(1, j) = RatFn();
  CHECK_THROWS_AS(conditional_spectrum(singular, {"a"}, {"c"}, {"b"}), SingularMatrixError);
}

TEST_CASE("edge restriction") {
  const Fixture f = load("instrument_graph.json", "instrument_params.json");
  const ProcessGraph& g = f.tsg.graph();
  const TimeSeriesGraph r = restrict_edges(f.tsg, {{g.id("u"), g.id("v")}});
  const SvarParams rp = restrict_params(r, f.params);
  CHECK_NOTHROW(validate_params(r, rp));
  CHECK(spectrum(r, rp).s.at("u", "w").is_zero());
}
