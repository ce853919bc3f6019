#pragma once

// SVAR parameters and their frequency-domain image: link functions, internal
// and projected internal spectra, and the spectral density over the observed
// processes. The trek-rule and determinant expansions live here as well.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "svarspec/graph.hpp"
#include "svarspec/ratfield.hpp"
#include "svarspec/ratlinalg.hpp"

namespace svarspec {

struct SvarParams {
  struct CrossKey {
    Edge edge;
    int lag;
    auto operator<=>(const CrossKey&) const = default;
  };
  struct AutoKey {
    VertexId vertex;
    int lag;
    auto operator<=>(const AutoKey&) const = default;
  };

  std::map<CrossKey, Rational> cross;
  std::map<AutoKey, Rational> autos;
  std::vector<Rational> noise;  // indexed by vertex id

  friend bool operator==(const SvarParams&, const SvarParams&) = default;
};

/// Checks keys against the lag sets, positivity of the noise variances and
/// the stability inequalities. Throws ParamError naming what failed.
void validate_params(const TimeSeriesGraph& tsg, const SvarParams& params);

struct SpectrumBundle {
  RatMatrix h;     // over V
  RatMatrix s_i;   // diagonal, over V
  RatMatrix s_li;  // over O
  RatMatrix s;     // over O
};

/// sum_k phi_{x,y}(k) z^k; x == y gives the auto polynomial. Throws GraphError
/// when x -> y is not an edge.
Poly lag_poly(const TimeSeriesGraph& tsg, const SvarParams& params, VertexId x, VertexId y);
/// h_{v,w} = phi_{v,w} / (1 - phi_{w,w}).
RatMatrix transfer_matrix(const TimeSeriesGraph& tsg, const SvarParams& params);
/// S^I_v = omega_v (1 - phi_vv)^{-1} ((1 - phi_vv)^{-1})*.
RatMatrix internal_spectrum(const TimeSeriesGraph& tsg, const SvarParams& params);
/// S^LI = S^I_O + [H]_{L,O}^T S^I_L [H]_{L,O}*.
RatMatrix projected_internal_spectrum(const TimeSeriesGraph& tsg, const SvarParams& params);
/// Full bundle; S = (I - H_O^T)^{-1} S^LI (I - H_O*)^{-1}. Validates params.
SpectrumBundle spectrum(const TimeSeriesGraph& tsg, const SvarParams& params);
/// Spectrum over all of V (latent vertices treated as observed).
RatMatrix full_spectrum(const TimeSeriesGraph& tsg, const SvarParams& params);
/// (I - H)^{-1} over V.
RatMatrix total_effects(const TimeSeriesGraph& tsg, const SvarParams& params);

RatFn path_function(const TimeSeriesGraph& tsg, const SvarParams& params, const Path& p);
/// h^{Left} S^I_top (h^{Right})*, for a trek with source on the left.
RatFn trek_function(const TimeSeriesGraph& tsg, const SvarParams& params, const Trek& t);
/// Entrywise trek-rule sum over the observed vertices. Acyclic graphs only.
RatMatrix spectrum_trek(const TimeSeriesGraph& tsg, const SvarParams& params);

/// S_{X,Y} - S_{X,Z} S_{Z,Z}^{-1} S_{Z,Y}. Throws SingularMatrixError.
RatMatrix conditional_spectrum(const RatMatrix& s, const std::vector<std::string>& x,
                               const std::vector<std::string>& y,
                               const std::vector<std::string>& z);

/// Signed sum over non-intersecting path systems from X to Y.
RatFn det_path_expansion(const TimeSeriesGraph& tsg, const SvarParams& params,
                         const std::vector<VertexId>& x, const std::vector<VertexId>& y);
/// Signed sum of trek-function products over sided-non-intersecting systems.
RatFn det_trek_expansion(const TimeSeriesGraph& tsg, const SvarParams& params,
                         const std::vector<VertexId>& x, const std::vector<VertexId>& y);
RatFn trek_system_function(const TimeSeriesGraph& tsg, const SvarParams& params,
                           const TrekSystem& t);

/// Random rational parameters satisfying the stability inequalities with
/// margin at least 1/10; deterministic per seed.
SvarParams sample_stable_params(const TimeSeriesGraph& tsg, std::uint64_t seed,
                                const Rational& magnitude_bound = Rational(1));

/// Max over `trials` sampled parameter sets of rank([S]_{X,Y}).
int generic_rank(const TimeSeriesGraph& tsg, VertexSet x, VertexSet y, int trials,
                 std::uint64_t seed);

/// Restriction of a time series graph (and its parameters) to a subset of edges.
TimeSeriesGraph restrict_edges(const TimeSeriesGraph& tsg, const std::vector<Edge>& keep);
SvarParams restrict_params(const TimeSeriesGraph& restricted, const SvarParams& params);

/// Labels of the observed vertices in id order.
std::vector<std::string> observed_labels(const ProcessGraph& g);

}  // namespace svarspec
