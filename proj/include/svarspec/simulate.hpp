#pragma once

// Time-domain simulation of an SVAR from its structural recursion and a
// Welch cross-spectral estimator. This is the only floating-point layer.

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "svarspec/graph.hpp"
#include "svarspec/ratlinalg.hpp"
#include "svarspec/svar.hpp"

namespace svarspec {

struct SeriesSample {
  std::vector<std::string> labels;
  std::size_t length = 0;
  Eigen::MatrixXd values;  // length x labels.size()
};

struct SimulationOptions {
  bool include_latent = false;
  /// Test-only: accept zero noise variances.
  bool allow_degenerate_noise = false;
};

/// X_v(t) = sum_u sum_k phi_{u,v}(k) X_u(t-k) + eta_v(t) with Gaussian noise
/// from std::mt19937_64 seeded with `seed`. Throws GraphError on a
/// contemporaneous cycle and ParamError on invalid parameters.
SeriesSample simulate_series(const TimeSeriesGraph& tsg, const SvarParams& params,
                             std::size_t length, std::size_t burn_in, std::uint64_t seed,
                             const SimulationOptions& options = {});

struct SpectrumEstimate {
  std::vector<std::string> labels;
  std::vector<double> frequencies;
  std::vector<Eigen::MatrixXcd> matrices;
  std::size_t segments = 0;
  std::size_t segment_length = 0;
  std::string window = "hann";
};

/// Welch estimate with a Hann window; `overlap` is the fraction of a segment
/// shared with the next one. Scaled so that white noise of variance w has
/// spectrum w. Throws EstimationError on invalid segmentation or frequencies.
SpectrumEstimate estimate_spectrum(const SeriesSample& series, const std::vector<double>& frequencies,
                                   std::size_t segment_length, double overlap = 0.5);

/// Evaluates an exact spectrum at z = e^{i theta}.
Eigen::MatrixXcd evaluate_on_circle(const RatMatrix& s, double theta);

/// max over frequencies of |C_xy| / sqrt(C_xx C_yy) for the conditional
/// cross-spectrum C given Z, compared against threshold. Throws
/// EstimationError when S_ZZ is ill-conditioned.
bool empirical_ci_test(const SpectrumEstimate& est, const std::vector<std::string>& x,
                       const std::vector<std::string>& y, const std::vector<std::string>& z,
                       double threshold);
double partial_coherence(const SpectrumEstimate& est, const std::vector<std::string>& x,
                         const std::vector<std::string>& y, const std::vector<std::string>& z);

void write_series(std::ostream& os, const SeriesSample& s);

}  // namespace svarspec
