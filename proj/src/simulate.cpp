#include "svarspec/simulate.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>

#include "svarspec/errors.hpp"

namespace svarspec {

namespace {

struct Term {
  std::size_t source;
  int lag;
  double coeff;
};

std::vector<std::size_t> label_indices(const SpectrumEstimate& est,
                                       const std::vector<std::string>& labels) {
  std::vector<std::size_t> out;
  for (const auto& l : labels) {
    auto it = std::find(est.labels.begin(), est.labels.end(), l);
    if (it == est.labels.end()) throw LabelError("unknown vertex '" + l + "' in estimate");
    out.push_back(static_cast<std::size_t>(it - est.labels.begin()));
  }
  return out;
}

Eigen::MatrixXcd block(const Eigen::MatrixXcd& m, const std::vector<std::size_t>& r,
                       const std::vector<std::size_t>& c) {
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(static_cast<Eigen::Index>(r[i]), static_cast<Eigen::Index>(c[j]));
  return out;
}

}  // namespace

SeriesSample simulate_series(const TimeSeriesGraph& tsg, const SvarParams& params,
                             std::size_t length, std::size_t burn_in, std::uint64_t seed,
                             const SimulationOptions& options) {
  const ProcessGraph& g = tsg.graph();
  if (options.allow_degenerate_noise) {
    SvarParams check = params;
    for (auto& w : check.noise) {
      if (w < 0) throw ParamError("noise variances must be nonnegative");
      w = 1;
    }
    validate_params(tsg, check);
  } else {
    validate_params(tsg, params);
  }
  if (!tsg.contemporaneous_acyclic()) {
    throw GraphError("the lag-0 edges form a cycle; the recursion is not well defined");
  }
  const std::size_t n = static_cast<std::size_t>(g.size());

  std::vector<std::vector<Term>> terms(n);
  std::vector<VertexSet> lag0_parents(n, 0);
  for (const auto& [key, c] : params.cross) {
    terms[static_cast<std::size_t>(key.edge.to)].push_back(
        {static_cast<std::size_t>(key.edge.from), key.lag, c.get_d()});
    if (key.lag == 0) lag0_parents[static_cast<std::size_t>(key.edge.to)] |= bit(key.edge.from);
  }
  for (const auto& [key, c] : params.autos) {
    terms[static_cast<std::size_t>(key.vertex)].push_back(
        {static_cast<std::size_t>(key.vertex), key.lag, c.get_d()});
  }
  std::vector<VertexId> order;
  VertexSet done = 0;
  while (order.size() < n) {
    for (VertexId v = 0; v < g.size(); ++v) {
      if (!contains(done, v) && (lag0_parents[static_cast<std::size_t>(v)] & ~done) == 0) {
        order.push_back(v);
        done |= bit(v);
        break;
      }
    }
  }
  std::vector<double> sd(n);
  for (std::size_t v = 0; v < n; ++v) sd[v] = std::sqrt(params.noise[v].get_d());

  const std::size_t pad = static_cast<std::size_t>(tsg.order());
  const std::size_t total = pad + burn_in + length;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(n));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> eta(n);
  for (std::size_t t = pad; t < total; ++t) {
    for (std::size_t v = 0; v < n; ++v) eta[v] = sd[v] * normal(rng);
    for (VertexId vid : order) {
      const auto v = static_cast<std::size_t>(vid);
      double val = eta[v];
      for (const Term& term : terms[v]) {
        val += term.coeff * x(static_cast<Eigen::Index>(t - static_cast<std::size_t>(term.lag)),
                              static_cast<Eigen::Index>(term.source));
      }
      x(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(v)) = val;
    }
  }

  SeriesSample out;
  out.length = length;
  const VertexSet keep = options.include_latent ? g.all() : g.observed();
  const auto cols = members(keep);
  out.labels = g.labels_of(keep);
  out.values.resize(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.values.col(static_cast<Eigen::Index>(j)) =
        x.col(cols[j]).tail(static_cast<Eigen::Index>(length));
  }
  if (!out.values.allFinite()) throw EstimationError("simulation produced non-finite values");
  return out;
}

SpectrumEstimate estimate_spectrum(const SeriesSample& series, const std::vector<double>& frequencies,
                                   std::size_t segment_length, double overlap) {
  const std::size_t len = series.length;
  if (segment_length < 2 || segment_length > len) {
    throw EstimationError("segment length " + std::to_string(segment_length) +
                          " must lie in [2, " + std::to_string(len) + "]");
  }
  if (!(overlap >= 0.0 && overlap < 1.0)) throw EstimationError("overlap must lie in [0, 1)");
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    if (frequencies[i] < 0.0 || frequencies[i] > std::numbers::pi) {
      throw EstimationError("frequencies must lie in [0, pi]");
    }
    if (i > 0 && frequencies[i] <= frequencies[i - 1]) {
      throw EstimationError("frequencies must be strictly increasing");
    }
  }
  const auto step = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(segment_length) * (1.0 - overlap))));
  const std::size_t segments = 1 + (len - segment_length) / step;

  const auto L = static_cast<Eigen::Index>(segment_length);
  Eigen::VectorXd window(L);
  for (Eigen::Index t = 0; t < L; ++t) {
    window(t) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) /
                                     static_cast<double>(L - 1));
  }
  const double norm = window.squaredNorm() * static_cast<double>(segments);
  const auto n = static_cast<Eigen::Index>(series.labels.size());

  SpectrumEstimate est;
  est.labels = series.labels;
  est.frequencies = frequencies;
  est.segments = segments;
  est.segment_length = segment_length;
  for (double theta : frequencies) {
    // d(theta) = sum_t w_t x(t) e^{i theta t}
    Eigen::VectorXcd kernel(L);
    for (Eigen::Index t = 0; t < L; ++t) kernel(t) = window(t) * std::polar(1.0, theta * static_cast<double>(t));
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t s = 0; s < segments; ++s) {
      const auto start = static_cast<Eigen::Index>(s * step);
      const Eigen::VectorXcd d =
          series.values.block(start, 0, L, n).cast<std::complex<double>>().transpose() * kernel;
      acc += d * d.adjoint();
    }
    acc /= norm;
    est.matrices.push_back(0.5 * (acc + acc.adjoint()));
  }
  return est;
}

Eigen::MatrixXcd evaluate_on_circle(const RatMatrix& s, double theta) {
  const auto zeta = std::polar(1.0, theta);
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(s.rows()), static_cast<Eigen::Index>(s.cols()));
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s(i, j).eval(zeta);
  return out;
}

double partial_coherence(const SpectrumEstimate& est, const std::vector<std::string>& x,
                         const std::vector<std::string>& y, const std::vector<std::string>& z) {
  const auto xi = label_indices(est, x), yi = label_indices(est, y), zi = label_indices(est, z);
  double worst = 0.0;
  for (std::size_t f = 0; f < est.matrices.size(); ++f) {
    const Eigen::MatrixXcd& m = est.matrices[f];
    Eigen::MatrixXcd cxy = block(m, xi, yi);
    Eigen::MatrixXcd cxx = block(m, xi, xi);
    Eigen::MatrixXcd cyy = block(m, yi, yi);
    if (!zi.empty()) {
      const Eigen::MatrixXcd szz = block(m, zi, zi);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(szz);
      const auto& sv = svd.singularValues();
      const double cond = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
      if (!(cond <= 1e12)) {
        throw EstimationError("conditioning block is ill-conditioned at frequency " +
                              std::to_string(est.frequencies[f]) + " (condition number " +
                              std::to_string(cond) + ")");
      }
      const auto solver = szz.fullPivLu();
      const Eigen::MatrixXcd sxz = block(m, xi, zi), szy = block(m, zi, yi);
      const Eigen::MatrixXcd syz = block(m, yi, zi), szx = block(m, zi, xi);
      cxy -= sxz * solver.solve(szy);
      cxx -= sxz * solver.solve(szx);
      cyy -= syz * solver.solve(szy);
    }
    for (Eigen::Index i = 0; i < cxy.rows(); ++i)
      for (Eigen::Index j = 0; j < cxy.cols(); ++j) {
        const double scale = std::sqrt(std::abs(cxx(i, i).real() * cyy(j, j).real()));
        const double value = scale > 0 ? std::abs(cxy(i, j)) / scale : 0.0;
        worst = std::max(worst, value);
      }
  }
  return worst;
}

bool empirical_ci_test(const SpectrumEstimate& est, const std::vector<std::string>& x,
                       const std::vector<std::string>& y, const std::vector<std::string>& z,
                       double threshold) {
  return partial_coherence(est, x, y, z) < threshold;
}

void write_series(std::ostream& os, const SeriesSample& s) {
  for (std::size_t j = 0; j < s.labels.size(); ++j) os << (j ? "\t" : "") << s.labels[j];
  os << "\n" << std::setprecision(17);
  for (Eigen::Index t = 0; t < s.values.rows(); ++t) {
    for (Eigen::Index j = 0; j < s.values.cols(); ++j) os << (j ? "\t" : "") << s.values(t, j);
    os << "\n";
  }
}

}  // namespace svarspec
