#pragma once

// Rational identification of link functions from the spectrum: regression,
// instrumental variables and the latent-factor half-trek criterion, plus
// coefficient recovery and CPDAG discovery from a conditional independence
// oracle.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svarspec/graph.hpp"
#include "svarspec/ratlinalg.hpp"
#include "svarspec/svar.hpp"

namespace svarspec {

using EdgeFunctions = std::map<Edge, RatFn>;

/// h_{u,v} for u in pa_O(v) by solving sum_u S_{u,y} h_{u,v} = S_{v,y}, y in pa_O(v).
EdgeFunctions identify_regression(const ProcessGraph& g, const RatMatrix& s, VertexId v);
/// h_{v,w} = S_{w,u} / S_{v,u}. Throws IdentificationError when S_{v,u} = 0.
RatFn identify_instrument(const RatMatrix& s, const std::string& u, const std::string& v,
                          const std::string& w);

struct IdentificationSystem {
  RatMatrix a;  // rows Y, columns pa_O(v)
  RatMatrix b;  // rows Y, columns W
  std::vector<RatFn> g;
  std::vector<std::string> unknowns;  // pa_O(v) then W
};

/// Builds [A B] and g for vertex v and triple t. Throws IdentificationError
/// when a prerequisite link function is missing from `known`.
IdentificationSystem lfhtc_system_matrices(const ProcessGraph& g, const RatMatrix& s, VertexId v,
                                           const LfhtcTriple& t, const EdgeFunctions& known);

struct StepResult {
  IdentificationSystem system;
  EdgeFunctions solved;
  std::vector<RatFn> auxiliary;  // one per member of W
};

/// Solves the step. Throws SingularMatrixError on a non-generic system.
StepResult lfhtc_identify_step(const ProcessGraph& g, const RatMatrix& s, VertexId v,
                               const LfhtcTriple& t, const EdgeFunctions& known);

enum class StepMethod { regression, lfhtc };

struct CertificateStep {
  VertexId vertex;
  LfhtcTriple triple;
  StepMethod method;
  IdentificationSystem system;
  EdgeFunctions solved;
  std::vector<RatFn> auxiliary;
};

struct IdentificationCertificate {
  std::vector<CertificateStep> steps;
  std::vector<Edge> unresolved;  // observed edges without a formula
  EdgeFunctions all_solved() const;
};

/// Runs lfhtc_order and executes each step against s.
IdentificationCertificate identify_all(const ProcessGraph& g, const RatMatrix& s);
/// Re-executes the steps of a certificate against a spectrum.
EdgeFunctions replay_certificate(const ProcessGraph& g, const RatMatrix& s,
                                 const IdentificationCertificate& cert);

struct SampledIdentification {
  IdentificationCertificate certificate;
  SvarParams params;
  std::uint64_t seed_used;
  std::vector<std::string> warnings;
};

/// Samples parameters, computes the spectrum and identifies; resamples (with
/// derived seeds) up to `max_resamples` times on singular systems.
SampledIdentification identify_sampled(const TimeSeriesGraph& tsg, std::uint64_t seed,
                                       int max_resamples = 3);

struct LagRecovery {
  std::map<int, Rational> cross;  // phi_{v,w}(k)
  std::map<int, Rational> autos;  // phi_{w,w}(k), k >= 1
  bool recoverable = true;
  std::string note;
};

/// Reads lag coefficients off h after normalizing the denominator's constant
/// term to one. With expected lag sets, a representation whose degrees cannot
/// carry them (a cancelled common factor) is flagged as not recoverable.
/// Throws IdentificationError when den(0) = 0.
LagRecovery recover_lag_coefficients(const RatFn& h,
                                     const std::vector<int>* expected_cross = nullptr,
                                     const std::vector<int>* expected_auto = nullptr);
/// True iff phi_{v,w} and 1 - phi_{w,w} are coprime (nonzero resultant).
bool lag_pair_recoverable(const Poly& phi_vw, const Poly& phi_ww);

using CiOracle = std::function<bool(VertexSet, VertexSet, VertexSet)>;

struct Cpdag {
  int n = 0;
  std::vector<Edge> directed;    // from -> to
  std::vector<Edge> undirected;  // from < to
  std::vector<std::string> report;
  friend bool operator==(const Cpdag& a, const Cpdag& b) {
    return a.n == b.n && a.directed == b.directed && a.undirected == b.undirected;
  }
};

/// PC skeleton search, v-structures and Meek rules over vertices 0..n-1.
Cpdag discover_cpdag(const CiOracle& ci, int n);
/// CPDAG of a DAG computed directly from its v-structures and Meek rules.
Cpdag dag_to_cpdag(const ProcessGraph& g);
/// S_{X,Y|Z} = 0 on the given spectrum (labels index the observed vertices).
CiOracle spectral_ci_oracle(const ProcessGraph& g, const RatMatrix& s);

}  // namespace svarspec
