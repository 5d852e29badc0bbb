#pragma once

// Tri-state verdicts for parabolicity, stochastic completeness and the Feller property.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stochlab/profile.hpp"
#include "stochlab/radial_solver.hpp"
#include "stochlab/tail_classifier.hpp"

namespace stochlab {

enum class Property { Parabolic, StochasticallyComplete, Feller };
enum class Outcome { Holds, Fails, Inconclusive };

std::string to_string(Property p);
std::string to_string(Outcome o);
Outcome parse_outcome(const std::string& s);

/// Registered criteria.
namespace method {
inline constexpr const char* kFlux = "grigoryan_flux";
inline constexpr const char* kKhasminskii = "khasminskii";
inline constexpr const char* kVolumeRatio = "volume_ratio";
inline constexpr const char* kMinimalSolution = "azencott_minimal_solution";
inline constexpr const char* kGraphFlux = "graph_flux";
inline constexpr const char* kHeatMass = "heat_kernel_mass";
inline constexpr const char* kGraphMinimalSolution = "graph_minimal_solution";
inline constexpr const char* kMonteCarlo = "monte_carlo";
}  // namespace method

bool is_registered_method(const std::string& name);

struct Evidence {
  std::string method;
  /// Headline number: integral value, divergence exponent, tail value or certificate infimum.
  double value = 0.0;
  std::vector<std::pair<std::string, double>> payload;
  std::string diagnostic;
};

struct Verdict {
  Property property;
  Outcome outcome;
  Evidence evidence;
  std::vector<Evidence> secondary;
};

/// Builds a verdict, enforcing that an Inconclusive outcome carries a diagnostic.
Verdict make_verdict(Property p, Outcome o, Evidence e, std::vector<Evidence> secondary = {});

/// S(r) v'(r).
double flux_through_sphere(const ModelManifold& model, const RadialFunction& v, double r);

/// Holds iff int_1^{r_max} dr/S(r) is Divergent.
Verdict parabolicity_verdict(const ModelManifold& model);

/// Primary: Khasminskii gamma. Secondary: int V/S dr. Disagreement gives Inconclusive.
Verdict stochastic_completeness_verdict(const ModelManifold& model, double lambda);

struct FellerOptions {
  double tail_tolerance = 1e-4;
  double stability = 0.1;
  double convergence_tolerance = 1e-6;
  double max_outer = 128.0;
};

/// Minimal-solution decay on the exhaustion R 2^n.
Verdict feller_verdict(const ModelManifold& model, double lambda, double R, const FellerOptions& opts = {});

struct SupersolutionReport {
  bool is_supersolution = false;
  bool comparison_holds = false;
  /// max(Delta u - lambda u) when u is not a super-solution, else max(h - u).
  double max_violation = 0.0;
};

SupersolutionReport supersolution_comparison_check(const ModelManifold& model, double lambda, double R,
                                                   const RadialFunction& u);

/// Monte-Carlo outcome for one property, as supplied by the simulation layer.
struct MonteCarloEvidence {
  Property property;
  Outcome outcome;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct AgreementEntry {
  Property property;
  Outcome analytic;
  Outcome monte_carlo;
  bool agrees;
};

struct CombinedReport {
  std::string model_id;
  Verdict parabolic;
  Verdict stochastic_completeness;
  Verdict feller;
  std::vector<AgreementEntry> agreement;
  std::vector<std::string> contradictions;

  const Verdict& get(Property p) const;
};

CombinedReport combined_report(const ModelManifold& model, double lambda, double R,
                               const std::vector<MonteCarloEvidence>& mc = {}, std::string model_id = {});

/// Flat key/value lines, one `key=value` per line.
std::string to_key_value(const CombinedReport& report);
/// Header for verdict CSV rows.
std::string verdict_csv_header();
/// One row per verdict: model id, property, outcome, method, evidence value.
std::string to_csv_row(const std::string& model_id, const Verdict& v);
std::string to_csv_rows(const CombinedReport& report);

}  // namespace stochlab
