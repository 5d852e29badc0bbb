#pragma once

// Discrete Riemannian submersions: product graphs with finite fibers, lifting,
// the minimal-fiber divergence identity, and base/total verdict comparisons.

#include <string>
#include <vector>

#include "stochlab/graph.hpp"
#include "stochlab/heat_kernel.hpp"
#include "stochlab/verdicts.hpp"

namespace stochlab {

struct ProductSubmersion {
  ProductSubmersion(WeightedGraph base, WeightedGraph fiber);

  WeightedGraph base;
  WeightedGraph fiber;
  WeightedGraph total;

  int project(int v) const { return v / fiber.size(); }
  int vertex(int x, int q) const { return x * fiber.size() + q; }
  double fiber_volume() const { return total_weight(fiber); }
};

/// u o pi.
std::vector<double> lift(const ProductSubmersion& sub, const std::vector<double>& u);

/// max over total vertices of |Delta_total lift(u) - lift(Delta_base u)|.
/// InternalError when it exceeds 1e-12.
double lemma1_minimal_check(const ProductSubmersion& sub, const std::vector<double>& u);

/// Solves (Delta - lambda) h = 0 on layers inner < layer < outer with h = 1 on
/// layers <= inner and h = 0 on layers >= outer (sparse LDLT).
std::vector<double> solve_graph_exterior(const WeightedGraph& g, int inner, int outer, double lambda);

/// Iterates of the exterior problems on a common graph, build(schedule.back()).
struct GraphExhaustion {
  std::vector<int> schedule;
  WeightedGraph graph;
  std::vector<std::vector<double>> iterates;
  /// max of iterate j on the layer (inner + schedule[j-1]) / 2, for j >= 1.
  std::vector<double> tail_history;
  std::vector<double> increments;
  bool converged = false;
};

/// Outer layers inner * 2^j up to the exhaustion limit (from 4 when inner = 1), or five
/// geometrically spaced layers when fewer than five doublings fit.
std::vector<int> exhaustion_schedule(const GraphFamily& family);

/// PreconditionError when the schedule has fewer than three outer layers.
GraphExhaustion graph_minimal_solution(const GraphFamily& family, double lambda, double tolerance = 1e-6);

struct GraphVerdictOptions {
  double t = 1.0;
  double tail_tolerance = 1e-4;
  double stability = 0.1;
  double mass_tolerance = 1e-6;
  double convergence_tolerance = 1e-6;
};

struct GraphTriple {
  std::string family;
  Verdict parabolic;
  Verdict stochastic_completeness;
  Verdict feller;
  /// Root kernel mass at each truncation.
  std::vector<int> truncations;
  std::vector<double> masses;
  GraphExhaustion exhaustion;

  const Verdict& get(Property p) const;
};

/// Parabolic: divergence of sum_k 1/C_k. SC: root kernel mass at time t over three
/// truncations (Holds when within mass_tolerance of 1, Fails when the deficit is
/// above tail_tolerance and stable across the last two). Feller: exterior exhaustion.
/// Horizons too short for the flux series or the exhaustion give Inconclusive.
GraphTriple graph_triple_verdicts(const GraphFamily& family, double lambda, const GraphVerdictOptions& opts = {});

struct FluxRow {
  int k;
  double base;
  double total;
  double ratio;
};

struct EquivalenceReport {
  std::string name;
  double fiber_volume = 0.0;
  GraphTriple base;
  GraphTriple total;
  bool verdicts_agree = false;
  std::vector<FluxRow> flux;
  /// Every flux ratio equals vol(F) bit for bit.
  bool flux_exact = false;
  /// max |h_total - lift(h_base)| over all exhaustion iterates.
  double lift_error = 0.0;
  /// max |Delta_total lift(u) - lift(Delta_base u)| for u = base minimal solution.
  double lemma1_error = 0.0;
  double base_mass_deficit = 0.0;
  double total_mass_deficit = 0.0;
  bool passed = false;
  std::string evidence;
};

EquivalenceReport equivalence_suite(FamilyPtr base, const WeightedGraph& fiber, double lambda,
                                    const GraphVerdictOptions& opts = {});

/// Builtin cases: radial chain x cycle(4), discrete H^2 x cycle(3), discrete PolyExp x path(2).
std::vector<EquivalenceReport> golden_equivalence_suites(double lambda = 1.0);

struct CounterexampleCase {
  std::string name;
  Property property;
  std::string base_family;
  std::string total_family;
  Outcome base_outcome;
  Outcome total_outcome;
  Outcome expected_base;
  Outcome expected_total;
  bool passed = false;
};

struct CounterexampleReport {
  std::vector<CounterexampleCase> cases;
  /// Compact-fiber control Z^2 x cycle(3).
  EquivalenceReport control;
  bool passed = false;
};

/// Z^3 -> Z^2 (non-compact fiber Z) for parabolicity, and SI x SC -> SC for
/// stochastic completeness.
CounterexampleReport counterexample_suite(double lambda = 1.0);

FamilyPtr golden_discrete_hyperbolic();
FamilyPtr golden_discrete_polyexp();
FamilyPtr golden_discrete_euclidean();

std::string to_string(const EquivalenceReport& r);
std::string to_string(const CounterexampleReport& r);

}  // namespace stochlab
