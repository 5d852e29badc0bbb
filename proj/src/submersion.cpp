#include "stochlab/submersion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "stochlab/errors.hpp"
#include "stochlab/tail_classifier.hpp"

namespace stochlab {

ProductSubmersion::ProductSubmersion(WeightedGraph base_, WeightedGraph fiber_)
    : base(std::move(base_)), fiber(std::move(fiber_)) {
  base.validate();
  fiber.validate();
  total = product_graph(base, fiber);
}

std::vector<double> lift(const ProductSubmersion& sub, const std::vector<double>& u) {
  if (u.size() != static_cast<std::size_t>(sub.base.size())) throw PreconditionError("u must be defined on the base");
  std::vector<double> out(static_cast<std::size_t>(sub.total.size()));
  for (int v = 0; v < sub.total.size(); ++v) out[static_cast<std::size_t>(v)] = u[static_cast<std::size_t>(sub.project(v))];
  return out;
}

double lemma1_minimal_check(const ProductSubmersion& sub, const std::vector<double>& u) {
  const std::vector<double> lhs = graph_laplacian(sub.total, lift(sub, u));
  const std::vector<double> rhs = lift(sub, graph_laplacian(sub.base, u));
  double worst = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
  if (!(worst <= 1e-12)) {
    std::ostringstream msg;
    msg << "lifting does not commute with the Laplacian: residual " << worst;
    throw InternalError(msg.str());
  }
  return worst;
}

std::vector<double> solve_graph_exterior(const WeightedGraph& g, int inner, int outer, double lambda) {
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  if (!(inner >= 0 && outer > inner + 1)) throw PreconditionError("need inner + 1 < outer");
  std::vector<double> h(static_cast<std::size_t>(g.size()), 0.0);
  std::vector<int> unknown(static_cast<std::size_t>(g.size()), -1);
  int n = 0;
  for (int v = 0; v < g.size(); ++v) {
    if (g.layer(v) <= inner) h[static_cast<std::size_t>(v)] = 1.0;
    else if (g.layer(v) < outer) unknown[static_cast<std::size_t>(v)] = n++;
  }
  if (n == 0) return h;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int v = 0; v < g.size(); ++v) {
    const int i = unknown[static_cast<std::size_t>(v)];
    if (i < 0) continue;
    double diag = lambda * g.weight(v);
    for (const auto& e : g.neighbors(v)) {
      diag += e.c;
      const int j = unknown[static_cast<std::size_t>(e.to)];
      if (j >= 0) trip.emplace_back(i, j, -e.c);
      else rhs(i) += e.c * h[static_cast<std::size_t>(e.to)];
    }
    trip.emplace_back(i, i, diag);
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
  if (solver.info() != Eigen::Success) throw NumericError("exterior system factorization failed");
  const Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !x.allFinite()) throw NumericError("exterior system solve failed");
  for (int v = 0; v < g.size(); ++v) {
    const int i = unknown[static_cast<std::size_t>(v)];
    if (i >= 0) h[static_cast<std::size_t>(v)] = x(i);
  }
  return h;
}

std::vector<int> exhaustion_schedule(const GraphFamily& family) {
  const int inner = family.inner_layers();
  const int start = inner == 1 ? 4 : 2 * inner, limit = family.exhaustion_limit();
  std::vector<int> out;
  for (int n = start; n <= limit; n *= 2) out.push_back(n);
  if (out.size() < 5 && limit > start) {
    // Short horizons get five geometrically spaced outer layers instead.
    out.clear();
    for (int j = 0; j < 5; ++j) {
      const int n = static_cast<int>(std::lround(start * std::pow(double(limit) / start, j / 4.0)));
      if (out.empty() || n > out.back()) out.push_back(n);
    }
  }
  return out;
}

GraphExhaustion graph_minimal_solution(const GraphFamily& family, double lambda, double tolerance) {
  const int inner = family.inner_layers();
  GraphExhaustion ex;
  ex.schedule = exhaustion_schedule(family);
  if (ex.schedule.size() < 3) throw PreconditionError("graph horizon too small for three exhaustion steps");
  ex.graph = family.build(ex.schedule.back());

  for (std::size_t j = 0; j < ex.schedule.size(); ++j) {
    std::vector<double> h = solve_graph_exterior(ex.graph, inner, ex.schedule[j], lambda);
    for (double v : h)
      if (v < -1e-12 || v > 1.0 + 1e-12) throw InternalError("exterior solution left [0, 1]");
    if (j > 0) {
      const std::vector<double>& prev = ex.iterates.back();
      const int window = (inner + ex.schedule[j - 1]) / 2;
      double inc = 0.0, tail = 0.0;
      for (int v = 0; v < ex.graph.size(); ++v) {
        const auto i = static_cast<std::size_t>(v);
        if (h[i] < prev[i] - 1e-10) throw InternalError("exhaustion is not monotone");
        if (ex.graph.layer(v) <= window) inc = std::max(inc, h[i] - prev[i]);
        if (ex.graph.layer(v) == window) tail = std::max(tail, h[i]);
      }
      ex.increments.push_back(inc);
      ex.tail_history.push_back(tail);
    }
    ex.iterates.push_back(std::move(h));
  }
  ex.converged = ex.increments.back() < tolerance;
  return ex;
}

const Verdict& GraphTriple::get(Property p) const {
  switch (p) {
    case Property::Parabolic: return parabolic;
    case Property::StochasticallyComplete: return stochastic_completeness;
    case Property::Feller: return feller;
  }
  throw InternalError("unknown property");
}

namespace {

Verdict graph_parabolic(const GraphFamily& family) {
  const long k_hi = family.series_horizon() - 1;
  if (k_hi < 16) {
    Evidence e;
    e.method = method::kGraphFlux;
    e.payload = {{"k_hi", static_cast<double>(k_hi)}};
    e.diagnostic = "horizon too small for the flux series";
    return make_verdict(Property::Parabolic, Outcome::Inconclusive, e);
  }
  const TailClass t = classify_series([&family](long k) { return family.layer_resistance(k); }, 1, k_hi);
  Evidence e;
  e.method = method::kGraphFlux;
  e.value = t.classification == TailKind::Convergent ? t.value : t.fitted_exponent;
  e.payload = {{"fitted_exponent", t.fitted_exponent}, {"log_growth_exponent", t.log_growth_exponent},
               {"value", t.value}, {"k_lo", t.r_lo}, {"k_hi", t.r_hi},
               {"window_lo_value", t.window_lo_value}, {"window_hi_value", t.window_hi_value}};
  e.diagnostic = to_string(t.classification);
  if (!t.diagnostic.empty()) e.diagnostic += ": " + t.diagnostic;
  const Outcome o = t.classification == TailKind::Divergent    ? Outcome::Holds
                    : t.classification == TailKind::Convergent ? Outcome::Fails
                                                               : Outcome::Inconclusive;
  return make_verdict(Property::Parabolic, o, e);
}

Verdict graph_sc(const GraphFamily& family, const GraphVerdictOptions& opts, std::vector<int>& truncs,
                 std::vector<double>& masses) {
  truncs = family.truncations();
  const WeightedGraph g = family.build(truncs.back() + 1);
  masses.clear();
  for (int L : truncs) {
    const HeatKernel k = truncated_heat_kernel(g, layer_truncation(g, L), opts.t);
    masses.push_back(k.mass(k.position(0)));
  }
  Evidence e;
  e.method = method::kHeatMass;
  e.value = masses.back();
  e.payload = {{"t", opts.t}};
  for (std::size_t i = 0; i < truncs.size(); ++i)
    e.payload.emplace_back("mass_L" + std::to_string(truncs[i]), masses[i]);
  for (std::size_t i = 1; i < masses.size(); ++i) {
    if (masses[i] < masses[i - 1] - 1e-12) {
      e.diagnostic = "kernel mass decreased under a larger truncation";
      return make_verdict(Property::StochasticallyComplete, Outcome::Inconclusive, e);
    }
  }
  const std::size_t n = masses.size();
  const double d_prev = 1.0 - masses[n - 2], d_last = 1.0 - masses[n - 1];
  if (d_last <= opts.mass_tolerance) return make_verdict(Property::StochasticallyComplete, Outcome::Holds, e);
  if (d_last > opts.tail_tolerance && std::abs(d_prev / d_last - 1.0) <= opts.stability)
    return make_verdict(Property::StochasticallyComplete, Outcome::Fails, e);
  std::ostringstream msg;
  msg << "mass deficits " << d_prev << " and " << d_last << " neither vanished nor stabilized";
  e.diagnostic = msg.str();
  return make_verdict(Property::StochasticallyComplete, Outcome::Inconclusive, e);
}

Verdict graph_feller(const GraphExhaustion& ex, double lambda, const GraphVerdictOptions& opts) {
  Evidence e;
  e.method = method::kGraphMinimalSolution;
  const std::size_t n = ex.tail_history.size();
  e.value = ex.tail_history.back();
  e.payload = {{"lambda", lambda}, {"outer_layer", static_cast<double>(ex.schedule.back())},
               {"last_increment", ex.increments.back()}};
  for (std::size_t i = 0; i < n; ++i) e.payload.emplace_back("tail_" + std::to_string(i), ex.tail_history[i]);
  if (!ex.converged) {
    e.diagnostic = "exhaustion did not converge";
    return make_verdict(Property::Feller, Outcome::Inconclusive, e);
  }
  const double a = ex.tail_history[n - 2], b = ex.tail_history[n - 1];
  if (a < opts.tail_tolerance && b < opts.tail_tolerance) return make_verdict(Property::Feller, Outcome::Holds, e);
  if (a >= opts.tail_tolerance && b >= opts.tail_tolerance && std::abs(b / a - 1.0) <= opts.stability)
    return make_verdict(Property::Feller, Outcome::Fails, e);
  std::ostringstream msg;
  msg << "tail values " << a << " and " << b << " neither decayed nor stable";
  e.diagnostic = msg.str();
  return make_verdict(Property::Feller, Outcome::Inconclusive, e);
}

std::string outcome_line(const GraphTriple& t) {
  std::ostringstream os;
  os << t.family << ": Parabolic " << to_string(t.parabolic.outcome) << ", SC "
     << to_string(t.stochastic_completeness.outcome) << ", Feller " << to_string(t.feller.outcome);
  return os.str();
}

}  // namespace

GraphTriple graph_triple_verdicts(const GraphFamily& family, double lambda, const GraphVerdictOptions& opts) {
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  if (!(opts.t > 0.0)) throw PreconditionError("kernel time must be positive");
  GraphTriple out{family.name(), graph_parabolic(family), {}, {}, {}, {}, {}};
  out.stochastic_completeness = graph_sc(family, opts, out.truncations, out.masses);
  if (exhaustion_schedule(family).size() < 3) {
    Evidence e;
    e.method = method::kGraphMinimalSolution;
    e.payload = {{"lambda", lambda}, {"exhaustion_limit", static_cast<double>(family.exhaustion_limit())}};
    e.diagnostic = "horizon too small for three exhaustion steps";
    out.feller = make_verdict(Property::Feller, Outcome::Inconclusive, e);
    return out;
  }
  out.exhaustion = graph_minimal_solution(family, lambda, opts.convergence_tolerance);
  out.feller = graph_feller(out.exhaustion, lambda, opts);
  return out;
}

EquivalenceReport equivalence_suite(FamilyPtr base, const WeightedGraph& fiber, double lambda,
                                    const GraphVerdictOptions& opts) {
  const auto total = std::make_shared<ProductFamily>(base, fiber);
  EquivalenceReport r;
  r.name = total->name();
  r.fiber_volume = total->fiber_volume();
  r.base = graph_triple_verdicts(*base, lambda, opts);
  r.total = graph_triple_verdicts(*total, lambda, opts);
  r.verdicts_agree = true;
  for (Property p : {Property::Parabolic, Property::StochasticallyComplete, Property::Feller})
    if (r.base.get(p).outcome != r.total.get(p).outcome) r.verdicts_agree = false;

  // Flux relation on the exhaustion graphs.
  const ProductSubmersion sub(r.base.exhaustion.graph, fiber);
  r.flux_exact = true;
  const int top = std::min(sub.base.max_layer() - 1, 63);
  for (int k = 0; k <= top; ++k) {
    const double cb = layer_conductance(sub.base, k);
    const double ct = layer_conductance(sub.total, k);
    r.flux.push_back({k, cb, ct, ct / cb});
    if (!(ct == r.fiber_volume * cb)) r.flux_exact = false;
  }

  // Lifted exterior solutions against the independently solved total problems.
  r.lift_error = 0.0;
  const auto& bi = r.base.exhaustion.iterates;
  const auto& ti = r.total.exhaustion.iterates;
  if (bi.size() != ti.size() || r.total.exhaustion.graph.size() != sub.total.size())
    throw InternalError("base and total exhaustions are not aligned");
  for (std::size_t j = 0; j < bi.size(); ++j) {
    const std::vector<double> lifted = lift(sub, bi[j]);
    for (std::size_t v = 0; v < lifted.size(); ++v) r.lift_error = std::max(r.lift_error, std::abs(lifted[v] - ti[j][v]));
  }
  r.lemma1_error = lemma1_minimal_check(sub, bi.back());
  r.base_mass_deficit = 1.0 - r.base.masses.back();
  r.total_mass_deficit = 1.0 - r.total.masses.back();
  r.passed = r.verdicts_agree && r.flux_exact && r.lift_error <= 1e-12;

  std::ostringstream os;
  os.precision(12);
  os << outcome_line(r.base) << "\n" << outcome_line(r.total) << "\n";
  os << "vol(F)=" << r.fiber_volume << " flux_exact=" << (r.flux_exact ? "yes" : "no")
     << " lift_error=" << r.lift_error << " lemma1_error=" << r.lemma1_error
     << " mass_deficit base=" << r.base_mass_deficit << " total=" << r.total_mass_deficit << "\n";
  for (const GraphTriple* t : {&r.base, &r.total}) {
    for (Property p : {Property::Parabolic, Property::StochasticallyComplete, Property::Feller}) {
      const Verdict& v = t->get(p);
      os << "  " << t->family << " " << to_string(p) << " [" << v.evidence.method << "] value=" << v.evidence.value;
      for (const auto& [key, val] : v.evidence.payload) os << " " << key << "=" << val;
      if (!v.evidence.diagnostic.empty()) os << " (" << v.evidence.diagnostic << ")";
      os << "\n";
    }
  }
  r.evidence = os.str();
  return r;
}

FamilyPtr golden_discrete_hyperbolic() {
  return std::make_shared<DiscreteModelFamily>(ModelManifold(2, WarpingProfile::hyperbolic(1.0), 200.0), 0.2, 1.0,
                                               std::vector<int>{30, 40, 50});
}

FamilyPtr golden_discrete_polyexp() {
  return std::make_shared<DiscreteModelFamily>(ModelManifold(2, WarpingProfile::poly_exp(1.0, 3.0), 32.0), 0.2, 1.0,
                                               std::vector<int>{10, 15, 20});
}

FamilyPtr golden_discrete_euclidean() {
  return std::make_shared<DiscreteModelFamily>(ModelManifold(2, WarpingProfile::euclidean(), 1e6), 1.0, 1.0,
                                               std::vector<int>{10, 15, 20});
}

std::vector<EquivalenceReport> golden_equivalence_suites(double lambda) {
  std::vector<EquivalenceReport> out;
  out.push_back(equivalence_suite(std::make_shared<RadialChainFamily>(), cycle_graph(4), lambda));
  out.push_back(equivalence_suite(golden_discrete_hyperbolic(), cycle_graph(3), lambda));
  out.push_back(equivalence_suite(golden_discrete_polyexp(), path_graph(2), lambda));
  return out;
}

CounterexampleReport counterexample_suite(double lambda) {
  CounterexampleReport rep;
  GraphVerdictOptions opts;

  {
    CounterexampleCase c;
    c.name = "Z3 -> Z2 (fiber Z)";
    c.property = Property::Parabolic;
    const LatticeFamily base(2), total(3);
    c.base_family = base.name();
    c.total_family = total.name();
    c.base_outcome = graph_parabolic(base).outcome;
    c.total_outcome = graph_parabolic(total).outcome;
    c.expected_base = Outcome::Holds;
    c.expected_total = Outcome::Fails;
    c.passed = c.base_outcome == c.expected_base && c.total_outcome == c.expected_total;
    rep.cases.push_back(c);
  }
  {
    CounterexampleCase c;
    c.name = "SI x SC -> SC";
    c.property = Property::StochasticallyComplete;
    const FamilyPtr sc = golden_discrete_euclidean();
    const PairProductFamily total(golden_discrete_polyexp(), sc, {10, 15, 20});
    c.base_family = sc->name();
    c.total_family = total.name();
    std::vector<int> truncs;
    std::vector<double> masses;
    c.base_outcome = graph_sc(*sc, opts, truncs, masses).outcome;
    c.total_outcome = graph_sc(total, opts, truncs, masses).outcome;
    c.expected_base = Outcome::Holds;
    c.expected_total = Outcome::Fails;
    c.passed = c.base_outcome == c.expected_base && c.total_outcome == c.expected_total;
    rep.cases.push_back(c);
  }
  rep.control = equivalence_suite(std::make_shared<LatticeFamily>(2), cycle_graph(3), lambda);
  rep.passed = rep.control.passed;
  for (const auto& c : rep.cases) rep.passed = rep.passed && c.passed;
  return rep;
}

std::string to_string(const EquivalenceReport& r) {
  std::ostringstream os;
  os << "equivalence " << r.name << ": " << (r.passed ? "PASS" : "FAIL") << "\n" << r.evidence;
  return os.str();
}

std::string to_string(const CounterexampleReport& r) {
  std::ostringstream os;
  for (const auto& c : r.cases) {
    os << "counterexample " << c.name << " [" << to_string(c.property) << "]: base " << c.base_family << " "
       << to_string(c.base_outcome) << " (expected " << to_string(c.expected_base) << "), total " << c.total_family
       << " " << to_string(c.total_outcome) << " (expected " << to_string(c.expected_total) << ") -> "
       << (c.passed ? "PASS" : "FAIL") << "\n";
  }
  os << "control " << to_string(r.control);
  return os.str();
}

}  // namespace stochlab
