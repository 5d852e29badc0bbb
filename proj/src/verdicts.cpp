#include "stochlab/verdicts.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "stochlab/errors.hpp"

namespace stochlab {

std::string to_string(Property p) {
  switch (p) {
    case Property::Parabolic: return "Parabolic";
    case Property::StochasticallyComplete: return "StochasticallyComplete";
    case Property::Feller: return "Feller";
  }
  return "?";
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Holds: return "Holds";
    case Outcome::Fails: return "Fails";
    case Outcome::Inconclusive: return "Inconclusive";
  }
  return "?";
}

Outcome parse_outcome(const std::string& s) {
  if (s == "Holds") return Outcome::Holds;
  if (s == "Fails") return Outcome::Fails;
  if (s == "Inconclusive") return Outcome::Inconclusive;
  throw PreconditionError("unknown outcome '" + s + "'");
}

bool is_registered_method(const std::string& name) {
  for (const char* m : {method::kFlux, method::kKhasminskii, method::kVolumeRatio, method::kMinimalSolution,
                        method::kGraphFlux, method::kHeatMass, method::kGraphMinimalSolution, method::kMonteCarlo}) {
    if (name == m) return true;
  }
  return false;
}

Verdict make_verdict(Property p, Outcome o, Evidence e, std::vector<Evidence> secondary) {
  if (!is_registered_method(e.method)) throw InternalError("unregistered criterion '" + e.method + "'");
  if (o == Outcome::Inconclusive && e.diagnostic.empty()) throw InternalError("Inconclusive verdict without diagnostic");
  return Verdict{p, o, std::move(e), std::move(secondary)};
}

double flux_through_sphere(const ModelManifold& model, const RadialFunction& v, double r) {
  return sphere_area(model, r) * v(r).d1;
}

namespace {

double classifier_start(const ModelManifold& model) { return std::min(1.0, model.r_max() / 8.0); }

Evidence tail_evidence(const char* name, const TailClass& t) {
  Evidence e;
  e.method = name;
  e.value = t.classification == TailKind::Convergent ? t.value : t.fitted_exponent;
  e.payload = {{"fitted_exponent", t.fitted_exponent},
               {"log_growth_exponent", t.log_growth_exponent},
               {"value", t.value},
               {"error_bound", t.error_bound},
               {"r_lo", t.r_lo},
               {"r_hi", t.r_hi},
               {"window_lo_value", t.window_lo_value},
               {"window_hi_value", t.window_hi_value}};
  e.diagnostic = to_string(t.classification);
  if (!t.diagnostic.empty()) e.diagnostic += ": " + t.diagnostic;
  return e;
}

}  // namespace

Verdict parabolicity_verdict(const ModelManifold& model) {
  const auto inv_area = [&model](double r) { return std::exp(-model.log_sphere_area(r)); };
  const TailClass t = classify_improper_integral(inv_area, classifier_start(model), model.r_max());
  const Outcome o = t.classification == TailKind::Divergent    ? Outcome::Holds
                    : t.classification == TailKind::Convergent ? Outcome::Fails
                                                               : Outcome::Inconclusive;
  return make_verdict(Property::Parabolic, o, tail_evidence(method::kFlux, t));
}

Verdict stochastic_completeness_verdict(const ModelManifold& model, double lambda) {
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  const RadialFunctionEstimate g = khasminskii_solution(model, lambda);
  Evidence primary;
  primary.method = method::kKhasminskii;
  primary.value = g.growth_slope;
  primary.payload = {{"lambda", lambda}, {"growth_slope", g.growth_slope}, {"r_end", g.r_end}};
  if (g.overflow_radius) primary.payload.emplace_back("overflow_radius", *g.overflow_radius);
  primary.diagnostic = to_string(g.classification);
  Outcome o_primary = Outcome::Inconclusive;
  if (g.classification == Boundedness::Unbounded) o_primary = Outcome::Holds;
  if (g.classification == Boundedness::Bounded) {
    o_primary = Outcome::Fails;
    primary.payload.emplace_back("sup_gamma", g.limit);
    const double eta = std::min(0.1, 0.5 * (g.limit - 1.0));
    const OYCertificate cert = oy_certificate(model, lambda, eta);
    primary.value = cert.inf_laplacian;
    primary.payload.emplace_back("oy_eta", cert.eta);
    primary.payload.emplace_back("oy_r_eta", cert.r_eta);
    primary.payload.emplace_back("oy_inf_laplacian", cert.inf_laplacian);
    primary.payload.emplace_back("oy_predicted_inf", cert.predicted_inf);
  }

  const auto ratio = [&model](double r) {
    const double v = volume_area_ratio(model, r);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  const TailClass t = classify_improper_integral(ratio, classifier_start(model), model.r_max());
  Evidence secondary = tail_evidence(method::kVolumeRatio, t);
  const Outcome o_secondary = t.classification == TailKind::Divergent    ? Outcome::Holds
                              : t.classification == TailKind::Convergent ? Outcome::Fails
                                                                         : Outcome::Inconclusive;

  if (o_primary != Outcome::Inconclusive && o_secondary != Outcome::Inconclusive && o_primary != o_secondary) {
    primary.diagnostic = "method disagreement: khasminskii " + to_string(o_primary) + ", volume_ratio " +
                         to_string(o_secondary);
    return make_verdict(Property::StochasticallyComplete, Outcome::Inconclusive, primary, {secondary});
  }
  if (o_primary == Outcome::Inconclusive) primary.diagnostic = "Khasminskii function growth inconclusive";
  return make_verdict(Property::StochasticallyComplete, o_primary, primary, {secondary});
}

Verdict feller_verdict(const ModelManifold& model, double lambda, double R, const FellerOptions& opts) {
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  if (!(R > 0.0) || !(R < model.r_max() / 4.0)) throw PreconditionError("Feller test needs 0 < R < r_max/4");
  const ExteriorProblem problem(model, R, lambda);
  const MinimalSolution ms =
      minimal_solution(problem, default_schedule(problem, opts.max_outer), opts.convergence_tolerance);

  Evidence e;
  e.method = method::kMinimalSolution;
  e.value = ms.tail_value;
  e.payload = {{"lambda", lambda}, {"R", R}, {"outer_radius", ms.iterates.back().R_n},
               {"last_increment", ms.increments.back()}};
  const std::size_t n = ms.tail_history.size();
  for (std::size_t i = 0; i < n; ++i) e.payload.emplace_back("tail_" + std::to_string(i), ms.tail_history[i]);

  if (!ms.converged) {
    e.diagnostic = "exhaustion did not converge";
    return make_verdict(Property::Feller, Outcome::Inconclusive, e);
  }
  if (n < 2) {
    e.diagnostic = "fewer than two exhaustion steps";
    return make_verdict(Property::Feller, Outcome::Inconclusive, e);
  }
  const double a = ms.tail_history[n - 2], b = ms.tail_history[n - 1];
  if (a < opts.tail_tolerance && b < opts.tail_tolerance) return make_verdict(Property::Feller, Outcome::Holds, e);
  if (a >= opts.tail_tolerance && b >= opts.tail_tolerance && std::abs(b / a - 1.0) <= opts.stability)
    return make_verdict(Property::Feller, Outcome::Fails, e);
  std::ostringstream msg;
  msg << "tail values " << a << " and " << b << " neither decayed nor stable";
  e.diagnostic = msg.str();
  return make_verdict(Property::Feller, Outcome::Inconclusive, e);
}

SupersolutionReport supersolution_comparison_check(const ModelManifold& model, double lambda, double R,
                                                   const RadialFunction& u) {
  const Jet uR = u(R);
  if (!(uR.value >= 1.0)) throw PreconditionError("super-solution must satisfy u(R) >= 1");
  const ExteriorProblem problem(model, R, lambda);
  const MinimalSolution ms = minimal_solution(problem, default_schedule(problem));

  SupersolutionReport rep;
  double worst = -std::numeric_limits<double>::infinity();
  for (double r : ms.grid) {
    const Jet j = u(r);
    if (!(j.value > 0.0)) throw PreconditionError("super-solution must be positive");
    const double defect = radial_laplacian_apply(model, u, r) - lambda * j.value;
    worst = std::max(worst, defect / std::max(1.0, lambda * j.value));
  }
  rep.is_supersolution = worst <= 1e-12;
  if (!rep.is_supersolution) {
    rep.max_violation = worst;
    return rep;
  }
  double gap = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ms.grid.size(); ++i) gap = std::max(gap, ms.limit_values[i] - u(ms.grid[i]).value);
  rep.max_violation = gap;
  rep.comparison_holds = gap <= 1e-8;
  return rep;
}

const Verdict& CombinedReport::get(Property p) const {
  switch (p) {
    case Property::Parabolic: return parabolic;
    case Property::StochasticallyComplete: return stochastic_completeness;
    case Property::Feller: return feller;
  }
  throw InternalError("unknown property");
}

CombinedReport combined_report(const ModelManifold& model, double lambda, double R,
                               const std::vector<MonteCarloEvidence>& mc, std::string model_id) {
  CombinedReport rep{model_id.empty() ? model.describe() : std::move(model_id),
                     parabolicity_verdict(model),
                     stochastic_completeness_verdict(model, lambda),
                     feller_verdict(model, lambda, R),
                     {},
                     {}};
  for (const Verdict* v : {&rep.parabolic, &rep.stochastic_completeness, &rep.feller}) {
    if (v->outcome == Outcome::Inconclusive && v->evidence.diagnostic.rfind("method disagreement", 0) == 0)
      rep.contradictions.push_back(to_string(v->property) + ": " + v->evidence.diagnostic);
  }
  for (const MonteCarloEvidence& m : mc) {
    const Outcome a = rep.get(m.property).outcome;
    const bool agrees = a == Outcome::Inconclusive || m.outcome == Outcome::Inconclusive || a == m.outcome;
    rep.agreement.push_back({m.property, a, m.outcome, agrees});
    if (!agrees)
      rep.contradictions.push_back(to_string(m.property) + ": analytic " + to_string(a) + " vs monte_carlo " +
                                   to_string(m.outcome));
  }
  return rep;
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

std::string key_of(Property p) {
  switch (p) {
    case Property::Parabolic: return "parabolic";
    case Property::StochasticallyComplete: return "stochastic_completeness";
    case Property::Feller: return "feller";
  }
  return "?";
}

void write_evidence(std::ostream& os, const std::string& prefix, const Evidence& e) {
  os << prefix << ".method=" << e.method << '\n';
  os << prefix << ".value=" << fmt(e.value) << '\n';
  for (const auto& [k, v] : e.payload) os << prefix << '.' << k << '=' << fmt(v) << '\n';
  if (!e.diagnostic.empty()) os << prefix << ".diagnostic=" << e.diagnostic << '\n';
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_key_value(const CombinedReport& report) {
  std::ostringstream os;
  os << "model=" << report.model_id << '\n';
  for (const Verdict* v : {&report.parabolic, &report.stochastic_completeness, &report.feller}) {
    const std::string k = key_of(v->property);
    os << k << ".outcome=" << to_string(v->outcome) << '\n';
    write_evidence(os, k, v->evidence);
    for (std::size_t i = 0; i < v->secondary.size(); ++i)
      write_evidence(os, k + ".secondary" + std::to_string(i), v->secondary[i]);
  }
  for (const AgreementEntry& a : report.agreement) {
    os << "agreement." << key_of(a.property) << '=' << (a.agrees ? "agree" : "contradict") << " (analytic "
       << to_string(a.analytic) << ", monte_carlo " << to_string(a.monte_carlo) << ")\n";
  }
  os << "contradictions=" << report.contradictions.size() << '\n';
  for (std::size_t i = 0; i < report.contradictions.size(); ++i)
    os << "contradiction." << i << '=' << report.contradictions[i] << '\n';
  return os.str();
}

std::string verdict_csv_header() { return "model_id,property,outcome,method,evidence_value\n"; }

std::string to_csv_row(const std::string& model_id, const Verdict& v) {
  return csv_field(model_id) + ',' + to_string(v.property) + ',' + to_string(v.outcome) + ',' + v.evidence.method +
         ',' + fmt(v.evidence.value) + '\n';
}

std::string to_csv_rows(const CombinedReport& report) {
  return to_csv_row(report.model_id, report.parabolic) + to_csv_row(report.model_id, report.stochastic_completeness) +
         to_csv_row(report.model_id, report.feller);
}

}  // namespace stochlab
