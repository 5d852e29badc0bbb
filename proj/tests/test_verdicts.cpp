#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stochlab/errors.hpp"
#include "stochlab/verdicts.hpp"

using namespace stochlab;
using std::numbers::pi;

namespace {

ModelManifold euclid(int m, double r_max = 1e6) { return ModelManifold(m, WarpingProfile::euclidean(), r_max); }
ModelManifold hyper(int m, double k = 1.0, double r_max = 200.0) {
  return ModelManifold(m, WarpingProfile::hyperbolic(k), r_max);
}
ModelManifold poly_exp(double r_max = 32.0) { return ModelManifold(2, WarpingProfile::poly_exp(1.0, 3.0), r_max); }
ModelManifold cusp(double r_max = 32.0) { return ModelManifold(2, WarpingProfile::cusp(1.0, 3.0), r_max); }

std::vector<ModelManifold> golden() { return {euclid(2), euclid(3), hyper(2), poly_exp(), cusp()}; }

RadialFunction exp_decay(double rate, double R) {
  return [rate, R](double r) {
    const double v = std::exp(-rate * (r - R));
    return Jet{v, -rate * v, rate * rate * v};
  };
}

}  // namespace

TEST_CASE("flux_through_sphere") {
  const RadialFunction id = [](double) { return Jet{0, 1, 0}; };
  CHECK(flux_through_sphere(euclid(2), id, 1.0) == doctest::Approx(2 * pi));
  CHECK(flux_through_sphere(euclid(3), id, 2.0) == doctest::Approx(16 * pi));
  const RadialFunction newton = [](double r) { return Jet{-1 / r, 1 / (r * r), -2 / (r * r * r)}; };
  for (double r : {0.5, 2.0, 17.0}) CHECK(flux_through_sphere(euclid(3), newton, r) == doctest::Approx(4 * pi));
  CHECK_THROWS_AS(flux_through_sphere(euclid(3, 10.0), id, 11.0), DomainError);
}

TEST_CASE("parabolicity verdicts") {
  const Verdict r2 = parabolicity_verdict(euclid(2));
  CHECK(r2.outcome == Outcome::Holds);
  CHECK(r2.evidence.method == method::kFlux);
  CHECK(parabolicity_verdict(euclid(3)).outcome == Outcome::Fails);
  const Verdict h2 = parabolicity_verdict(hyper(2));
  CHECK(h2.outcome == Outcome::Fails);
  // int_1^inf dr/(2 pi sinh r) = -log tanh(1/2) / (2 pi)
  CHECK(h2.evidence.value == doctest::Approx(-std::log(std::tanh(0.5)) / (2 * pi)).epsilon(1e-6));
  CHECK(parabolicity_verdict(poly_exp()).outcome == Outcome::Fails);
  CHECK(parabolicity_verdict(cusp()).outcome == Outcome::Holds);
}

TEST_CASE("parabolicity is monotone in the profile") {
  // sigma_1 >= sigma_2 eventually and model_2 non-parabolic => model_1 never Holds.
  const std::vector<std::pair<ModelManifold, ModelManifold>> pairs = {
      {hyper(2, 2.0), hyper(2, 1.0)}, {poly_exp(), hyper(2, 1.0, 32.0)}, {hyper(3), euclid(3)},
      {euclid(4), euclid(3)}};
  for (const auto& [big, small] : pairs) {
    REQUIRE(parabolicity_verdict(small).outcome == Outcome::Fails);
    CHECK(parabolicity_verdict(big).outcome != Outcome::Holds);
  }
}

TEST_CASE("stochastic completeness verdicts") {
  CHECK(stochastic_completeness_verdict(euclid(2), 1.0).outcome == Outcome::Holds);
  CHECK(stochastic_completeness_verdict(hyper(2), 1.0).outcome == Outcome::Holds);
  CHECK(stochastic_completeness_verdict(cusp(), 1.0).outcome == Outcome::Holds);
  const Verdict pe = stochastic_completeness_verdict(poly_exp(), 1.0);
  REQUIRE(pe.outcome == Outcome::Fails);
  CHECK(pe.evidence.method == method::kKhasminskii);
  CHECK(pe.evidence.value > 0.0);  // inf of Delta u over Omega_eta
  REQUIRE(pe.secondary.size() == 1);
  CHECK(pe.secondary[0].method == method::kVolumeRatio);
  CHECK(pe.secondary[0].diagnostic.rfind("Convergent", 0) == 0);
  CHECK_THROWS_AS(stochastic_completeness_verdict(euclid(2), -1.0), PreconditionError);
}

TEST_CASE("stochastic completeness does not depend on lambda") {
  for (const auto& m : golden()) {
    const Outcome ref = stochastic_completeness_verdict(m, 1.0).outcome;
    CHECK(ref != Outcome::Inconclusive);
    for (double lambda : {0.5, 2.0}) CHECK(stochastic_completeness_verdict(m, lambda).outcome == ref);
  }
}

TEST_CASE("Feller verdicts") {
  CHECK(feller_verdict(hyper(2), 1.0, 1.0).outcome == Outcome::Holds);
  const Verdict e2 = feller_verdict(euclid(2), 1.0, 1.0);
  CHECK(e2.outcome == Outcome::Holds);
  CHECK(e2.evidence.value < 1e-4);
  const Verdict c = feller_verdict(cusp(), 1.0, 1.0);
  CHECK(c.outcome == Outcome::Fails);
  CHECK(c.evidence.value > 0.0);
  CHECK(feller_verdict(poly_exp(), 1.0, 1.0).outcome == Outcome::Holds);
  CHECK_THROWS_AS(feller_verdict(euclid(2, 3.0), 1.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(feller_verdict(euclid(2), 0.0, 1.0), PreconditionError);
}

TEST_CASE("Feller verdict across the lambda grid") {
  for (const auto& m : golden()) {
    const Outcome ref = feller_verdict(m, 1.0, 1.0).outcome;
    for (double lambda : {0.5, 2.0}) CHECK(feller_verdict(m, lambda, 1.0).outcome == ref);
  }
}

TEST_CASE("non-converged exhaustion is Inconclusive") {
  FellerOptions opts;
  opts.convergence_tolerance = 1e-300;
  opts.max_outer = 8.0;
  const Verdict v = feller_verdict(euclid(2), 0.01, 1.0, opts);
  CHECK(v.outcome == Outcome::Inconclusive);
  CHECK_FALSE(v.evidence.diagnostic.empty());
}

TEST_CASE("verdicts are stable when the horizon doubles") {
  const std::vector<std::pair<ModelManifold, ModelManifold>> pairs = {
      {euclid(2, 1e6), euclid(2, 2e6)}, {euclid(3, 1e6), euclid(3, 2e6)}, {hyper(2, 1.0, 100.0), hyper(2, 1.0, 200.0)},
      {poly_exp(16.0), poly_exp(32.0)}, {cusp(16.0), cusp(32.0)}};
  auto flip = [](Outcome a, Outcome b) {
    return (a == Outcome::Holds && b == Outcome::Fails) || (a == Outcome::Fails && b == Outcome::Holds);
  };
  for (const auto& [a, b] : pairs) {
    CHECK_FALSE(flip(parabolicity_verdict(a).outcome, parabolicity_verdict(b).outcome));
    CHECK_FALSE(flip(stochastic_completeness_verdict(a, 1.0).outcome, stochastic_completeness_verdict(b, 1.0).outcome));
    CHECK_FALSE(flip(feller_verdict(a, 1.0, 1.0).outcome, feller_verdict(b, 1.0, 1.0).outcome));
  }
}

TEST_CASE("supersolution comparison") {
  const SupersolutionReport h = supersolution_comparison_check(hyper(2), 1.0, 1.0, exp_decay(1.0, 1.0));
  CHECK(h.is_supersolution);
  CHECK(h.comparison_holds);
  CHECK(h.max_violation <= 1e-8);

  const RadialFunction one = [](double) { return Jet{1, 0, 0}; };
  const SupersolutionReport c = supersolution_comparison_check(euclid(2), 1.0, 1.0, one);
  CHECK(c.is_supersolution);
  CHECK(c.comparison_holds);

  const SupersolutionReport f = supersolution_comparison_check(euclid(2), 1.0, 1.0, exp_decay(2.0, 1.0));
  CHECK_FALSE(f.is_supersolution);
  CHECK(f.max_violation > 0.0);

  CHECK_THROWS_AS(supersolution_comparison_check(euclid(2), 1.0, 1.0, exp_decay(1.0, 0.0)), PreconditionError);
}

TEST_CASE("comparison holds wherever the super-solution test passes") {
  for (const auto& m : {euclid(2), euclid(3), hyper(2), hyper(3)}) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      for (double rate : {0.25, 0.5, std::sqrt(lambda), 2.0}) {
        const SupersolutionReport rep = supersolution_comparison_check(m, lambda, 1.0, exp_decay(rate, 1.0));
        if (rep.is_supersolution) {
          CHECK(rep.comparison_holds);
          CHECK(rep.max_violation <= 1e-8);
        }
      }
    }
  }
}

TEST_CASE("combined reports on golden models") {
  const CombinedReport r2 = combined_report(euclid(2), 1.0, 1.0);
  CHECK(r2.parabolic.outcome == Outcome::Holds);
  CHECK(r2.stochastic_completeness.outcome == Outcome::Holds);
  CHECK(r2.feller.outcome == Outcome::Holds);
  const CombinedReport r3 = combined_report(euclid(3), 1.0, 1.0);
  CHECK(r3.parabolic.outcome == Outcome::Fails);
  CHECK(r3.stochastic_completeness.outcome == Outcome::Holds);
  CHECK(r3.feller.outcome == Outcome::Holds);
  const CombinedReport pe = combined_report(poly_exp(), 1.0, 1.0);
  CHECK(pe.parabolic.outcome == Outcome::Fails);
  CHECK(pe.stochastic_completeness.outcome == Outcome::Fails);
  CHECK(pe.feller.outcome == Outcome::Holds);
  CHECK(pe.contradictions.empty());
}

TEST_CASE("Monte-Carlo agreement matrix flags contradictions") {
  const std::vector<MonteCarloEvidence> mc = {{Property::StochasticallyComplete, Outcome::Holds, 0.3, 0.01},
                                              {Property::Feller, Outcome::Holds, 0.01, 0.01}};
  const CombinedReport pe = combined_report(poly_exp(), 1.0, 1.0, mc, "polyexp");
  REQUIRE(pe.agreement.size() == 2);
  CHECK_FALSE(pe.agreement[0].agrees);
  CHECK(pe.agreement[1].agrees);
  CHECK(pe.contradictions.size() == 1);
}

TEST_CASE("report serialization") {
  const CombinedReport r = combined_report(euclid(3), 1.0, 1.0, {}, "R3");
  const std::string kv = to_key_value(r);
  CHECK(kv.find("model=R3\n") == 0);
  CHECK(kv.find("parabolic.outcome=Fails\n") != std::string::npos);
  CHECK(kv.find("feller.method=azencott_minimal_solution\n") != std::string::npos);
  const std::string csv = to_csv_rows(r);
  CHECK(csv.find("R3,Parabolic,Fails,grigoryan_flux,") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(verdict_csv_header() == "model_id,property,outcome,method,evidence_value\n");
  CHECK(to_csv_row("a,b", r.feller).rfind("\"a,b\",", 0) == 0);
}

TEST_CASE("verdict invariants") {
  CHECK_THROWS_AS(make_verdict(Property::Feller, Outcome::Inconclusive, Evidence{method::kFlux, 0, {}, ""}),
                  InternalError);
  CHECK_THROWS_AS(make_verdict(Property::Feller, Outcome::Holds, Evidence{"made_up", 0, {}, ""}), InternalError);
  for (const auto& m : golden()) {
    const CombinedReport r = combined_report(m, 1.0, 1.0);
    for (Property p : {Property::Parabolic, Property::StochasticallyComplete, Property::Feller}) {
      const Verdict& v = r.get(p);
      CHECK(is_registered_method(v.evidence.method));
      if (v.outcome == Outcome::Inconclusive) CHECK_FALSE(v.evidence.diagnostic.empty());
    }
  }
}
