#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "stochlab/errors.hpp"
#include "stochlab/profile.hpp"

using namespace stochlab;
using std::numbers::pi;

namespace {

ModelManifold euclid(int m) { return ModelManifold(m, WarpingProfile::euclidean(), 100.0); }
ModelManifold hyper(int m) { return ModelManifold(m, WarpingProfile::hyperbolic(1.0), 50.0); }

}  // namespace

TEST_CASE("sigma_eval on symbolic profiles") {
  const Jet e = sigma_eval(WarpingProfile::euclidean(), 2.0);
  CHECK(e.value == 2.0);
  CHECK(e.d1 == 1.0);
  CHECK(e.d2 == 0.0);

  const Jet h = sigma_eval(WarpingProfile::hyperbolic(1.0), 0.5);
  CHECK(h.value == doctest::Approx(oracle::sinh_series(0.5)).epsilon(1e-14));
  CHECK(h.d1 == doctest::Approx(oracle::cosh_series(0.5)).epsilon(1e-14));
  CHECK(h.d2 == doctest::Approx(oracle::sinh_series(0.5)).epsilon(1e-14));
  CHECK(h.value == doctest::Approx(0.5211).epsilon(1e-4));
  CHECK(h.d1 == doctest::Approx(1.1276).epsilon(1e-4));
}

TEST_CASE("tabulated identity profile interpolates to 1e-6") {
  TabulatedSamples s;
  for (int i = 1; i <= 3000; ++i) {
    const double r = 1e-3 * i;
    s.r.push_back(r);
    s.sigma.push_back(r);
    s.dsigma.push_back(1.0);
    s.d2sigma.push_back(0.0);
  }
  const auto prof = WarpingProfile::tabulated(s);
  for (double r : {1.0, 1.0005, 2.3333}) {
    const Jet j = sigma_eval(prof, r);
    CHECK(std::abs(j.value - r) < 1e-6);
    CHECK(std::abs(j.d1 - 1.0) < 1e-6);
    CHECK(std::abs(j.d2) < 1e-6);
  }
  CHECK_THROWS_AS(sigma_eval(prof, 3.5), DomainError);
  CHECK_THROWS_AS(sigma_eval(prof, 1e-4), DomainError);
}

TEST_CASE("tabulated profile rejects inconsistent second derivative") {
  TabulatedSamples s;
  for (int i = 1; i <= 50; ++i) {
    const double r = 0.01 * i;
    s.r.push_back(r);
    s.sigma.push_back(r);
    s.dsigma.push_back(1.0);
    s.d2sigma.push_back(1.0);
  }
  CHECK_THROWS_AS(WarpingProfile::tabulated(s), PreconditionError);
}

TEST_CASE("tabulated sinh matches the symbolic hyperbolic profile") {
  TabulatedSamples s;
  for (int i = 1; i <= 4000; ++i) {
    const double r = 1e-3 * i;
    s.r.push_back(r);
    s.sigma.push_back(std::sinh(r));
    s.dsigma.push_back(std::cosh(r));
    s.d2sigma.push_back(std::sinh(r));
  }
  const auto tab = WarpingProfile::tabulated(s);
  const auto sym = WarpingProfile::hyperbolic(1.0);
  for (double r : {0.3, 1.2345, 3.9}) {
    const Jet a = sigma_eval(tab, r), b = sigma_eval(sym, r);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-9));
    CHECK(a.d1 == doctest::Approx(b.d1).epsilon(1e-9));
    CHECK(a.d2 == doctest::Approx(b.d2).epsilon(1e-6));
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(sigma_eval(WarpingProfile::euclidean(), 0.0), DomainError);
  CHECK_THROWS_AS(sigma_eval(WarpingProfile::euclidean(), -1.0), DomainError);
  CHECK_THROWS_AS(sphere_area(euclid(2), 101.0), DomainError);
  CHECK_THROWS_AS(ModelManifold(1, WarpingProfile::euclidean(), 1.0), PreconditionError);
  CHECK_THROWS_AS(ModelManifold(2, WarpingProfile::euclidean(), 0.0), PreconditionError);
  const ModelManifold m = euclid(2);
  const RadialFunction f = [](double r) { return Jet{r * r, 2 * r, 2}; };
  CHECK_THROWS_AS(radial_laplacian_apply(m, f, 0.0), DomainError);
}

TEST_CASE("sphere_area") {
  CHECK(sphere_area(euclid(2), 1.0) == doctest::Approx(2 * pi));
  CHECK(sphere_area(euclid(3), 2.0) == doctest::Approx(16 * pi));
  CHECK(sphere_area(hyper(2), 1.0) == doctest::Approx(2 * pi * oracle::sinh_series(1.0)));
  CHECK(sphere_area(hyper(2), 1.0) == doctest::Approx(7.3843).epsilon(1e-4));
}

TEST_CASE("unit sphere areas agree with the Gamma formula") {
  for (int m = 1; m <= 14; ++m) {
    const double gamma_formula = 2.0 * std::pow(pi, 0.5 * m) / std::tgamma(0.5 * m);
    CHECK(unit_sphere_area(m) == doctest::Approx(gamma_formula).epsilon(1e-13));
  }
}

TEST_CASE("ball_volume") {
  CHECK(std::abs(ball_volume(euclid(2), 1.0) - pi) < 1e-10);
  CHECK(std::abs(ball_volume(euclid(3), 1.0) - 4 * pi / 3) < 1e-10);
  // closed-form antiderivative of 2 pi sinh
  CHECK(ball_volume(hyper(2), 1.0) == doctest::Approx(2 * pi * (std::cosh(1.0) - 1.0)).epsilon(1e-12));
}

TEST_CASE("radial_curvature") {
  for (double r : {0.1, 1.0, 7.0}) {
    CHECK(radial_curvature(euclid(3), r) == 0.0);
    CHECK(radial_curvature(hyper(2), r) == doctest::Approx(-1.0));
  }
  // sigma = r exp(r^3): sigma''/sigma = 9 r^4 + 12 r, by hand differentiation.
  const ModelManifold pe(2, WarpingProfile::poly_exp(1.0, 3.0), 32.0);
  const double expected = -(9 * std::pow(2.0, 4) + 12 * 2.0);
  CHECK(radial_curvature(pe, 2.0) == doctest::Approx(expected));
  CHECK(radial_curvature(pe, 2.0) < 0.0);
  const double k3 = radial_curvature(pe, 3.0), k6 = radial_curvature(pe, 6.0);
  CHECK(k6 / k3 == doctest::Approx((9 * std::pow(6.0, 4) + 72) / (9 * std::pow(3.0, 4) + 36)));
}

TEST_CASE("radial_laplacian_apply") {
  const RadialFunction sq = [](double r) { return Jet{r * r, 2 * r, 2}; };
  CHECK(radial_laplacian_apply(euclid(2), sq, 1.7) == doctest::Approx(4.0));
  const RadialFunction inv = [](double r) { return Jet{1 / r, -1 / (r * r), 2 / (r * r * r)}; };
  CHECK(std::abs(radial_laplacian_apply(euclid(3), inv, 2.0)) < 1e-15);
  const RadialFunction ch = [](double r) { return Jet{std::cosh(r), std::sinh(r), std::cosh(r)}; };
  CHECK(radial_laplacian_apply(hyper(2), ch, 1.0) == doctest::Approx(2 * std::cosh(1.0)));
}

TEST_CASE("radial_laplacian_apply is linear") {
  const ModelManifold m(3, WarpingProfile::cusp(1.0, 3.0), 32.0);
  const RadialFunction f = [](double r) { return Jet{std::sin(r), std::cos(r), -std::sin(r)}; };
  const RadialFunction g = [](double r) { return Jet{r * r * r, 3 * r * r, 6 * r}; };
  const double a = 1.3, b = -0.7;
  const RadialFunction comb = [&](double r) {
    const Jet x = f(r), y = g(r);
    return Jet{a * x.value + b * y.value, a * x.d1 + b * y.d1, a * x.d2 + b * y.d2};
  };
  for (double r : {0.3, 0.75, 1.5, 2.5}) {
    const double lhs = radial_laplacian_apply(m, comb, r);
    const double rhs = a * radial_laplacian_apply(m, f, r) + b * radial_laplacian_apply(m, g, r);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("profile invariants across kinds") {
  const std::vector<WarpingProfile> profiles = {WarpingProfile::euclidean(), WarpingProfile::hyperbolic(2.0),
                                                WarpingProfile::poly_exp(1.0, 3.0), WarpingProfile::cusp(1.0, 3.0)};
  for (const auto& p : profiles) {
    const ModelManifold m(3, p, 5.0);
    // pole regularity
    const Jet near0 = p.eval(1e-6);
    CHECK(near0.value == doctest::Approx(1e-6).epsilon(1e-6));
    CHECK(near0.d1 == doctest::Approx(1.0).epsilon(1e-6));
    for (double r = 0.05; r <= 5.0; r += 0.05) {
      const Jet s = p.eval(r);
      CHECK(s.value > 0.0);
      CHECK(sphere_area(m, r) == doctest::Approx(unit_sphere_area(3) * std::pow(s.value, 2)).epsilon(1e-13));
      CHECK(std::exp(p.log_sigma(r)) == doctest::Approx(s.value).epsilon(1e-12));
      CHECK(p.log_derivative(r) == doctest::Approx(s.d1 / s.value).epsilon(1e-10));
    }
    // monotone quadrature sanity where S is nondecreasing
    if (p.kind() != ProfileKind::Cusp) {
      const double r1 = 1.0, r2 = 1.5;
      CHECK(ball_volume(m, r2) - ball_volume(m, r1) >= sphere_area(m, r1) * (r2 - r1));
    }
  }
}

TEST_CASE("blend is C2 across the joins") {
  for (const auto& p : {WarpingProfile::poly_exp(1.0, 3.0), WarpingProfile::cusp(1.0, 3.0)}) {
    for (double join : {0.5, 1.0}) {
      const Jet lo = p.eval(join - 1e-9), hi = p.eval(join + 1e-9);
      CHECK(lo.value == doctest::Approx(hi.value).epsilon(1e-7));
      CHECK(lo.d1 == doctest::Approx(hi.d1).epsilon(1e-7));
      CHECK(lo.d2 == doctest::Approx(hi.d2).epsilon(1e-6));
    }
    // sigma'' consistent with finite differences inside the blend
    for (double r : {0.6, 0.75, 0.9}) {
      const double h = 1e-4;
      const double fd = (p.eval(r + h).value - 2 * p.eval(r).value + p.eval(r - h).value) / (h * h);
      CHECK(p.eval(r).d2 == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("cartan_hadamard certification") {
  CHECK_NOTHROW(ModelManifold(3, WarpingProfile::hyperbolic(1.0), 20.0, true));
  CHECK_NOTHROW(ModelManifold(2, WarpingProfile::euclidean(), 20.0, true));
  CHECK_THROWS_AS(ModelManifold(2, WarpingProfile::cusp(1.0, 3.0), 5.0, true), PreconditionError);
}

TEST_CASE("log forms stay finite where sigma overflows") {
  const ModelManifold pe(2, WarpingProfile::poly_exp(1.0, 3.0), 32.0);
  CHECK(std::isfinite(pe.log_sphere_area(30.0)));
  CHECK(pe.radial_drift(30.0) == doctest::Approx(1.0 / 30 + 3 * 900.0));
  const ModelManifold cu(2, WarpingProfile::cusp(1.0, 3.0), 32.0);
  CHECK(std::isfinite(cu.log_sphere_area(30.0)));
  // V/S for r = ball/area in the Euclidean plane
  CHECK(volume_area_ratio(euclid(2), 3.0) == doctest::Approx(1.5).epsilon(1e-12));
  const double vs = volume_area_ratio(pe, 20.0);
  CHECK(vs > 0.0);
  CHECK(vs == doctest::Approx(1.0 / (3 * 400.0)).epsilon(0.01));
}
