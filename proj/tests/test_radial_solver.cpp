#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "stochlab/errors.hpp"
#include "stochlab/radial_solver.hpp"

using namespace stochlab;

namespace {

ModelManifold euclid(int m, double r_max = 1e6) { return ModelManifold(m, WarpingProfile::euclidean(), r_max); }
ModelManifold hyper(int m) { return ModelManifold(m, WarpingProfile::hyperbolic(1.0), 200.0); }
ModelManifold poly_exp() { return ModelManifold(2, WarpingProfile::poly_exp(1.0, 3.0), 32.0); }
ModelManifold cusp() { return ModelManifold(2, WarpingProfile::cusp(1.0, 3.0), 32.0); }

// Exact truncated solution in R^3: R sinh(R_n - r) / (r sinh(R_n - R)).
double r3_truncated(double r, double R, double R_n) {
  return R * std::sinh(R_n - r) / (r * std::sinh(R_n - R));
}

}  // namespace

TEST_CASE("solve_truncated against Bessel and closed-form oracles") {
  const ExteriorProblem p2(euclid(2), 1.0, 1.0);
  const TruncatedSolution s2 = solve_truncated(p2, 30.0);
  CHECK(s2.values.front() == 1.0);
  CHECK(s2.value_at(1.0) == 1.0);
  const double k0 = oracle::bessel_k0(2.0) / oracle::bessel_k0(1.0);
  CHECK(k0 == doctest::Approx(0.27054).epsilon(1e-4));
  CHECK(std::abs(s2.value_at(2.0) - k0) < 1e-4);

  const ExteriorProblem p3(euclid(3), 1.0, 1.0);
  const TruncatedSolution s3 = solve_truncated(p3, 30.0);
  CHECK(std::abs(s3.value_at(2.0) - std::exp(-1.0) / 2) < 1e-4);
  CHECK(s3.residual_norm < 1e-10);
}

TEST_CASE("solve_truncated preconditions") {
  const ExteriorProblem p(euclid(2), 1.0, 1.0);
  CHECK_THROWS_AS(solve_truncated(p, 0.5), PreconditionError);
  CHECK_THROWS_AS(solve_truncated(p, 2.0, GridSpec{0.01, 10}), PreconditionError);
  CHECK_THROWS_AS(ExteriorProblem(euclid(2), 1.0, 0.0), PreconditionError);
  CHECK_THROWS_AS(ExteriorProblem(euclid(2, 5.0), 6.0, 1.0), PreconditionError);
}

TEST_CASE("discrete maximum principle holds exactly") {
  for (const auto& model : {euclid(2), euclid(3), hyper(2), hyper(4), poly_exp(), cusp()}) {
    for (double lambda : {0.1, 1.0, 5.0}) {
      const ExteriorProblem p(model, 1.0, lambda);
      const TruncatedSolution s = solve_truncated(p, 20.0);
      CHECK(s.grid.size() >= 64);
      for (double h : s.values) {
        CHECK(h >= 0.0);
        CHECK(h <= 1.0);
      }
      CHECK(s.values.back() == 0.0);
      if (model.profile().kind() != ProfileKind::Cusp && model.profile().kind() != ProfileKind::PolyExp) {
        for (std::size_t i = 1; i < s.values.size(); ++i) CHECK(s.values[i] <= s.values[i - 1]);
      }
    }
  }
}

TEST_CASE("second-order convergence under grid refinement") {
  const ExteriorProblem p(euclid(3), 1.0, 1.0);
  auto err = [&](double d) {
    const TruncatedSolution s = solve_truncated(p, 6.0, GridSpec{d, 64});
    double e = 0.0;
    for (std::size_t i = 0; i < s.grid.size(); ++i)
      e = std::max(e, std::abs(s.values[i] - r3_truncated(s.grid[i], 1.0, 6.0)));
    return e;
  };
  const double e1 = err(0.04), e2 = err(0.02), e3 = err(0.01);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("minimal solution in the Euclidean plane matches K0") {
  const ExteriorProblem p(euclid(2), 1.0, 1.0);
  const MinimalSolution ms = minimal_solution(p);
  CHECK(ms.converged);
  CHECK(ms.tail_value < 1e-6);
  const double k1 = oracle::bessel_k0(1.0);
  for (double r = 1.0; r <= 10.0; r += 0.25) CHECK(std::abs(ms.value_at(r) - oracle::bessel_k0(r) / k1) < 1e-4);
}

TEST_CASE("minimal solution on the hyperbolic plane decays at the characteristic rate") {
  const ExteriorProblem p(hyper(2), 1.0, 1.0);
  const MinimalSolution ms = minimal_solution(p);
  CHECK(ms.converged);
  CHECK(ms.tail_value < 1e-6);
  const double beta = (-1.0 - std::sqrt(5.0)) / 2.0;
  const double slope = (std::log(ms.value_at(10.0)) - std::log(ms.value_at(6.0))) / 4.0;
  CHECK(slope == doctest::Approx(beta).epsilon(1e-3));
}

TEST_CASE("minimal solution on the cusp stays bounded away from zero") {
  const ExteriorProblem p(cusp(), 1.0, 1.0);
  const MinimalSolution ms = minimal_solution(p);
  CHECK(ms.converged);
  CHECK(ms.tail_value > 0.1);
  const std::size_t n = ms.tail_history.size();
  CHECK(std::abs(ms.tail_history[n - 1] / ms.tail_history[n - 2] - 1.0) < 0.1);
  // Independent high-resolution solve on a larger domain agrees.
  const TruncatedSolution fine = solve_truncated(p, 24.0, GridSpec{0.0025, 64});
  CHECK(fine.value_at(8.0) == doctest::Approx(ms.value_at(8.0)).epsilon(1e-3));
}

TEST_CASE("exhaustion is monotone and dominated by the exponential super-solution") {
  for (const auto& model : {euclid(2), euclid(3), hyper(2), hyper(3)}) {
    for (double lambda : {0.5, 1.0, 2.0}) {
      const ExteriorProblem p(model, 1.0, lambda);
      const MinimalSolution ms = minimal_solution(p);
      for (std::size_t k = 1; k < ms.iterates.size(); ++k) {
        const auto& a = ms.iterates[k - 1];
        const auto& b = ms.iterates[k];
        for (std::size_t i = 0; i + 1 < a.grid.size(); ++i) {
          if (std::abs(a.grid[i] - b.grid[i]) > 1e-12) break;
          CHECK(b.values[i] >= a.values[i] - 1e-10);
        }
      }
      for (std::size_t i = 0; i < ms.grid.size(); ++i) {
        CHECK(ms.limit_values[i] > 0.0);
        CHECK(ms.limit_values[i] <= 1.0);
        CHECK(ms.limit_values[i] <= std::exp(-std::sqrt(lambda) * (ms.grid[i] - 1.0)) + 1e-8);
      }
    }
  }
}

TEST_CASE("schedule validation") {
  const ExteriorProblem p(euclid(2), 1.0, 1.0);
  CHECK_THROWS_AS(minimal_solution(p, {4.0, 2.0, 8.0}), PreconditionError);
  CHECK_THROWS_AS(minimal_solution(p, std::vector<double>{2.0}), PreconditionError);
  const ExteriorProblem small(euclid(2, 10.0), 1.0, 1.0);
  CHECK_THROWS_AS(minimal_solution(small, {2.0, 4.0, 20.0}), PreconditionError);
  const MinimalSolution short_run = minimal_solution(p, {1.5, 2.0}, 1e-12);
  CHECK_FALSE(short_run.converged);
}

TEST_CASE("Khasminskii function in the plane is I0") {
  const RadialFunctionEstimate g = khasminskii_solution(euclid(2), 1.0);
  CHECK(g.classification == Boundedness::Unbounded);
  CHECK(g.overflow_radius.has_value());
  CHECK(g.jet(2.0).value == doctest::Approx(oracle::bessel_i0(2.0)).epsilon(1e-9));
  CHECK(g.jet(2.0).value == doctest::Approx(2.2796).epsilon(1e-4));
  const Jet near0 = g.jet(1e-5);
  CHECK(near0.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(near0.d1) < 1e-5);
  CHECK(g.value(0) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(khasminskii_solution(euclid(2), 0.0), PreconditionError);
}

TEST_CASE("Khasminskii classification on golden models") {
  CHECK(khasminskii_solution(hyper(2), 1.0).classification == Boundedness::Unbounded);
  CHECK(khasminskii_solution(euclid(3), 1.0).classification == Boundedness::Unbounded);
  CHECK(khasminskii_solution(cusp(), 1.0).classification == Boundedness::Unbounded);
  for (double lambda : {0.5, 1.0, 2.0}) {
    const RadialFunctionEstimate g = khasminskii_solution(poly_exp(), lambda);
    CHECK(g.classification == Boundedness::Bounded);
    CHECK(std::isfinite(g.limit));
    CHECK(g.limit > 1.0);
    CHECK(g.growth_slope < 1e-3);
  }
}

TEST_CASE("Khasminskii function is nondecreasing") {
  for (const auto& model : {euclid(2), hyper(3), poly_exp(), cusp()}) {
    const RadialFunctionEstimate g = khasminskii_solution(model, 1.0);
    for (std::size_t i = 0; i < g.grid.size(); ++i) CHECK(g.derivative(i) >= -1e-12);
  }
}

TEST_CASE("Omori-Yau certificate") {
  const OYCertificate c = oy_certificate(poly_exp(), 1.0, 0.1);
  CHECK(c.inf_laplacian > 0.0);
  CHECK(c.predicted_inf == doctest::Approx(1.0 * (c.sup_u - 0.1)));
  CHECK(std::abs(c.inf_laplacian - c.predicted_inf) < 1e-6);
  CHECK(c.u.jet(c.r_eta).value == doctest::Approx(c.sup_u - 0.1).epsilon(1e-10));

  CHECK_THROWS_AS(oy_certificate(euclid(2), 1.0, 0.1), PreconditionError);
  // gamma is unbounded on the cusp, so no certificate exists there.
  CHECK_THROWS_AS(oy_certificate(cusp(), 1.0, 0.01), PreconditionError);
  CHECK_THROWS_AS(oy_certificate(poly_exp(), 1.0, 100.0), PreconditionError);
}
