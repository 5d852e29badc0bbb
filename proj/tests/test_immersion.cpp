#include <cmath>

#include "doctest.h"
#include "stochlab/errors.hpp"
#include "stochlab/immersion.hpp"

using namespace stochlab;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

const RadialFunction rho_sq = [](double r) { return Jet{r * r, 2.0 * r, 2.0}; };
const RadialFunction rho_id = [](double r) { return Jet{r, 1.0, 0.0}; };

ImmersedPatch plane_patch() {
  ImmersedPatch p{"plane", ModelManifold(3, WarpingProfile::euclidean(), 1e6, true), v2(-1, -1), v2(1, 1), {}, {}, {}};
  p.phi = [](const Vec& u) { return v3(u[0], u[1], 1.0); };
  return p;
}

// Closed-form sum of principal curvatures of z = h(x, y) with h = 1 + x^2 + y^2.
double graph_mean_curvature(double x, double y) {
  const double hx = 2 * x, hy = 2 * y, hxx = 2, hyy = 2, hxy = 0;
  return ((1 + hy * hy) * hxx - 2 * hx * hy * hxy + (1 + hx * hx) * hyy) / std::pow(1 + hx * hx + hy * hy, 1.5);
}

// Image of the upper half-space point (a, b, z) in normal coordinates about (0, 0, 1),
// through the Poincare ball.
Vec horosphere_oracle(double a, double b, double z) {
  const double D = a * a + b * b + (z + 1) * (z + 1);
  const Vec w = v3(2 * a / D, 2 * b / D, (1 - a * a - b * b - z * z) / D);
  return 2.0 * std::atanh(w.norm()) * w / w.norm();
}

}  // namespace

TEST_CASE("induced forms") {
  SUBCASE("plane in R^3") {
    const InducedGeometry g = induced_geometry(plane_patch(), v2(0.3, -0.2));
    CHECK((g.form - Mat::Identity(2, 2)).norm() <= 1e-12);
  }
  SUBCASE("sphere of radius 2 carries four times the round metric") {
    const ImmersedPatch p = sphere_patch(2.0);
    for (const Vec& u : p.sample_grid(3)) {
      const InducedGeometry g = induced_geometry(p, u);
      CHECK(g.form(0, 0) == doctest::Approx(4.0 * std::pow(std::sin(u[1]), 2)).epsilon(1e-13));
      CHECK(g.form(1, 1) == doctest::Approx(4.0).epsilon(1e-13));
      CHECK(std::abs(g.form(0, 1)) <= 1e-13);
    }
  }
  SUBCASE("geodesic slice carries the hyperbolic plane metric") {
    const ImmersedPatch p = geodesic_slice_patch();
    const WarpingProfile h2 = WarpingProfile::hyperbolic(1.0);
    for (const Vec& u : p.sample_grid(4)) {
      const InducedGeometry g = induced_geometry(p, u);
      CHECK(g.form(0, 0) == doctest::Approx(std::pow(sigma_eval(h2, u[1]).value, 2)).epsilon(1e-12));
      CHECK(g.form(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("frames are orthonormal in the ambient metric") {
    for (const ImmersedPatch& p : golden_patches()) {
      for (const Vec& u : p.sample_grid(3)) {
        const InducedGeometry g = induced_geometry(p, u);
        const Mat gram = g.frame.transpose() * ambient_metric(p.ambient, g.point) * g.frame;
        CHECK((gram - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-8);
      }
    }
  }
}

TEST_CASE("degenerate immersions and the pole are rejected") {
  ImmersedPatch p = plane_patch();
  p.phi = [](const Vec& u) { return v3(u[0], u[0], 1.0 + u[1] * 0.0); };
  CHECK_THROWS_AS(induced_geometry(p, v2(0.1, 0.1)), DomainError);
  ImmersedPatch q = plane_patch();
  q.phi = [](const Vec& u) { return v3(u[0], u[1], 0.0); };
  CHECK_THROWS_AS(induced_geometry(q, v2(0.0, 0.0)), DomainError);
}

TEST_CASE("ambient connection") {
  const ModelManifold r3(3, WarpingProfile::euclidean(), 1e6);
  CHECK(ambient_connection(r3, v3(1, 2, 3), v3(1, 0, 0), v3(0, 1, 1)).norm() == 0.0);

  // Christoffel symbols from central differences of the metric.
  const ModelManifold h3(3, WarpingProfile::hyperbolic(1.0), 200.0);
  const Vec y = v3(0.4, -0.7, 0.9);
  const Vec v = v3(0.3, 1.0, -0.5), w = v3(-1.2, 0.2, 0.6);
  const double e = 1e-5;
  std::vector<Mat> dg;
  for (int c = 0; c < 3; ++c) {
    Vec a = y, b = y;
    a[c] += e;
    b[c] -= e;
    dg.push_back((ambient_metric(h3, a) - ambient_metric(h3, b)) / (2 * e));
  }
  Vec low = Vec::Zero(3);
  for (int l = 0; l < 3; ++l)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        low[l] += 0.5 * v[a] * w[b] * (dg[static_cast<std::size_t>(a)](b, l) + dg[static_cast<std::size_t>(b)](a, l) -
                                       dg[static_cast<std::size_t>(l)](a, b));
  const Vec oracle = ambient_metric(h3, y).inverse() * low;
  CHECK((ambient_connection(h3, y, v, w) - oracle).norm() <= 1e-8);
}

TEST_CASE("mean curvature of golden patches") {
  SUBCASE("geodesic slice is totally geodesic") {
    const ImmersedPatch p = geodesic_slice_patch();
    for (const Vec& u : p.sample_grid()) CHECK(mean_curvature(p, u).norm <= 1e-6);
  }
  SUBCASE("sphere of radius 2 has |H| = 1 pointing inward") {
    const ImmersedPatch p = sphere_patch(2.0);
    for (const Vec& u : p.sample_grid(4)) {
      const MeanCurvatureSample m = mean_curvature(p, u);
      CHECK(m.norm == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(m.H.dot(m.point) / m.point.norm() == doctest::Approx(-1.0).epsilon(1e-12));
    }
  }
  SUBCASE("horosphere has |H| = 2") {
    const ImmersedPatch p = horosphere_patch(2.0);
    for (const Vec& u : p.sample_grid(4)) CHECK(std::abs(mean_curvature(p, u).norm - 2.0) <= 1e-4);
  }
  SUBCASE("graph surface matches the closed form") {
    const ImmersedPatch p = graph_surface_patch();
    for (const Vec& u : p.sample_grid(5))
      CHECK(mean_curvature(p, u).norm == doctest::Approx(graph_mean_curvature(u[0], u[1])).epsilon(1e-12));
  }
  SUBCASE("H is normal") {
    for (const ImmersedPatch& p : golden_patches())
      for (const Vec& u : p.sample_grid()) CHECK(mean_curvature(p, u).normality <= 1e-6);
  }
  SUBCASE("finite differences agree with the exact derivatives") {
    for (const ImmersedPatch& p : golden_patches()) {
      const ImmersedPatch fd = finite_difference_copy(p, 1e-3);
      for (const Vec& u : p.sample_grid(3)) {
        const MeanCurvatureSample a = mean_curvature(p, u), b = mean_curvature(fd, u);
        CHECK((a.H - b.H).norm() <= 1e-6);
        CHECK(b.refinement_delta > 0.0);
      }
    }
  }
}

TEST_CASE("horosphere parametrization matches the half-space model") {
  const ImmersedPatch p = horosphere_patch(2.0);
  for (const Vec& u : p.sample_grid(3)) {
    const double a = u[1] * std::cos(u[0]), b = u[1] * std::sin(u[0]);
    CHECK((p.phi(u) - horosphere_oracle(a, b, 2.0)).norm() <= 1e-12);
  }
}

TEST_CASE("unstable finite differences raise") {
  ImmersedPatch p = plane_patch();
  p.phi = [](const Vec& u) { return v3(u[0], u[1], 1.0 + std::pow(std::abs(u[0]), 2.5)); };
  CHECK_THROWS_AS(mean_curvature(p, v2(0.0, 0.0)), NumericError);
}

TEST_CASE("mean curvature supremum") {
  CHECK(mean_curvature_supremum(geodesic_slice_patch()).value <= 1e-6);
  CHECK(std::abs(mean_curvature_supremum(horosphere_patch(2.0)).value - 2.0) <= 1e-4);
  const Supremum s = mean_curvature_supremum(graph_surface_patch());
  CHECK(s.value == doctest::Approx(4.0).epsilon(1e-3));
  CHECK(s.value >= s.coarse);
  CHECK(s.refinement_delta <= 1e-3);
  const Supremum fd = mean_curvature_supremum(finite_difference_copy(sphere_patch(2.0), 1e-3));
  CHECK(fd.value >= fd.coarse);
}

TEST_CASE("composed Laplacian") {
  SUBCASE("geodesic slice at rho = 1 against the hyperbolic plane") {
    const ImmersedPatch p = geodesic_slice_patch();
    const Vec u = v2(0.5, 1.0);
    const CompositionCheck c = laplacian_composition_check(p, rho_sq, u);
    const double oracle = radial_laplacian_apply(ModelManifold(2, WarpingProfile::hyperbolic(1.0), 200.0), rho_sq, 1.0);
    CHECK(std::abs(c.mean_curvature_term) <= 1e-12);
    CHECK(c.residual <= 1e-5);
    CHECK(std::abs(c.lhs - oracle) <= 1e-5);
    CHECK(std::abs(c.rhs - oracle) <= 1e-10);
  }
  SUBCASE("constant functions give zero on both sides") {
    const RadialFunction one = [](double) { return Jet{3.0, 0.0, 0.0}; };
    for (const ImmersedPatch& p : golden_patches()) {
      const CompositionCheck c = laplacian_composition_check(p, one, (p.lo + p.hi) / 2);
      CHECK(c.lhs == 0.0);
      CHECK(c.rhs == 0.0);
    }
  }
  SUBCASE("sphere of radius 2 with g = rho cancels") {
    const CompositionCheck c = laplacian_composition_check(sphere_patch(2.0), rho_id, v2(0.4, 1.3));
    CHECK(std::abs(c.lhs) <= 1e-8);
    CHECK(c.hessian_term == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.mean_curvature_term == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(c.residual <= 1e-8);
  }
  SUBCASE("residual decays at second order on every golden patch") {
    for (const ImmersedPatch& p : golden_patches()) {
      const RadialFunction& g = p.name.rfind("sphere", 0) == 0 ? rho_id : rho_sq;
      const CompositionConvergence cv = composition_convergence(p, g, 1e-3);
      INFO(p.name << " coarse " << cv.residual_coarse << " fine " << cv.residual_fine);
      CHECK(cv.ratio >= 3.5);
      CHECK(cv.ratio <= 4.5);
    }
  }
}

TEST_CASE("supersolution chain") {
  SUBCASE("minimal slice") {
    const ChainReport r = supersolution_chain_check(geodesic_slice_patch(), 1.0, 1.0);
    CHECK(r.mu == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.all_hold);
    CHECK(r.fraction_holding == 1.0);
    for (const ChainSample& s : r.samples) CHECK(s.slack_first > 0.1);
  }
  SUBCASE("horosphere") {
    const ChainReport r = supersolution_chain_check(horosphere_patch(2.0), 1.0, 0.5);
    CHECK(std::abs(r.mu - 3.0) <= 1e-4);
    CHECK(r.all_hold);
  }
  SUBCASE("graph surface and sphere in flat space") {
    CHECK(supersolution_chain_check(graph_surface_patch(), 2.0, 0.5).all_hold);
    CHECK(supersolution_chain_check(sphere_patch(2.0), 1.0, 1.0).all_hold);
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(supersolution_chain_check(sphere_patch(2.0), 1.0, 3.0), PreconditionError);
    CHECK_THROWS_AS(supersolution_chain_check(geodesic_slice_patch(), 0.0, 1.0), PreconditionError);
    ImmersedPatch p = geodesic_slice_patch();
    p.ambient = ModelManifold(3, WarpingProfile::hyperbolic(1.0), 200.0, false);
    CHECK_THROWS_AS(supersolution_chain_check(p, 1.0, 1.0), PreconditionError);
  }
}

TEST_CASE("theta shifts leave every check unchanged") {
  for (const ImmersedPatch& p : golden_patches()) {
    const ImmersedPatch q = theta_shift(p, 0.9);
    INFO(p.name);
    for (const Vec& u : p.sample_grid(3)) {
      CHECK(std::abs(mean_curvature(p, u).norm - mean_curvature(q, u).norm) <= 1e-10);
      const RadialFunction& g = rho_sq;
      CHECK(std::abs(laplacian_composition_check(p, g, u).residual - laplacian_composition_check(q, g, u).residual) <= 1e-8);
    }
    const ChainReport a = supersolution_chain_check(p, 1.0, 0.5), b = supersolution_chain_check(q, 1.0, 0.5);
    CHECK(std::abs(a.mu - b.mu) <= 1e-10);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(std::abs(a.samples[i].slack_first - b.samples[i].slack_first) <= 1e-8);
      CHECK(std::abs(a.samples[i].slack_second - b.samples[i].slack_second) <= 1e-8);
    }
  }
}
