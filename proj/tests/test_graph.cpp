#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "stochlab/errors.hpp"
#include "stochlab/graph.hpp"
#include "stochlab/heat_kernel.hpp"
#include "stochlab/submersion.hpp"

using namespace stochlab;

namespace {

ModelManifold euclid2() { return ModelManifold(2, WarpingProfile::euclidean(), 1e6); }

// Edges between l1 spheres of radius k and k+1, counted by brute force.
double brute_layer_edges(int d, int k) {
  const int n = k + 1;
  std::vector<int> x(static_cast<std::size_t>(d), -n);
  double count = 0.0;
  while (true) {
    int norm = 0;
    for (int c : x) norm += std::abs(c);
    if (norm == k) {
      for (int i = 0; i < d; ++i) {
        for (int s : {-1, 1}) {
          int moved = norm - std::abs(x[static_cast<std::size_t>(i)]) + std::abs(x[static_cast<std::size_t>(i)] + s);
          if (moved == k + 1) count += 1.0;
        }
      }
    }
    int i = 0;
    while (i < d && ++x[static_cast<std::size_t>(i)] > n) x[static_cast<std::size_t>(i++)] = -n;
    if (i == d) break;
  }
  return count;
}

std::vector<FamilyPtr> golden_families() {
  return {std::make_shared<LatticeFamily>(2), std::make_shared<LatticeFamily>(3),
          std::make_shared<RadialChainFamily>(), golden_discrete_hyperbolic(), golden_discrete_polyexp(),
          golden_discrete_euclidean()};
}

}  // namespace

TEST_CASE("Laplacian annihilates constants") {
  const std::vector<WeightedGraph> graphs = {path_graph(6), cycle_graph(5), complete_graph(4), lattice_ball(2, 4),
                                             discrete_model(euclid2(), 0.5, 10)};
  for (const auto& g : graphs) {
    const std::vector<double> one(static_cast<std::size_t>(g.size()), 1.0);
    for (double v : graph_laplacian(g, one)) CHECK(v == 0.0);
  }
}

TEST_CASE("Laplacian on a path evaluates directly") {
  const WeightedGraph g = path_graph(3);
  CHECK(graph_laplacian_apply(g, {0.0, 1.0, 4.0}, 1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(graph_laplacian_apply(g, {0.0, 1.0, 4.0}, 0) == doctest::Approx(1.0));
}

TEST_CASE("Laplacian is linear") {
  const WeightedGraph g = lattice_ball(2, 5);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> f(static_cast<std::size_t>(g.size())), h(f.size()), mix(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = u(rng);
    h[i] = u(rng);
    mix[i] = 2.0 * f[i] - 3.0 * h[i];
  }
  const auto lf = graph_laplacian(g, f), lh = graph_laplacian(g, h), lm = graph_laplacian(g, mix);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(lm[i] == doctest::Approx(2.0 * lf[i] - 3.0 * lh[i]).epsilon(1e-12));
}

TEST_CASE("discrete plane Laplacian of r^2 is 4") {
  for (double h : {0.2, 0.1}) {
    const WeightedGraph g = discrete_model(euclid2(), h, 60);
    std::vector<double> f(static_cast<std::size_t>(g.size()));
    for (int v = 0; v < g.size(); ++v) f[static_cast<std::size_t>(v)] = std::pow(g.layer(v) * h, 2);
    for (int v : {5, 20, 50}) CHECK(std::abs(graph_laplacian_apply(g, f, v) - 4.0) <= h * h);
  }
}

TEST_CASE("isolated vertex and disconnected graphs are rejected") {
  WeightedGraph g;
  g.add_vertex(1.0);
  g.add_vertex(1.0);
  CHECK_THROWS_AS(graph_laplacian_apply(g, {0.0, 1.0}, 0), DomainError);
  CHECK_THROWS_AS(g.validate(), PreconditionError);
  CHECK_THROWS_AS(g.add_edge(0, 0, 1.0), PreconditionError);
  CHECK_THROWS_AS(g.add_edge(0, 1, -1.0), PreconditionError);
}

TEST_CASE("lattice balls have the expected sizes and layer conductances") {
  for (int n : {1, 3, 6}) CHECK(lattice_ball(2, n).size() == 2 * n * n + 2 * n + 1);
  for (int d : {1, 2, 3, 4}) {
    const int n = d == 4 ? 4 : 7;
    const WeightedGraph g = lattice_ball(d, n);
    for (int k = 0; k < n; ++k) {
      CHECK(layer_conductance(g, k) == lattice_layer_conductance(d, k));
      CHECK(lattice_layer_conductance(d, k) == brute_layer_edges(d, k));
    }
  }
  CHECK(lattice_layer_conductance(2, 10) == 84.0);  // 8k + 4
}

TEST_CASE("family resistances match the built graphs") {
  for (const FamilyPtr& f : golden_families()) {
    const int n = std::min(f->horizon(), 30);
    const WeightedGraph g = f->build(n);
    INFO(f->name());
    for (int k = 0; k < n; ++k) CHECK(1.0 / f->layer_resistance(k) == doctest::Approx(layer_conductance(g, k)).epsilon(1e-12));
  }
  const PairProductFamily pair(golden_discrete_polyexp(), golden_discrete_euclidean(), {10, 15, 20});
  const WeightedGraph g = pair.build(20);
  for (int k = 0; k < 20; ++k) CHECK(1.0 / pair.layer_resistance(k) == doctest::Approx(layer_conductance(g, k)).epsilon(1e-12));
}

TEST_CASE("discrete model weights tile the ball") {
  const ModelManifold m(2, WarpingProfile::hyperbolic(1.0), 200.0);
  const WeightedGraph g = discrete_model(m, 0.2, 20);
  const double area = 2.0 * M_PI * (std::cosh(20.5 * 0.2) - 1.0);
  CHECK(total_weight(g) == doctest::Approx(area).epsilon(1e-12));
  CHECK(layer_conductance(g, 4) == doctest::Approx(2.0 * M_PI * std::sinh(0.9) / 0.2).epsilon(1e-12));
}

TEST_CASE("product graphs scale conductances by the fiber volume") {
  const WeightedGraph base = discrete_model(euclid2(), 0.5, 12);
  const WeightedGraph fiber = cycle_graph(3);
  const WeightedGraph total = product_graph(base, fiber);
  CHECK(total.size() == base.size() * 3);
  CHECK(total_weight(total) == doctest::Approx(3.0 * total_weight(base)));
  for (int k = 0; k < 12; ++k) CHECK(layer_conductance(total, k) == 3.0 * layer_conductance(base, k));
}

TEST_CASE("single vertex kernel") {
  WeightedGraph g;
  g.add_vertex(2.5);
  const HeatKernel k = truncated_heat_kernel(g, {0}, 3.0);
  CHECK(k.density(0, 0) == doctest::Approx(1.0 / 2.5).epsilon(1e-15));
  CHECK(k.mass(0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("two-vertex complete graph conserves mass") {
  const WeightedGraph g = complete_graph(2);
  for (double t : {0.1, 1.0, 10.0}) {
    const HeatKernel k = truncated_heat_kernel(g, {0, 1}, t);
    CHECK(k.mass(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(k.density(0, 1) == doctest::Approx(0.5 * (1.0 - std::exp(-2.0 * t))).epsilon(1e-13));
  }
}

TEST_CASE("path truncations lose mass and recover it as they grow") {
  const WeightedGraph g = path_graph(101);
  auto window = [](int half) {
    std::vector<int> v;
    for (int i = 50 - half; i <= 50 + half; ++i) v.push_back(i);
    return v;
  };
  double prev = 0.0;
  for (int half : {3, 6, 12, 24}) {
    const HeatKernel k = truncated_heat_kernel(g, window(half), 1.0);
    const double m = k.mass(k.position(50));
    if (half < 24) CHECK(m < 1.0);
    CHECK(m >= prev);
    prev = m;
  }
  CHECK(prev > 1.0 - 1e-12);
}

TEST_CASE("kernel properties on golden graphs at three truncations") {
  for (const FamilyPtr& f : golden_families()) {
    const auto truncs = f->truncations();
    const WeightedGraph g = f->build(truncs.back() + 1);
    std::vector<double> prev;
    for (int L : truncs) {
      INFO(f->name() << " L=" << L);
      const auto tr = layer_truncation(g, L);
      const KernelProperties p = kernel_properties(g, tr, 1.0, 0.5);
      CHECK(p.symmetry <= 1e-10);
      CHECK(p.chapman_kolmogorov <= 1e-8);
      CHECK(p.min_mass > 0.0);
      CHECK(p.max_mass <= 1.0 + 1e-10);
      CHECK(p.positive);

      const HeatKernel k = truncated_heat_kernel(g, tr, 1.0);
      // Transition probabilities P(x,y) = p(x,y) mu_y are reversible for mu.
      for (std::size_t i = 0; i < std::min<std::size_t>(k.size(), 6); ++i)
        for (std::size_t j = 0; j < std::min<std::size_t>(k.size(), 6); ++j)
          CHECK(k.mu[i] * k.density(i, j) * k.mu[j] == doctest::Approx(k.mu[j] * k.density(j, i) * k.mu[i]).epsilon(1e-10));
      std::vector<double> masses;
      for (std::size_t i = 0; i < prev.size(); ++i) {
        CHECK(k.mass(i) >= prev[i] - 1e-12);
      }
      for (std::size_t i = 0; i < k.size(); ++i) masses.push_back(k.mass(i));
      prev = masses;
    }
  }
}

TEST_CASE("kernel preconditions") {
  const WeightedGraph g = path_graph(4);
  CHECK_THROWS_AS(truncated_heat_kernel(g, {0, 1}, 0.0), PreconditionError);
  CHECK_THROWS_AS(truncated_heat_kernel(g, {}, 1.0), PreconditionError);
  CHECK_THROWS_AS(truncated_heat_kernel(g, {0, 0}, 1.0), PreconditionError);
  CHECK_THROWS_AS(truncated_heat_kernel(g, {7}, 1.0), PreconditionError);
}
