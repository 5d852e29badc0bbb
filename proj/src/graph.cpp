#include "stochlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stochlab/errors.hpp"

namespace stochlab {

int WeightedGraph::add_vertex(double mu, int layer) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw PreconditionError("vertex weight must be positive and finite");
  mu_.push_back(mu);
  layer_.push_back(layer);
  adj_.emplace_back();
  return size() - 1;
}

void WeightedGraph::add_edge(int a, int b, double c) {
  if (a < 0 || b < 0 || a >= size() || b >= size() || a == b) throw PreconditionError("edge endpoints invalid");
  if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("conductance must be positive and finite");
  adj_[static_cast<std::size_t>(a)].push_back({b, c});
  adj_[static_cast<std::size_t>(b)].push_back({a, c});
  ++edges_;
}

int WeightedGraph::max_layer() const {
  return layer_.empty() ? -1 : *std::max_element(layer_.begin(), layer_.end());
}

void WeightedGraph::validate() const {
  if (mu_.empty()) throw PreconditionError("graph has no vertices");
  std::vector<char> seen(mu_.size(), 0);
  std::queue<int> todo;
  todo.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!todo.empty()) {
    const int v = todo.front();
    todo.pop();
    for (const Edge& e : neighbors(v)) {
      if (!seen[static_cast<std::size_t>(e.to)]) {
        seen[static_cast<std::size_t>(e.to)] = 1;
        ++reached;
        todo.push(e.to);
      }
    }
  }
  if (reached != mu_.size()) throw PreconditionError("graph is not connected");
}

double graph_laplacian_apply(const WeightedGraph& g, const std::vector<double>& f, int x) {
  if (f.size() != static_cast<std::size_t>(g.size())) throw PreconditionError("function size does not match graph");
  const auto& nb = g.neighbors(x);
  if (nb.empty()) throw DomainError("Laplacian at an isolated vertex");
  const double fx = f[static_cast<std::size_t>(x)];
  double s = 0.0;
  for (const auto& e : nb) s += e.c * (f[static_cast<std::size_t>(e.to)] - fx);
  return s / g.weight(x);
}

std::vector<double> graph_laplacian(const WeightedGraph& g, const std::vector<double>& f) {
  std::vector<double> out(f.size());
  for (int x = 0; x < g.size(); ++x) out[static_cast<std::size_t>(x)] = graph_laplacian_apply(g, f, x);
  return out;
}

double layer_conductance(const WeightedGraph& g, int k) {
  double s = 0.0;
  for (int v = 0; v < g.size(); ++v) {
    if (g.layer(v) != k) continue;
    for (const auto& e : g.neighbors(v))
      if (g.layer(e.to) == k + 1) s += e.c;
  }
  return s;
}

double total_weight(const WeightedGraph& g) {
  double s = 0.0;
  for (int v = 0; v < g.size(); ++v) s += g.weight(v);
  return s;
}

WeightedGraph path_graph(int n) {
  if (n < 1) throw PreconditionError("path needs at least one vertex");
  WeightedGraph g;
  for (int i = 0; i < n; ++i) g.add_vertex(1.0, i);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1, 1.0);
  return g;
}

WeightedGraph cycle_graph(int n) {
  if (n < 3) throw PreconditionError("cycle needs at least three vertices");
  WeightedGraph g;
  for (int i = 0; i < n; ++i) g.add_vertex(1.0);
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n, 1.0);
  return g;
}

WeightedGraph complete_graph(int n) {
  if (n < 1) throw PreconditionError("complete graph needs at least one vertex");
  WeightedGraph g;
  for (int i = 0; i < n; ++i) g.add_vertex(1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j, 1.0);
  return g;
}

namespace {

void enumerate_sphere(int d, int k, std::vector<int>& point, int axis, std::vector<std::vector<int>>& out) {
  if (axis == d - 1) {
    for (int s : {k, -k}) {
      point[static_cast<std::size_t>(axis)] = s;
      out.push_back(point);
      if (k == 0) break;
    }
    return;
  }
  for (int v = -k; v <= k; ++v) {
    point[static_cast<std::size_t>(axis)] = v;
    enumerate_sphere(d, k - std::abs(v), point, axis + 1, out);
  }
}

double binomial(long n, long k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (long i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

}  // namespace

WeightedGraph lattice_ball(int d, int n) {
  if (d < 1 || d > 4) throw PreconditionError("lattice dimension must be in 1..4");
  if (n < 0) throw PreconditionError("lattice radius must be non-negative");
  WeightedGraph g;
  std::map<std::vector<int>, int> index;
  std::vector<std::vector<int>> points;
  for (int k = 0; k <= n; ++k) {
    std::vector<std::vector<int>> sphere;
    std::vector<int> p(static_cast<std::size_t>(d), 0);
    enumerate_sphere(d, k, p, 0, sphere);
    for (auto& q : sphere) {
      index.emplace(q, g.add_vertex(1.0, k));
      points.push_back(std::move(q));
    }
  }
  for (std::size_t v = 0; v < points.size(); ++v) {
    for (int a = 0; a < d; ++a) {
      std::vector<int> q = points[v];
      ++q[static_cast<std::size_t>(a)];
      const auto it = index.find(q);
      if (it != index.end()) g.add_edge(static_cast<int>(v), it->second, 1.0);
    }
  }
  return g;
}

double lattice_layer_conductance(int d, long k) {
  if (k < 0) throw PreconditionError("layer index must be non-negative");
  if (k == 0) return 2.0 * d;
  double s = 0.0;
  for (int p = 1; p <= d; ++p) s += binomial(d, p) * std::ldexp(1.0, p) * binomial(k - 1, p - 1) * (2 * d - p);
  return s;
}

WeightedGraph discrete_model(const ModelManifold& model, double h, int n) {
  if (!(h > 0.0)) throw PreconditionError("spacing must be positive");
  if (n < 1) throw PreconditionError("discrete model needs at least two vertices");
  if ((n + 0.5) * h > model.r_max()) throw PreconditionError("discrete model exceeds r_max");
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  const auto area = [&](double r) { return std::exp(model.log_sphere_area(r)); };
  WeightedGraph g;
  for (int i = 0; i <= n; ++i) {
    const double a = std::max(0.0, (i - 0.5) * h);
    const double b = (i + 0.5) * h;
    g.add_vertex(GK::integrate(area, a, b, 6, 1e-13), i);
  }
  for (int i = 0; i < n; ++i) g.add_edge(i, i + 1, area((i + 0.5) * h) / h);
  return g;
}

WeightedGraph product_graph(const WeightedGraph& base, const WeightedGraph& fiber) {
  const int nf = fiber.size();
  WeightedGraph g;
  for (int x = 0; x < base.size(); ++x)
    for (int q = 0; q < nf; ++q) g.add_vertex(base.weight(x) * fiber.weight(q), base.layer(x));
  for (int x = 0; x < base.size(); ++x) {
    for (const auto& e : base.neighbors(x)) {
      if (e.to < x) continue;
      for (int q = 0; q < nf; ++q) g.add_edge(x * nf + q, e.to * nf + q, e.c * fiber.weight(q));
    }
  }
  for (int x = 0; x < base.size(); ++x) {
    for (int q = 0; q < nf; ++q) {
      for (const auto& e : fiber.neighbors(q)) {
        if (e.to < q) continue;
        g.add_edge(x * nf + q, x * nf + e.to, base.weight(x) * e.c);
      }
    }
  }
  return g;
}

WeightedGraph pair_product_graph(const WeightedGraph& a, const WeightedGraph& b) {
  const int na = a.size(), nb = b.size();
  const int top = std::max(a.max_layer(), b.max_layer());
  std::vector<std::vector<int>> by_layer_a(static_cast<std::size_t>(top + 1)), by_layer_b(by_layer_a.size());
  for (int x = 0; x < na; ++x) by_layer_a[static_cast<std::size_t>(a.layer(x))].push_back(x);
  for (int q = 0; q < nb; ++q) by_layer_b[static_cast<std::size_t>(b.layer(q))].push_back(q);

  WeightedGraph g;
  std::vector<int> id(static_cast<std::size_t>(na) * static_cast<std::size_t>(nb), -1);
  const auto at = [&](int x, int q) -> int& { return id[static_cast<std::size_t>(x) * nb + q]; };
  for (int L = 0; L <= top; ++L) {
    for (int x : by_layer_a[static_cast<std::size_t>(L)])
      for (int M = 0; M <= L; ++M)
        for (int q : by_layer_b[static_cast<std::size_t>(M)]) at(x, q) = g.add_vertex(a.weight(x) * b.weight(q), L);
    for (int M = 0; M < L; ++M)
      for (int x : by_layer_a[static_cast<std::size_t>(M)])
        for (int q : by_layer_b[static_cast<std::size_t>(L)]) at(x, q) = g.add_vertex(a.weight(x) * b.weight(q), L);
  }
  for (int x = 0; x < na; ++x) {
    for (int q = 0; q < nb; ++q) {
      const int v = at(x, q);
      for (const auto& e : a.neighbors(x))
        if (e.to > x) g.add_edge(v, at(e.to, q), e.c * b.weight(q));
      for (const auto& e : b.neighbors(q))
        if (e.to > q) g.add_edge(v, at(x, e.to), a.weight(x) * e.c);
    }
  }
  return g;
}

LatticeFamily::LatticeFamily(int d) : d_(d) {
  if (d < 1 || d > 4) throw PreconditionError("lattice dimension must be in 1..4");
}

std::string LatticeFamily::name() const { return "Z" + std::to_string(d_); }

std::vector<int> LatticeFamily::truncations() const {
  if (d_ <= 2) return {8, 12, 16};
  if (d_ == 3) return {5, 7, 9};
  return {3, 4, 5};
}

WeightedGraph RadialChainFamily::build(int n) const {
  if (n < 1) throw PreconditionError("chain needs at least two vertices");
  WeightedGraph g;
  g.add_vertex(1.0, 0);
  for (int k = 1; k <= n; ++k) g.add_vertex(4.0 * k, k);
  for (int k = 0; k < n; ++k) g.add_edge(k, k + 1, 8.0 * k + 4.0);
  return g;
}

DiscreteModelFamily::DiscreteModelFamily(ModelManifold model, double h, double R, std::vector<int> truncations)
    : model_(std::move(model)), h_(h), truncations_(std::move(truncations)) {
  if (!(h > 0.0)) throw PreconditionError("spacing must be positive");
  if (!(R > 0.0)) throw PreconditionError("inner radius must be positive");
  inner_ = std::max(1, static_cast<int>(std::lround(R / h)));
  int n = 1;
  constexpr int cap = 1 << 16;
  while (n < cap && (n + 1.5) * h <= model_.r_max() && model_.log_sphere_area((n + 1.5) * h) <= 600.0) ++n;
  horizon_ = n;
  if (horizon_ < 4 * inner_) throw PreconditionError("discrete model horizon too small for the inner ball");
  if (truncations_.empty()) truncations_ = {10, 15, 20};
  if (truncations_.size() != 3 || !std::is_sorted(truncations_.begin(), truncations_.end()) ||
      truncations_.back() >= horizon_)
    throw PreconditionError("need three increasing truncations below the horizon");
}

std::string DiscreteModelFamily::name() const {
  std::ostringstream os;
  os << "discrete(" << model_.describe() << ", h=" << h_ << ")";
  return os.str();
}

long DiscreteModelFamily::series_horizon() const {
  const auto n = static_cast<long>(std::floor(model_.r_max() / h_ - 0.5));
  return std::clamp(n, static_cast<long>(horizon_), 1L << 16);
}

double DiscreteModelFamily::layer_resistance(long k) const {
  const double r = (static_cast<double>(k) + 0.5) * h_;
  if (r > model_.r_max()) throw DomainError("layer beyond r_max");
  return std::exp(std::log(h_) - model_.log_sphere_area(r));
}

ProductFamily::ProductFamily(FamilyPtr base, WeightedGraph fiber) : base_(std::move(base)), fiber_(std::move(fiber)) {
  fiber_.validate();
  fiber_volume_ = total_weight(fiber_);
}

std::string ProductFamily::name() const {
  std::ostringstream os;
  os << base_->name() << " x F(|F|=" << fiber_.size() << ", vol=" << fiber_volume_ << ")";
  return os.str();
}

PairProductFamily::PairProductFamily(FamilyPtr a, FamilyPtr b, std::vector<int> truncations)
    : a_(std::move(a)), b_(std::move(b)), truncations_(std::move(truncations)) {
  const int H = horizon();
  const WeightedGraph ga = a_->build(H), gb = b_->build(H);
  double va = 0.0, vb = 0.0;
  for (int k = 0; k <= H; ++k) {
    for (int x = 0; x < ga.size(); ++x)
      if (ga.layer(x) == k) va += ga.weight(x);
    for (int q = 0; q < gb.size(); ++q)
      if (gb.layer(q) == k) vb += gb.weight(q);
    vol_a_.push_back(va);
    vol_b_.push_back(vb);
    cond_a_.push_back(k < H ? layer_conductance(ga, k) : 0.0);
    cond_b_.push_back(k < H ? layer_conductance(gb, k) : 0.0);
  }
  if (truncations_.size() != 3 || truncations_.back() >= H)
    throw PreconditionError("need three truncations below the horizon");
}

std::string PairProductFamily::name() const { return a_->name() + " x " + b_->name(); }

int PairProductFamily::horizon() const { return std::min({a_->horizon(), b_->horizon(), 64}); }

int PairProductFamily::exhaustion_limit() const {
  return std::min({a_->exhaustion_limit(), b_->exhaustion_limit(), horizon()});
}

double PairProductFamily::layer_resistance(long k) const {
  if (k < 0 || k >= horizon()) throw DomainError("layer beyond the pair-product horizon");
  const auto i = static_cast<std::size_t>(k);
  return 1.0 / (cond_b_[i] * vol_a_[i] + cond_a_[i] * vol_b_[i]);
}

}  // namespace stochlab
