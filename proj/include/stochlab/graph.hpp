#pragma once

// Weighted graphs with vertex weights mu and edge conductances c, and lazily
// generated layered families standing in for infinite graphs.

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "stochlab/profile.hpp"

namespace stochlab {

class WeightedGraph {
 public:
  struct Edge {
    int to;
    double c;
  };

  int add_vertex(double mu, int layer = 0);
  void add_edge(int a, int b, double c);

  int size() const { return static_cast<int>(mu_.size()); }
  double weight(int v) const { return mu_[static_cast<std::size_t>(v)]; }
  int layer(int v) const { return layer_[static_cast<std::size_t>(v)]; }
  const std::vector<Edge>& neighbors(int v) const { return adj_[static_cast<std::size_t>(v)]; }
  std::size_t edge_count() const { return edges_; }
  int max_layer() const;

  /// PreconditionError unless the graph is non-empty and connected.
  void validate() const;

 private:
  std::vector<double> mu_;
  std::vector<int> layer_;
  std::vector<std::vector<Edge>> adj_;
  std::size_t edges_ = 0;
};

/// (1/mu_x) sum_y c_xy (f(y) - f(x)). DomainError for an isolated vertex.
double graph_laplacian_apply(const WeightedGraph& g, const std::vector<double>& f, int x);
std::vector<double> graph_laplacian(const WeightedGraph& g, const std::vector<double>& f);

/// Sum of conductances of edges joining layer k to layer k+1.
double layer_conductance(const WeightedGraph& g, int k);
double total_weight(const WeightedGraph& g);

/// Builtin finite graphs with unit weights and conductances; layer = index for paths.
WeightedGraph path_graph(int n);
WeightedGraph cycle_graph(int n);
WeightedGraph complete_graph(int n);

/// Ball of radius n in Z^d (l1 distance), mu = c = 1, vertices ordered by layer.
WeightedGraph lattice_ball(int d, int n);
/// Number of edges between the l1 spheres of radius k and k+1 in Z^d:
///   sum_p C(d,p) 2^p C(k-1,p-1) (2d - p), or 2d for k = 0.
double lattice_layer_conductance(int d, long k);

/// Radial chain r_i = i h, i = 0..n, with mu_i = V(r_{i+1/2}) - V(r_{i-1/2})
/// and c_{i,i+1} = S(r_{i+1/2}) / h.
WeightedGraph discrete_model(const ModelManifold& model, double h, int n);

/// Cartesian product graph: vertex (x, q) has index x * |F| + q and weight mu_x nu_q;
/// edges (x,q)~(y,q) carry c_xy nu_q and (x,q)~(x,q') carry mu_x d_qq'. Layers are
/// inherited from the first factor.
WeightedGraph product_graph(const WeightedGraph& base, const WeightedGraph& fiber);

/// Product of two layered graphs with layer(x, q) = max(layer x, layer q) and the same
/// conductance convention. Vertices are ordered by layer.
WeightedGraph pair_product_graph(const WeightedGraph& a, const WeightedGraph& b);

/// An infinite layered graph presented by its truncations.
class GraphFamily {
 public:
  virtual ~GraphFamily() = default;
  virtual std::string name() const = 0;
  /// Graph on layers 0..n with the root as vertex 0.
  virtual WeightedGraph build(int n) const = 0;
  /// 1 / (conductance between layers k and k+1); 0 once it underflows.
  virtual double layer_resistance(long k) const = 0;
  /// Largest n accepted by build().
  virtual int horizon() const = 0;
  /// Number of resistance terms available to the flux series.
  virtual long series_horizon() const { return horizon(); }
  /// Layers 0..inner_layers() form the compact set of exterior problems.
  virtual int inner_layers() const { return 1; }
  /// Truncation sizes for the kernel-mass test.
  virtual std::vector<int> truncations() const = 0;
  /// Largest outer layer used by the exterior exhaustion.
  virtual int exhaustion_limit() const { return horizon(); }
};

using FamilyPtr = std::shared_ptr<const GraphFamily>;

class LatticeFamily : public GraphFamily {
 public:
  explicit LatticeFamily(int d);
  std::string name() const override;
  WeightedGraph build(int n) const override { return lattice_ball(d_, n); }
  double layer_resistance(long k) const override { return 1.0 / lattice_layer_conductance(d_, k); }
  int horizon() const override { return d_ == 2 ? 128 : d_ == 3 ? 40 : 16; }
  long series_horizon() const override { return 1L << 20; }
  std::vector<int> truncations() const override;
  int exhaustion_limit() const override { return d_ == 2 ? 128 : d_ == 3 ? 16 : 8; }
  int dim() const { return d_; }

 private:
  int d_;
};

/// Radial projection of Z^2: mu_0 = 1, mu_k = 4k, c_{k,k+1} = 8k + 4.
class RadialChainFamily : public GraphFamily {
 public:
  std::string name() const override { return "chain"; }
  WeightedGraph build(int n) const override;
  double layer_resistance(long k) const override { return 1.0 / (8.0 * static_cast<double>(k) + 4.0); }
  int horizon() const override { return 1 << 14; }
  long series_horizon() const override { return 1L << 20; }
  std::vector<int> truncations() const override { return {10, 15, 20}; }
  int exhaustion_limit() const override { return 128; }
};

class DiscreteModelFamily : public GraphFamily {
 public:
  /// The compact set is the ball of radius R; layers stop where log S would exceed 600
  /// or beyond r_max.
  DiscreteModelFamily(ModelManifold model, double h, double R = 1.0, std::vector<int> truncations = {});
  std::string name() const override;
  WeightedGraph build(int n) const override { return discrete_model(model_, h_, n); }
  double layer_resistance(long k) const override;
  int horizon() const override { return horizon_; }
  /// Resistances stay finite up to r_max even where the weights no longer fit a double.
  long series_horizon() const override;
  int inner_layers() const override { return inner_; }
  std::vector<int> truncations() const override { return truncations_; }
  int exhaustion_limit() const override { return std::min(horizon_, 2048); }
  const ModelManifold& model() const { return model_; }
  double spacing() const { return h_; }

 private:
  ModelManifold model_;
  double h_;
  int inner_;
  int horizon_;
  std::vector<int> truncations_;
};

/// Base family times a fixed finite fiber.
class ProductFamily : public GraphFamily {
 public:
  ProductFamily(FamilyPtr base, WeightedGraph fiber);
  std::string name() const override;
  WeightedGraph build(int n) const override { return product_graph(base_->build(n), fiber_); }
  double layer_resistance(long k) const override { return base_->layer_resistance(k) / fiber_volume_; }
  int horizon() const override { return base_->horizon(); }
  long series_horizon() const override { return base_->series_horizon(); }
  int inner_layers() const override { return base_->inner_layers(); }
  std::vector<int> truncations() const override { return base_->truncations(); }
  int exhaustion_limit() const override { return base_->exhaustion_limit(); }
  const GraphFamily& base() const { return *base_; }
  const WeightedGraph& fiber() const { return fiber_; }
  double fiber_volume() const { return fiber_volume_; }

 private:
  FamilyPtr base_;
  WeightedGraph fiber_;
  double fiber_volume_;
};

/// Product of two infinite families with l-infinity layers.
class PairProductFamily : public GraphFamily {
 public:
  PairProductFamily(FamilyPtr a, FamilyPtr b, std::vector<int> truncations);
  std::string name() const override;
  WeightedGraph build(int n) const override { return pair_product_graph(a_->build(n), b_->build(n)); }
  /// C_k = C^b_k vol_a(layers <= k) + C^a_k vol_b(layers <= k).
  double layer_resistance(long k) const override;
  int horizon() const override;
  int inner_layers() const override { return std::max(a_->inner_layers(), b_->inner_layers()); }
  std::vector<int> truncations() const override { return truncations_; }
  int exhaustion_limit() const override;

 private:
  FamilyPtr a_;
  FamilyPtr b_;
  std::vector<int> truncations_;
  std::vector<double> vol_a_, vol_b_, cond_a_, cond_b_;
};

}  // namespace stochlab
