#pragma once

// Dirichlet heat kernels of finite vertex sets with absorbing complement.

#include <vector>

#include <Eigen/Dense>

#include "stochlab/graph.hpp"

namespace stochlab {

/// p_t(x, y) relative to mu on a truncation. Stored through the symmetrized
/// semigroup E_t = exp(t D^{-1/2} L D^{-1/2}), so that p_t(x,y) = E_t(x,y)/sqrt(mu_x mu_y).
struct HeatKernel {
  std::vector<int> vertices;
  std::vector<double> mu;
  double t = 0.0;
  Eigen::MatrixXd semigroup;

  std::size_t size() const { return vertices.size(); }
  /// p_t(x, y) for truncation positions i, j.
  double density(std::size_t i, std::size_t j) const;
  /// sum_y p_t(x, y) mu_y.
  double mass(std::size_t i) const;
  /// Position of graph vertex v in the truncation; PreconditionError if absent.
  std::size_t position(int v) const;
};

/// Edges leaving the truncation act as killing. NumericError if the
/// exponential produces non-finite entries.
HeatKernel truncated_heat_kernel(const WeightedGraph& g, const std::vector<int>& truncation, double t);

/// Vertices of g with layer <= L.
std::vector<int> layer_truncation(const WeightedGraph& g, int L);

struct KernelProperties {
  /// max |p_t(x,y) - p_t(y,x)| relative to max p_t; equivalently the transition
  /// probabilities P_t(x,y) = p_t(x,y) mu_y satisfy mu_x P_t(x,y) = mu_y P_t(y,x).
  double symmetry = 0.0;
  /// max |E_{t+s} - E_t E_s|.
  double chapman_kolmogorov = 0.0;
  double min_mass = 0.0;
  double max_mass = 0.0;
  bool positive = false;
};

KernelProperties kernel_properties(const WeightedGraph& g, const std::vector<int>& truncation, double t, double s);

}  // namespace stochlab
