#pragma once

// Radial boundary-value problems: the exterior Dirichlet problem
//   h'' + (m-1)(sigma'/sigma) h' = lambda h on (R, R_n),  h(R) = 1, h(R_n) = 0,
// its exhaustion limit, and the Khasminskii function gamma.

#include <memory>
#include <optional>
#include <vector>

#include "stochlab/profile.hpp"

namespace stochlab {

struct ExteriorProblem {
  ExteriorProblem(ModelManifold model, double R, double lambda);

  ModelManifold model;
  double R;
  double lambda;
};

struct GridSpec {
  double spacing = 0.01;
  int min_nodes = 64;
};

struct TruncatedSolution {
  double R_n = 0.0;
  std::vector<double> grid;
  std::vector<double> values;
  /// Max-norm residual of the discrete equations, relative to the diagonal.
  double residual_norm = 0.0;

  /// Piecewise-linear evaluation; 0 beyond R_n.
  double value_at(double r) const;
};

/// Solves the truncated problem with the self-adjoint three-point scheme
///   [S_{i+1/2}(h_{i+1}-h_i)/d+ - S_{i-1/2}(h_i-h_{i-1})/d-] / dbar = lambda S_i h_i.
/// The grid is R + i*spacing with the last cell stretched to end at R_n.
TruncatedSolution solve_truncated(const ExteriorProblem& problem, double R_n, const GridSpec& grid = {});

struct MinimalSolution {
  ExteriorProblem problem;
  std::vector<TruncatedSolution> iterates;
  /// Window [R, W] on which successive iterates are compared.
  std::vector<double> grid;
  std::vector<double> limit_values;
  double tail_value = 0.0;
  /// Value of each iterate at its comparison window end, starting with the second iterate.
  std::vector<double> tail_history;
  /// Sup-norm difference between consecutive iterates on their common window.
  std::vector<double> increments;
  bool converged = false;

  /// Evaluates the last iterate.
  double value_at(double r) const { return iterates.back().value_at(r); }
};

/// R * 2^n for n >= 1, stopping at min(r_max, max_outer).
std::vector<double> default_schedule(const ExteriorProblem& problem, double max_outer = 128.0);

/// Monotone exhaustion. The comparison window between iterates n-1 and n is
/// [R, (R + R_{n-1})/2]; `tail_value` is the final iterate's value at the end
/// of the last window. InternalError if an iterate decreases anywhere by more
/// than 1e-10.
MinimalSolution minimal_solution(const ExteriorProblem& problem, const std::vector<double>& schedule,
                                 double tolerance = 1e-6, const GridSpec& grid = {});
MinimalSolution minimal_solution(const ExteriorProblem& problem, double tolerance = 1e-6);

enum class Boundedness { Bounded, Unbounded, Inconclusive };

std::string to_string(Boundedness b);

/// Least-squares slope of y against x restricted to x >= x_from.
double window_slope(const std::vector<double>& x, const std::vector<double>& y, double x_from);

/// gamma with gamma'' + (m-1)(sigma'/sigma) gamma' = lambda gamma, gamma(0) = 1, gamma'(0) = 0.
///
/// Integrated in Riccati form y = log gamma, z = gamma'/gamma:
///   y' = z,  z' = lambda - z^2 - (m-1)(sigma'/sigma) z,
/// from r = 1e-4 seeded with gamma = 1 + lambda r^2/(2m).
struct RadialFunctionEstimate {
  std::vector<double> grid;
  std::vector<double> log_values;
  std::vector<double> log_derivatives;
  Boundedness classification = Boundedness::Inconclusive;
  /// gamma at the window end when Bounded.
  double limit = 0.0;
  /// Slope of log gamma on the last tenth of the window.
  double growth_slope = 0.0;
  /// Radius where log gamma exceeded the double range, if it did.
  std::optional<double> overflow_radius;
  double r_end = 0.0;

  double value(std::size_t i) const;
  double derivative(std::size_t i) const;
  /// gamma, gamma', gamma'' at r by re-integrating from the nearest stored node.
  Jet jet(double r) const;

  std::shared_ptr<const ModelManifold> model;
  double lambda = 0.0;
};

RadialFunctionEstimate khasminskii_solution(const ModelManifold& model, double lambda);

struct OYCertificate {
  RadialFunctionEstimate u;
  double sup_u = 0.0;
  double eta = 0.0;
  /// Omega_eta = {r > r_eta}.
  double r_eta = 0.0;
  /// inf of Delta u over sampled points of Omega_eta, with Delta u from a
  /// finite difference of gamma'.
  double inf_laplacian = 0.0;
  /// lambda (sup u - eta).
  double predicted_inf = 0.0;
};

/// PreconditionError unless gamma is classified Bounded, or if eta >= sup u - 1.
OYCertificate oy_certificate(const ModelManifold& model, double lambda, double eta);

}  // namespace stochlab
