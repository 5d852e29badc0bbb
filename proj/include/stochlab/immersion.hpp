#pragma once

// Immersed patches in rotationally symmetric models. Ambient points are written in
// normal coordinates y = rho * omega around the pole, where the metric is
//   g_y = P_r + (sigma(rho)/rho)^2 P_t,  P_r = omega omega^T, P_t = I - P_r.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stochlab/profile.hpp"

namespace stochlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

Mat ambient_metric(const ModelManifold& model, const Vec& y);
/// Gamma^k_ab v^a w^b at y.
Vec ambient_connection(const ModelManifold& model, const Vec& y, const Vec& v, const Vec& w);

struct ImmersedPatch {
  std::string name;
  ModelManifold ambient;
  /// Parameter rectangle [lo, hi] in R^k.
  Vec lo;
  Vec hi;
  std::function<Vec(const Vec&)> phi;
  /// Optional exact derivatives: n x k jacobian, and second derivatives d_i d_j phi
  /// stored at index i * k + j.
  std::function<Mat(const Vec&)> jacobian;
  std::function<std::vector<Vec>(const Vec&)> hessian;
  int samples_per_axis = 9;
  double stencil = 1e-3;

  int k() const { return static_cast<int>(lo.size()); }
  bool exact() const { return static_cast<bool>(jacobian) && static_cast<bool>(hessian); }
  /// Nested tensor grid with `per_axis` points per axis, endpoints included.
  std::vector<Vec> sample_grid(int per_axis) const;
  std::vector<Vec> sample_grid() const { return sample_grid(samples_per_axis); }
};

/// Same patch with the exact derivative callbacks removed.
ImmersedPatch finite_difference_copy(const ImmersedPatch& patch, double stencil);
/// The patch rotated by angle in the (y_0, y_1) plane, an isometry of the model.
ImmersedPatch theta_shift(const ImmersedPatch& patch, double angle);

struct InducedGeometry {
  Vec point;
  double rho = 0.0;
  /// Columns d_i phi.
  Mat tangents;
  /// First fundamental form g(d_i phi, d_j phi).
  Mat form;
  /// Orthonormal frame X_1..X_k (columns) spanning the tangent space.
  Mat frame;
};

/// DomainError for a rank-deficient differential or a point at the pole.
InducedGeometry induced_geometry(const ImmersedPatch& patch, const Vec& p);

struct MeanCurvatureSample {
  Vec param;
  Vec point;
  /// Trace of the second fundamental form, in ambient coordinates.
  Vec H;
  double norm = 0.0;
  /// max_i |<H, d_i phi>| / (|H| |d_i phi|), 0 when |H| <= 1e-12.
  double normality = 0.0;
  /// Change against the half stencil (finite differences only).
  double refinement_delta = 0.0;
};

/// H = sum_ij G^ij (d_i d_j phi + Gamma(d_i phi, d_j phi)) projected onto the normal
/// space. Finite differences are Richardson-extrapolated from stencil and stencil/2;
/// NumericError when the two differ by more than 1e-4 (1 + |H|).
MeanCurvatureSample mean_curvature(const ImmersedPatch& patch, const Vec& p);

struct MeanCurvatureField {
  std::vector<MeanCurvatureSample> samples;
  double sup = 0.0;
};

MeanCurvatureField mean_curvature_field(const ImmersedPatch& patch, int per_axis);

struct Supremum {
  double value = 0.0;
  double coarse = 0.0;
  /// value - coarse, never negative since the grids are nested.
  double refinement_delta = 0.0;
  int per_axis = 0;
};

/// sup |H| over the sample grid and over its nested refinement.
Supremum mean_curvature_supremum(const ImmersedPatch& patch);

struct CompositionCheck {
  /// Intrinsic Laplace-Beltrami of g o rho o phi by finite differences on the parameters.
  double lhs = 0.0;
  double hessian_term = 0.0;
  double mean_curvature_term = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

/// Delta_M (g o rho o phi) against sum_i Hess g(X_i, X_i) + <H, grad g>.
CompositionCheck laplacian_composition_check(const ImmersedPatch& patch, const RadialFunction& g, const Vec& p);

struct CompositionConvergence {
  double stencil = 0.0;
  double residual_coarse = 0.0;
  double residual_fine = 0.0;
  /// residual_coarse / residual_fine; about 4 for second order.
  double ratio = 0.0;
};

/// Largest residual over the sample grid with finite differences at `stencil` and stencil/2.
CompositionConvergence composition_convergence(const ImmersedPatch& patch, const RadialFunction& g, double stencil);

struct ChainSample {
  Vec param;
  double rho = 0.0;
  double laplacian_u = 0.0;
  /// g'' + g' <grad rho, H>.
  double bound = 0.0;
  double mu_u = 0.0;
  double slack_first = 0.0;
  double slack_second = 0.0;
  bool holds = false;
};

struct ChainReport {
  double lambda = 0.0;
  double R = 0.0;
  double sup_H = 0.0;
  /// lambda + sqrt(lambda) sup |H|.
  double mu = 0.0;
  std::vector<ChainSample> samples;
  double fraction_holding = 0.0;
  bool all_hold = false;
};

/// For u = exp(-sqrt(lambda) (rho o phi - R)) checks Delta u <= g'' + g' <grad rho, H> <= mu u
/// at every sample, within 1e-6 (1 + |terms|). PreconditionError unless the ambient is
/// Cartan-Hadamard and every sample lies outside B(o, R).
ChainReport supersolution_chain_check(const ImmersedPatch& patch, double lambda, double R);

/// Builtin patches in three-dimensional models.
/// The plane y_2 = 0 in H^3 in polar parameters (t, s), s in [1, 2].
ImmersedPatch geodesic_slice_patch();
/// The sphere rho = radius in R^3, colatitude in [1, 2].
ImmersedPatch sphere_patch(double radius = 2.0);
/// The horosphere {z = level} of the upper half-space model of H^3, placed so that the
/// pole is the point (0, 0, 1); horizontal offsets s in [0.2, 0.8].
ImmersedPatch horosphere_patch(double level = 2.0);
/// z = 1 + x^2 + y^2 over [-1, 1]^2 in R^3.
ImmersedPatch graph_surface_patch();
std::vector<ImmersedPatch> golden_patches();

}  // namespace stochlab
