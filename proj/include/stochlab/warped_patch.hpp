#pragma once

// The strip R x S^1 with metric dx^2 + psi(x)^2 dtheta^2, projecting onto the
// x-line with circle fibers of length 2 pi psi.

#include <functional>

namespace stochlab {

/// Which trace defines the fiber mean curvature. MinusTrace is H = -sum S^F(e_i, e_i);
/// PlusTrace is the opposite sign, H = +sum S^F(e_i, e_i).
enum class MeanCurvatureSign { MinusTrace, PlusTrace };

struct WarpedPatch2D {
  std::function<double(double)> psi;
  double stencil = 1e-3;
  MeanCurvatureSign sign = MeanCurvatureSign::MinusTrace;
};

struct WarpedCheck {
  /// Div of the horizontal lift f(x) d_x computed in the 2D metric.
  double lhs = 0.0;
  /// Div_N X +/- <X, H>, the sign following the convention so that the identity holds.
  double rhs = 0.0;
  double residual = 0.0;
  double base_divergence = 0.0;
  /// x-component of the fiber mean curvature under the chosen sign.
  double mean_curvature = 0.0;
  double stencil = 0.0;
};

/// Checks Div_M lift(X) = Div_N X + <lift(X), H> at x for X = f d_x. The stencil is
/// halved up to three times while the residual exceeds `tolerance`; NumericError if
/// it never meets it, DomainError if psi is not positive near x.
WarpedCheck lemma1_warped_check(const WarpedPatch2D& patch, const std::function<double(double)>& f, double x,
                                double tolerance = 1e-6);

}  // namespace stochlab
