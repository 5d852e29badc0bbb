#pragma once

// Rotationally symmetric model manifolds dr^2 + sigma(r)^2 dtheta^2.

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace stochlab {

/// Value and first two derivatives of a function of the radius.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// A radial function supplying value, f' and f'' at r.
using RadialFunction = std::function<Jet(double)>;

enum class ProfileKind { Euclidean, Hyperbolic, PolyExp, Cusp, Tabulated };

std::string to_string(ProfileKind kind);

/// Samples (r, sigma, sigma', sigma'') for a tabulated warping function.
struct TabulatedSamples {
  std::vector<double> r;
  std::vector<double> sigma;
  std::vector<double> dsigma;
  std::vector<double> d2sigma;
};

/// Warping function sigma with sigma(0) = 0, sigma'(0) = 1 and sigma > 0 on (0, inf).
///
/// PolyExp and Cusp tails are glued to sigma = r on [r0/2, r0] with the quintic
/// smoothstep w(s) = 10s^3 - 15s^4 + 6s^5, s = (r - r0/2)/(r0/2):
///   sigma = (1 - w) r + w tail(r),
/// which is C^2 because w' and w'' vanish at both ends of the blend.
class WarpingProfile {
 public:
  static WarpingProfile euclidean();
  static WarpingProfile hyperbolic(double k);
  /// sigma = r exp(a r^p) for r >= r0.
  static WarpingProfile poly_exp(double a, double p, double r0 = 1.0);
  /// sigma = exp(-a r^p) for r >= r0.
  static WarpingProfile cusp(double a, double p, double r0 = 1.0);
  /// Samples must be strictly increasing in r with positive sigma. The
  /// interpolated sigma'' has to agree with second differences of sigma within
  /// `consistency_tol` (relative), otherwise PreconditionError.
  static WarpingProfile tabulated(TabulatedSamples samples, double consistency_tol = 1e-4);

  ProfileKind kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }

  /// sigma, sigma', sigma'' at r. DomainError for r <= 0 or outside a table.
  Jet eval(double r) const;
  /// log sigma(r), finite even where sigma itself over- or underflows.
  double log_sigma(double r) const;
  /// sigma'/sigma, computed without forming sigma.
  double log_derivative(double r) const;

  /// Largest radius at which the profile is defined.
  double domain_end() const;
  std::string describe() const;

 private:
  WarpingProfile(ProfileKind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {}

  Jet eval_tail(double r) const;
  double log_tail(double r) const;
  double tail_log_derivative(double r) const;
  Jet eval_table(double r) const;
  void check_radius(double r) const;

  ProfileKind kind_;
  std::vector<double> params_;
  TabulatedSamples table_;
  std::vector<double> d2_slopes_;
};

/// A model manifold of dimension m with a computational horizon r_max.
class ModelManifold {
 public:
  /// When `cartan_hadamard` is set the profile is certified convex
  /// (sigma'' >= -1e-12) on a sample grid of (0, r_max]; PreconditionError otherwise.
  ModelManifold(int dim, WarpingProfile profile, double r_max, bool cartan_hadamard = false);

  int dim() const { return dim_; }
  const WarpingProfile& profile() const { return profile_; }
  double r_max() const { return r_max_; }
  bool cartan_hadamard() const { return cartan_hadamard_; }

  /// log S(r) = log omega_{m-1} + (m-1) log sigma(r).
  double log_sphere_area(double r) const;
  /// (m-1) sigma'/sigma, the drift of the radial Laplacian.
  double radial_drift(double r) const;
  void check_radius(double r) const;
  std::string describe() const;

 private:
  int dim_;
  WarpingProfile profile_;
  double r_max_;
  bool cartan_hadamard_;
};

/// Default computational horizon used by the CLI and golden models.
double default_horizon(ProfileKind kind);

/// Area of the unit (m-1)-sphere in R^m.
double unit_sphere_area(int m);

Jet sigma_eval(const WarpingProfile& profile, double r);
double sphere_area(const ModelManifold& model, double r);
/// V(r) = int_0^r S(t) dt by adaptive Gauss-Kronrod; NumericError if the error
/// estimate exceeds `rel_tol` relative to V.
double ball_volume(const ModelManifold& model, double r, double rel_tol = 1e-10);
/// V(r)/S(r), evaluated as int_0^r exp(log S(t) - log S(r)) dt so that it stays
/// finite when V and S individually overflow.
double volume_area_ratio(const ModelManifold& model, double r);
/// Radial sectional curvature -sigma''/sigma.
double radial_curvature(const ModelManifold& model, double r);
/// f''(r) + (m-1) (sigma'/sigma)(r) f'(r).
double radial_laplacian_apply(const ModelManifold& model, const RadialFunction& f, double r);

}  // namespace stochlab
