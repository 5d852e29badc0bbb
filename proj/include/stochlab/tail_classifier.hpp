#pragma once

// Divergence tests for improper integrals and series of positive terms.

#include <functional>
#include <string>

namespace stochlab {

enum class TailKind { Divergent, Convergent, Inconclusive };

std::string to_string(TailKind kind);

struct TailClass {
  TailKind classification = TailKind::Inconclusive;
  /// Log-log slope of the cumulative integral over the last window.
  double fitted_exponent = 0.0;
  /// d log I / d log log r over the same window; about 1 for 1/r.
  double log_growth_exponent = 0.0;
  /// Partial integral up to the horizon plus the tail estimate (Convergent only).
  double value = 0.0;
  double error_bound = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
  /// Cumulative integral at the start and end of the last window.
  double window_lo_value = 0.0;
  double window_hi_value = 0.0;
  std::string diagnostic;
};

/// Decision order on the last window [H/rho, H], rho = min(10, sqrt(H/r_lo)):
///  * a stable Cauchy tail bound whose two estimates of the total agree within 1%: Convergent;
///  * fitted_exponent > 0.05: Divergent;
///  * relative increment over the window < 1e-8: Convergent;
///  * otherwise Inconclusive.
/// The tail bound assumes f decays at least like x^{-q} beyond H, either in r
/// (tail <= H f(H)/(q-1)) or in s = log r (tail <= log H * H f(H)/(q_s-1)); it is
/// accepted when q > 1.05 and q did not decrease by more than 1% across the last window.
/// An integrand that overflows is Divergent; one that underflows to 0 is Convergent.
TailClass classify_improper_integral(const std::function<double(double)>& integrand, double r_lo, double horizon);

/// Same contract for sum_{k >= k_lo} a(k) with partial sums up to k_hi.
TailClass classify_series(const std::function<double(long)>& term, long k_lo, long k_hi);

}  // namespace stochlab
