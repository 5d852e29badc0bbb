#pragma once

// Independent reference values for tests. Nothing here calls into the library.

#include <cmath>
#include <numbers>

namespace oracle {

/// Modified Bessel I0 by its power series sum (x^2/4)^k / (k!)^2.
inline double bessel_i0(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

/// Modified Bessel K0 from the integral representation
/// K0(x) = int_0^inf exp(-x cosh t) dt, composite Simpson on [0, T].
inline double bessel_k0(double x) {
  const double upper = std::acosh(std::max(1.0, 750.0 / x));
  const int n = 40000;
  const double h = upper / n;
  double sum = std::exp(-x) + std::exp(-x * std::cosh(upper));
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * std::exp(-x * std::cosh(i * h));
  return sum * h / 3.0;
}

/// sinh and cosh by Taylor series.
inline double sinh_series(double x) {
  double term = x, sum = x;
  for (int k = 1; k < 60; ++k) {
    term *= x * x / ((2.0 * k) * (2.0 * k + 1.0));
    sum += term;
  }
  return sum;
}

inline double cosh_series(double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= x * x / ((2.0 * k - 1.0) * (2.0 * k));
    sum += term;
  }
  return sum;
}

}  // namespace oracle
