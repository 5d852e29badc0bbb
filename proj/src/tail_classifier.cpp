#include "stochlab/tail_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stochlab/errors.hpp"

namespace stochlab {

std::string to_string(TailKind kind) {
  switch (kind) {
    case TailKind::Divergent: return "Divergent";
    case TailKind::Convergent: return "Convergent";
    case TailKind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

constexpr double kDivergentSlope = 0.05;
constexpr double kRelIncrement = 1e-8;
constexpr double kMinExponent = 1.05;
constexpr double kExponentDrift = 0.01;
constexpr double kMaxRelError = 1e-2;

using Density = std::function<double(double)>;

struct TailBound {
  double q_hi, q_lo;
  double tail_hi, tail_lo;
  bool valid() const {
    return std::isfinite(q_hi) && std::isfinite(q_lo) && q_hi > kMinExponent && q_lo > kMinExponent &&
           q_hi >= q_lo * (1.0 - kExponentDrift);
  }
  double drift() const { return std::abs(q_hi - q_lo) / q_hi; }
};

// Local decay exponent -d log f / d log x at x, backward difference in log x.
double power_exponent(const Density& f, double x, double eps) {
  const double a = x * (1.0 - 2.0 * eps), b = x;
  return -(std::log(f(b)) - std::log(f(a))) / std::log(b / a);
}

// Same in s = log x for g(s) = x f(x).
double condensed_exponent(const Density& f, double x, double eps) {
  const double s = std::log(x);
  const double sa = s * (1.0 - 2.0 * eps), sb = s;
  const double xa = std::exp(sa), xb = std::exp(sb);
  return -(std::log(xb * f(xb)) - std::log(xa * f(xa))) / std::log(sb / sa);
}

TailClass decide(double I_hi, double I_lo, double H, double rho, const Density& f, double eps) {
  TailClass tc;
  tc.r_hi = H;
  tc.window_lo_value = I_lo;
  tc.window_hi_value = I_hi;
  if (std::isinf(I_hi)) {
    tc.classification = TailKind::Divergent;
    tc.fitted_exponent = std::numeric_limits<double>::infinity();
    tc.diagnostic = "cumulative integral overflowed";
    return tc;
  }
  if (I_hi == 0.0) {
    tc.classification = TailKind::Convergent;
    tc.diagnostic = "integrand underflowed to zero";
    return tc;
  }
  if (I_lo == 0.0) {
    tc.diagnostic = "all mass in the last window; window values 0 and " + std::to_string(I_hi);
    return tc;
  }
  const double L = H / rho;
  tc.fitted_exponent = std::log(I_hi / I_lo) / std::log(rho);
  if (L > 1.0) tc.log_growth_exponent = std::log(I_hi / I_lo) / std::log(std::log(H) / std::log(L));
  const double fH = f(H);
  if (fH == 0.0) {
    tc.classification = TailKind::Convergent;
    tc.value = I_hi;
    tc.error_bound = I_hi - I_lo;
    tc.diagnostic = "integrand underflowed to zero at the horizon";
    return tc;
  }

  std::optional<TailBound> best;
  auto consider = [&](TailBound b) {
    if (b.valid() && (!best || b.drift() < best->drift())) best = b;
  };
  {
    const double qh = power_exponent(f, H, eps), ql = power_exponent(f, L, eps);
    consider({qh, ql, H * fH / (qh - 1.0), L * f(L) / (ql - 1.0)});
  }
  if (L > 1.0) {
    const double qh = condensed_exponent(f, H, eps), ql = condensed_exponent(f, L, eps);
    consider({qh, ql, std::log(H) * H * fH / (qh - 1.0), std::log(L) * L * f(L) / (ql - 1.0)});
  }

  const double rel_inc = (I_hi - I_lo) / I_hi;
  if (best) {
    tc.value = I_hi + best->tail_hi;
    tc.error_bound = std::abs(tc.value - (I_lo + best->tail_lo));
    if (tc.error_bound <= kMaxRelError * tc.value) {
      tc.classification = TailKind::Convergent;
      return tc;
    }
  }
  if (tc.fitted_exponent > kDivergentSlope) {
    tc.classification = TailKind::Divergent;
    tc.value = 0.0;
    tc.error_bound = 0.0;
    return tc;
  }
  if (rel_inc < kRelIncrement) {
    tc.classification = TailKind::Convergent;
    tc.value = I_hi;
    tc.error_bound = I_hi - I_lo;
    return tc;
  }
  tc.classification = TailKind::Inconclusive;
  tc.diagnostic = "no stable tail bound; window values " + std::to_string(I_lo) + " and " + std::to_string(I_hi);
  return tc;
}

void check_term(double v, double x) {
  if (std::isnan(v) || v < 0.0)
    throw PreconditionError("integrand must be positive, got " + std::to_string(v) + " at " + std::to_string(x));
}

}  // namespace

TailClass classify_improper_integral(const std::function<double(double)>& integrand, double r_lo, double horizon) {
  if (!(r_lo > 0.0) || !(horizon > 4.0 * r_lo))
    throw PreconditionError("need 0 < r_lo and horizon > 4 r_lo");
  const Density f = [&integrand](double x) {
    const double v = integrand(x);
    check_term(v, x);
    return v;
  };
  const double rho = std::min(10.0, std::sqrt(horizon / r_lo));
  const double L = horizon / rho;

  std::vector<double> pts;
  for (double x = r_lo; x < horizon; x *= 2.0) pts.push_back(x);
  pts.push_back(L);
  pts.push_back(horizon);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(), [](double a, double b) { return std::abs(a - b) <= 1e-14 * b; }),
            pts.end());

  double I = 0.0, I_L = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double err = 0.0;
    const double piece =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, pts[i], pts[i + 1], 12, 1e-10, &err);
    I += piece;
    if (std::abs(pts[i + 1] - L) <= 1e-14 * L) I_L = I;
    if (std::isinf(I)) break;
  }
  TailClass tc = decide(I, I_L, horizon, rho, f, 1e-2);
  tc.r_lo = r_lo;
  return tc;
}

TailClass classify_series(const std::function<double(long)>& term, long k_lo, long k_hi) {
  if (k_lo < 1 || k_hi < 16 * k_lo) throw PreconditionError("need 1 <= k_lo and k_hi >= 16 k_lo");
  const double rho = std::min(10.0, std::sqrt(static_cast<double>(k_hi) / static_cast<double>(k_lo)));
  const long k_mid = std::lround(static_cast<double>(k_hi) / rho);
  double S = 0.0, S_mid = 0.0;
  for (long k = k_lo; k <= k_hi; ++k) {
    const double a = term(k);
    check_term(a, static_cast<double>(k));
    S += a;
    if (k == k_mid) S_mid = S;
  }
  const Density f = [&term](double x) { return term(std::lround(x)); };
  const double eps = std::max(0.01, 2.0 / static_cast<double>(k_mid));
  TailClass tc = decide(S, S_mid, static_cast<double>(k_hi), static_cast<double>(k_hi) / static_cast<double>(k_mid), f, eps);
  tc.r_lo = static_cast<double>(k_lo);
  return tc;
}

}  // namespace stochlab
