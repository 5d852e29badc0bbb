#include "stochlab/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stochlab/errors.hpp"

namespace stochlab {

namespace {

constexpr double kPi = std::numbers::pi;

struct Blend {
  double w, dw, d2w;
};

// Quintic smoothstep on [r0/2, r0].
Blend blend_weight(double r, double r0) {
  const double half = 0.5 * r0;
  const double s = (r - half) / half;
  const double s2 = s * s;
  const double s3 = s2 * s;
  return {10.0 * s3 - 15.0 * s3 * s + 6.0 * s3 * s2,
          (30.0 * s2 - 60.0 * s3 + 30.0 * s2 * s2) / half,
          (60.0 * s - 180.0 * s2 + 120.0 * s3) / (half * half)};
}

// Fritsch-Carlson slopes for a monotone piecewise cubic through (x, y).
std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> delta(n - 1), m(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  m[0] = delta[0];
  m[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      m[i] = 0.0;
    } else {
      const double h0 = x[i] - x[i - 1];
      const double h1 = x[i + 1] - x[i];
      const double w1 = 2.0 * h1 + h0;
      const double w2 = h1 + 2.0 * h0;
      m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  return m;
}

double hermite(double t, double h, double y0, double y1, double m0, double m1) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * m1;
}

}  // namespace

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Euclidean: return "euclidean";
    case ProfileKind::Hyperbolic: return "hyperbolic";
    case ProfileKind::PolyExp: return "polyexp";
    case ProfileKind::Cusp: return "cusp";
    case ProfileKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

WarpingProfile WarpingProfile::euclidean() { return {ProfileKind::Euclidean, {}}; }

WarpingProfile WarpingProfile::hyperbolic(double k) {
  if (!(k > 0.0)) throw PreconditionError("hyperbolic profile needs k > 0");
  return {ProfileKind::Hyperbolic, {k}};
}

WarpingProfile WarpingProfile::poly_exp(double a, double p, double r0) {
  if (!(a > 0.0) || !(p > 0.0) || !(r0 > 0.0))
    throw PreconditionError("polyexp profile needs a, p, r0 > 0");
  return {ProfileKind::PolyExp, {a, p, r0}};
}

WarpingProfile WarpingProfile::cusp(double a, double p, double r0) {
  if (!(a > 0.0) || !(p > 0.0) || !(r0 > 0.0))
    throw PreconditionError("cusp profile needs a, p, r0 > 0");
  return {ProfileKind::Cusp, {a, p, r0}};
}

WarpingProfile WarpingProfile::tabulated(TabulatedSamples samples, double consistency_tol) {
  const std::size_t n = samples.r.size();
  if (n < 4 || samples.sigma.size() != n || samples.dsigma.size() != n || samples.d2sigma.size() != n)
    throw PreconditionError("tabulated profile needs >= 4 complete samples");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(samples.r[i] > 0.0) || !(samples.sigma[i] > 0.0))
      throw PreconditionError("tabulated profile needs r > 0 and sigma > 0");
    if (i > 0 && !(samples.r[i] > samples.r[i - 1]))
      throw PreconditionError("tabulated radii must be strictly increasing");
  }
  // Second differences of sigma against the tabulated sigma''.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = samples.r[i] - samples.r[i - 1];
    const double h1 = samples.r[i + 1] - samples.r[i];
    const double fd = 2.0 *
                      (h0 * samples.sigma[i + 1] - (h0 + h1) * samples.sigma[i] + h1 * samples.sigma[i - 1]) /
                      (h0 * h1 * (h0 + h1));
    const double scale = std::max(1.0, std::abs(samples.d2sigma[i]));
    if (std::abs(fd - samples.d2sigma[i]) > consistency_tol * scale) {
      std::ostringstream msg;
      msg << "tabulated sigma'' inconsistent with sigma at r = " << samples.r[i] << ": table "
          << samples.d2sigma[i] << ", second difference " << fd;
      throw PreconditionError(msg.str());
    }
  }
  WarpingProfile out(ProfileKind::Tabulated, {consistency_tol});
  out.d2_slopes_ = pchip_slopes(samples.r, samples.d2sigma);
  out.table_ = std::move(samples);
  return out;
}

void WarpingProfile::check_radius(double r) const {
  if (!(r > 0.0)) throw DomainError("warping function evaluated at r <= 0");
  if (kind_ == ProfileKind::Tabulated && (r < table_.r.front() || r > table_.r.back())) {
    std::ostringstream msg;
    msg << "r = " << r << " outside tabulated range [" << table_.r.front() << ", " << table_.r.back() << "]";
    throw DomainError(msg.str());
  }
}

double WarpingProfile::domain_end() const {
  if (kind_ == ProfileKind::Tabulated) return table_.r.back();
  return std::numeric_limits<double>::infinity();
}

Jet WarpingProfile::eval_tail(double r) const {
  const double a = params_[0], p = params_[1];
  const double g1 = a * p * std::pow(r, p - 1.0);
  const double g2 = a * p * (p - 1.0) * std::pow(r, p - 2.0);
  if (kind_ == ProfileKind::PolyExp) {
    const double e = std::exp(a * std::pow(r, p));
    return {r * e, e * (1.0 + r * g1), e * (2.0 * g1 + r * g1 * g1 + r * g2)};
  }
  const double t = std::exp(-a * std::pow(r, p));
  return {t, -g1 * t, (g1 * g1 - g2) * t};
}

double WarpingProfile::log_tail(double r) const {
  const double a = params_[0], p = params_[1];
  if (kind_ == ProfileKind::PolyExp) return std::log(r) + a * std::pow(r, p);
  return -a * std::pow(r, p);
}

double WarpingProfile::tail_log_derivative(double r) const {
  const double a = params_[0], p = params_[1];
  const double g1 = a * p * std::pow(r, p - 1.0);
  return kind_ == ProfileKind::PolyExp ? 1.0 / r + g1 : -g1;
}

Jet WarpingProfile::eval_table(double r) const {
  const auto& x = table_.r;
  auto it = std::upper_bound(x.begin(), x.end(), r);
  std::size_t i = it == x.begin() ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
  i = std::min(i, x.size() - 2);
  const double h = x[i + 1] - x[i];
  const double t = (r - x[i]) / h;
  const auto& slopes = d2_slopes_;
  return {hermite(t, h, table_.sigma[i], table_.sigma[i + 1], table_.dsigma[i], table_.dsigma[i + 1]),
          hermite(t, h, table_.dsigma[i], table_.dsigma[i + 1], table_.d2sigma[i], table_.d2sigma[i + 1]),
          hermite(t, h, table_.d2sigma[i], table_.d2sigma[i + 1], slopes[i], slopes[i + 1])};
}

Jet WarpingProfile::eval(double r) const {
  check_radius(r);
  switch (kind_) {
    case ProfileKind::Euclidean: return {r, 1.0, 0.0};
    case ProfileKind::Hyperbolic: {
      const double k = params_[0];
      const double s = std::sinh(k * r) / k;
      return {s, std::cosh(k * r), k * k * s};
    }
    case ProfileKind::PolyExp:
    case ProfileKind::Cusp: {
      const double r0 = params_[2];
      if (r <= 0.5 * r0) return {r, 1.0, 0.0};
      const Jet tail = eval_tail(r);
      if (r >= r0) return tail;
      const Blend b = blend_weight(r, r0);
      return {(1.0 - b.w) * r + b.w * tail.value,
              -b.dw * r + (1.0 - b.w) + b.dw * tail.value + b.w * tail.d1,
              -b.d2w * r - 2.0 * b.dw + b.d2w * tail.value + 2.0 * b.dw * tail.d1 + b.w * tail.d2};
    }
    case ProfileKind::Tabulated: return eval_table(r);
  }
  throw InternalError("unknown profile kind");
}

double WarpingProfile::log_sigma(double r) const {
  check_radius(r);
  switch (kind_) {
    case ProfileKind::Euclidean: return std::log(r);
    case ProfileKind::Hyperbolic: {
      const double k = params_[0];
      const double x = k * r;
      if (x < 1.0) return std::log(std::sinh(x) / k);
      return x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0 * k);
    }
    case ProfileKind::PolyExp:
    case ProfileKind::Cusp:
      if (r >= params_[2]) return log_tail(r);
      return std::log(eval(r).value);
    case ProfileKind::Tabulated: return std::log(eval_table(r).value);
  }
  throw InternalError("unknown profile kind");
}

double WarpingProfile::log_derivative(double r) const {
  check_radius(r);
  switch (kind_) {
    case ProfileKind::Euclidean: return 1.0 / r;
    case ProfileKind::Hyperbolic: return params_[0] / std::tanh(params_[0] * r);
    case ProfileKind::PolyExp:
    case ProfileKind::Cusp:
      if (r >= params_[2]) return tail_log_derivative(r);
      break;
    case ProfileKind::Tabulated: break;
  }
  const Jet j = eval(r);
  return j.d1 / j.value;
}

std::string WarpingProfile::describe() const {
  std::ostringstream out;
  out << to_string(kind_);
  switch (kind_) {
    case ProfileKind::Hyperbolic: out << "(k=" << params_[0] << ")"; break;
    case ProfileKind::PolyExp:
    case ProfileKind::Cusp:
      out << "(a=" << params_[0] << ",p=" << params_[1] << ",r0=" << params_[2] << ")";
      break;
    case ProfileKind::Tabulated: out << "(n=" << table_.r.size() << ")"; break;
    default: break;
  }
  return out.str();
}

ModelManifold::ModelManifold(int dim, WarpingProfile profile, double r_max, bool cartan_hadamard)
    : dim_(dim), profile_(std::move(profile)), r_max_(r_max), cartan_hadamard_(cartan_hadamard) {
  if (dim_ < 2) throw PreconditionError("model dimension must be >= 2");
  if (!(r_max_ > 0.0)) throw PreconditionError("r_max must be positive");
  if (r_max_ > profile_.domain_end()) throw PreconditionError("r_max beyond the profile's domain");
  if (cartan_hadamard_) {
    constexpr int kSamples = 2000;
    for (int j = 1; j <= kSamples; ++j) {
      const double r = r_max_ * j / kSamples;
      const Jet s = profile_.eval(r);
      if (!(s.d2 >= -1e-12)) {
        std::ostringstream msg;
        msg << "cartan_hadamard flag rejected: sigma''(" << r << ") = " << s.d2 << " < 0";
        throw PreconditionError(msg.str());
      }
    }
  }
}

void ModelManifold::check_radius(double r) const {
  if (!(r > 0.0)) throw DomainError("radius must be positive");
  if (r > r_max_ * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "radius " << r << " beyond computational horizon r_max = " << r_max_;
    throw DomainError(msg.str());
  }
}

double ModelManifold::log_sphere_area(double r) const {
  check_radius(r);
  return std::log(unit_sphere_area(dim_)) + (dim_ - 1) * profile_.log_sigma(r);
}

double ModelManifold::radial_drift(double r) const {
  check_radius(r);
  return (dim_ - 1) * profile_.log_derivative(r);
}

std::string ModelManifold::describe() const {
  std::ostringstream out;
  out << "m=" << dim_ << " " << profile_.describe() << " r_max=" << r_max_;
  if (cartan_hadamard_) out << " cartan_hadamard";
  return out.str();
}

double default_horizon(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Euclidean: return 1e6;
    case ProfileKind::Hyperbolic: return 200.0;
    case ProfileKind::PolyExp:
    case ProfileKind::Cusp: return 32.0;
    case ProfileKind::Tabulated: break;
  }
  return std::numeric_limits<double>::infinity();
}

double unit_sphere_area(int m) {
  static const std::array<double, 11> table = {
      0.0,
      2.0,
      2.0 * kPi,
      4.0 * kPi,
      2.0 * kPi * kPi,
      8.0 * kPi * kPi / 3.0,
      kPi * kPi * kPi,
      16.0 * kPi * kPi * kPi / 15.0,
      kPi * kPi * kPi * kPi / 3.0,
      32.0 * kPi * kPi * kPi * kPi / 105.0,
      kPi * kPi * kPi * kPi * kPi / 12.0,
  };
  if (m < 1) throw PreconditionError("sphere dimension must be >= 0");
  if (m <= 10) return table[static_cast<std::size_t>(m)];
  return 2.0 * std::pow(kPi, 0.5 * m) / std::tgamma(0.5 * m);
}

Jet sigma_eval(const WarpingProfile& profile, double r) { return profile.eval(r); }

double sphere_area(const ModelManifold& model, double r) {
  model.check_radius(r);
  return unit_sphere_area(model.dim()) * std::pow(model.profile().eval(r).value, model.dim() - 1);
}

double ball_volume(const ModelManifold& model, double r, double rel_tol) {
  model.check_radius(r);
  double error = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double t) { return sphere_area(model, t); }, 0.0, r, 20, 1e-13, &error);
  if (!std::isfinite(v) || error > rel_tol * std::abs(v)) {
    std::ostringstream msg;
    msg << "ball_volume quadrature failed at r = " << r << ": value " << v << ", error estimate " << error;
    throw NumericError(msg.str());
  }
  return v;
}

double volume_area_ratio(const ModelManifold& model, double r) {
  const double log_s = model.log_sphere_area(r);
  // Scale by the sampled maximum of log S on (0, r] so the integrand stays O(1).
  double peak = log_s;
  constexpr int samples = 256;
  for (int i = 1; i < samples; ++i) peak = std::max(peak, model.log_sphere_area(r * i / samples));
  // Where S grows quickly the mass sits within a few 1/drift of r.
  std::vector<double> cuts{0.0};
  const double drift = model.radial_drift(r);
  if (drift > 0.0) {
    for (double c : {1024.0, 256.0, 64.0, 16.0, 4.0, 1.0}) {
      if (r - c / drift > cuts.back()) cuts.push_back(r - c / drift);
    }
  }
  cuts.push_back(r);
  const auto f = [&](double t) { return std::exp(model.log_sphere_area(t) - peak); };
  double scaled = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    scaled += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 12, 1e-8);
  return scaled * std::exp(peak - log_s);
}

double radial_curvature(const ModelManifold& model, double r) {
  model.check_radius(r);
  const auto& prof = model.profile();
  if ((prof.kind() == ProfileKind::PolyExp || prof.kind() == ProfileKind::Cusp) && r >= prof.params()[2]) {
    const double a = prof.params()[0], p = prof.params()[1];
    const double g1 = a * p * std::pow(r, p - 1.0);
    const double g2 = a * p * (p - 1.0) * std::pow(r, p - 2.0);
    if (prof.kind() == ProfileKind::PolyExp) return -(2.0 * g1 + r * g1 * g1 + r * g2) / r;
    return -(g1 * g1 - g2);
  }
  if (prof.kind() == ProfileKind::Hyperbolic) return -prof.params()[0] * prof.params()[0];
  const Jet s = prof.eval(r);
  return -s.d2 / s.value;
}

double radial_laplacian_apply(const ModelManifold& model, const RadialFunction& f, double r) {
  model.check_radius(r);
  const Jet j = f(r);
  return j.d2 + model.radial_drift(r) * j.d1;
}

}  // namespace stochlab
