#include "stochlab/immersion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "stochlab/errors.hpp"

namespace stochlab {

namespace {

struct Radial {
  double rho;
  Vec omega;
  double F;   // (sigma/rho)^2
  double dF;  // dF/drho
};

Radial radial_data(const ModelManifold& model, const Vec& y) {
  if (y.size() != model.dim()) throw PreconditionError("point dimension does not match the model");
  const double rho = y.norm();
  if (!(rho > 0.0)) throw DomainError("point at the pole");
  model.check_radius(rho);
  const Jet s = model.profile().eval(rho);
  const double f = s.value / rho;
  const double df = (s.d1 * rho - s.value) / (rho * rho);
  return {rho, y / rho, f * f, 2.0 * f * df};
}

// d_c g_ab.
Mat metric_derivative(const Radial& r, int c) {
  const auto n = r.omega.size();
  const Mat Pt = Mat::Identity(n, n) - r.omega * r.omega.transpose();
  Vec dw = -r.omega[c] * r.omega;
  dw[c] += 1.0;
  dw /= r.rho;
  return r.dF * r.omega[c] * Pt + (1.0 - r.F) * (dw * r.omega.transpose() + r.omega * dw.transpose());
}

Mat metric_of(const Radial& r) {
  const auto n = r.omega.size();
  const Mat Pr = r.omega * r.omega.transpose();
  return Pr + r.F * (Mat::Identity(n, n) - Pr);
}

Vec connection(const Radial& r, const Vec& v, const Vec& w) {
  const auto n = r.omega.size();
  Mat dv = Mat::Zero(n, n), dw = Mat::Zero(n, n);
  std::vector<Mat> d;
  for (int c = 0; c < n; ++c) {
    d.push_back(metric_derivative(r, c));
    dv += v[c] * d.back();
    dw += w[c] * d.back();
  }
  Vec lowered = 0.5 * (dv * w + dw * v);
  for (int l = 0; l < n; ++l) lowered[l] -= 0.5 * v.dot(d[static_cast<std::size_t>(l)] * w);
  const Mat Pr = r.omega * r.omega.transpose();
  return Pr * lowered + (lowered - Pr * lowered) / r.F;
}

struct Derivatives {
  Mat J;
  std::vector<Vec> second;  // i * k + j
};

Derivatives derivatives(const ImmersedPatch& patch, const Vec& p, double h) {
  const int k = patch.k();
  if (patch.exact()) return {patch.jacobian(p), patch.hessian(p)};
  const Vec y0 = patch.phi(p);
  Derivatives d{Mat(y0.size(), k), std::vector<Vec>(static_cast<std::size_t>(k * k))};
  auto at = [&](int i, double a, int j, double b) {
    Vec q = p;
    q[i] += a;
    q[j] += b;
    return patch.phi(q);
  };
  for (int i = 0; i < k; ++i) {
    const Vec plus = at(i, h, i, 0.0), minus = at(i, -h, i, 0.0);
    d.J.col(i) = (plus - minus) / (2.0 * h);
    d.second[static_cast<std::size_t>(i * k + i)] = (plus - 2.0 * y0 + minus) / (h * h);
    for (int j = 0; j < i; ++j) {
      const Vec m = (at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h)) / (4.0 * h * h);
      d.second[static_cast<std::size_t>(i * k + j)] = m;
      d.second[static_cast<std::size_t>(j * k + i)] = m;
    }
  }
  return d;
}

InducedGeometry geometry_from(const ImmersedPatch& patch, const Vec& y, const Mat& J) {
  const Radial r = radial_data(patch.ambient, y);
  const Mat g = metric_of(r);
  InducedGeometry out;
  out.point = y;
  out.rho = r.rho;
  out.tangents = J;
  out.form = J.transpose() * g * J;
  out.frame = Mat(J.rows(), J.cols());
  for (int i = 0; i < J.cols(); ++i) {
    Vec v = J.col(i);
    for (int j = 0; j < i; ++j) v -= out.frame.col(j).dot(g * v) * out.frame.col(j);
    const double scale = std::sqrt(J.col(i).dot(g * J.col(i)));
    const double len = std::sqrt(std::max(0.0, v.dot(g * v)));
    if (!(len > 1e-10 * scale)) throw DomainError("degenerate immersion: differential loses rank");
    out.frame.col(i) = v / len;
  }
  return out;
}

Vec raw_mean_curvature(const ImmersedPatch& patch, const Vec& p, double h, InducedGeometry* geo = nullptr) {
  const Derivatives d = derivatives(patch, p, h);
  const Vec y = patch.phi(p);
  const InducedGeometry ig = geometry_from(patch, y, d.J);
  const Radial r = radial_data(patch.ambient, y);
  const Mat g = metric_of(r);
  const Mat Ginv = ig.form.inverse();
  const int k = patch.k();
  Vec A = Vec::Zero(y.size());
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      A += Ginv(i, j) * (d.second[static_cast<std::size_t>(i * k + j)] + connection(r, d.J.col(i), d.J.col(j)));
  for (int i = 0; i < k; ++i) A -= ig.frame.col(i).dot(g * A) * ig.frame.col(i);
  if (geo) *geo = ig;
  return A;
}

double g_norm(const ModelManifold& model, const Vec& y, const Vec& v) {
  return std::sqrt(std::max(0.0, v.dot(ambient_metric(model, y) * v)));
}

void check_patch(const ImmersedPatch& patch) {
  if (!patch.phi) throw PreconditionError("patch needs a parametrization");
  if (patch.lo.size() != patch.hi.size() || patch.k() < 1) throw PreconditionError("parameter box malformed");
  if (patch.k() >= patch.ambient.dim()) throw PreconditionError("patch dimension must be below the ambient dimension");
  for (int i = 0; i < patch.k(); ++i)
    if (!(patch.lo[i] < patch.hi[i])) throw PreconditionError("parameter box malformed");
  if (!(patch.stencil > 0.0)) throw PreconditionError("stencil must be positive");
}

double radial_value(const ImmersedPatch& patch, const RadialFunction& g, const Vec& p) {
  return g(patch.phi(p).norm()).value;
}

// Intrinsic Laplace-Beltrami (1/sqrt G) d_i (sqrt G G^ij d_j F) by central differences.
double intrinsic_laplacian(const ImmersedPatch& patch, const RadialFunction& g, const Vec& p) {
  const double h = patch.stencil;
  const int k = patch.k();
  auto flux = [&](const Vec& q, int i) {
    const Derivatives d = derivatives(patch, q, h);
    const Radial r = radial_data(patch.ambient, patch.phi(q));
    const Mat G = d.J.transpose() * metric_of(r) * d.J;
    const Mat Ginv = G.inverse();
    double s = 0.0;
    for (int j = 0; j < k; ++j) {
      Vec a = q, b = q;
      a[j] += h;
      b[j] -= h;
      s += Ginv(i, j) * (radial_value(patch, g, a) - radial_value(patch, g, b)) / (2.0 * h);
    }
    return std::sqrt(G.determinant()) * s;
  };
  const Derivatives d0 = derivatives(patch, p, h);
  const Mat G0 = d0.J.transpose() * metric_of(radial_data(patch.ambient, patch.phi(p))) * d0.J;
  double div = 0.0;
  for (int i = 0; i < k; ++i) {
    Vec a = p, b = p;
    a[i] += h;
    b[i] -= h;
    div += (flux(a, i) - flux(b, i)) / (2.0 * h);
  }
  return div / std::sqrt(G0.determinant());
}

Mat rotation(int n, double angle) {
  Mat R = Mat::Identity(n, n);
  R(0, 0) = std::cos(angle);
  R(0, 1) = -std::sin(angle);
  R(1, 0) = std::sin(angle);
  R(1, 1) = std::cos(angle);
  return R;
}

// y(t, s) = rho(s) n(t, beta(s)) with n the unit vector of azimuth t and colatitude beta.
ImmersedPatch spherical_patch(std::string name, ModelManifold model, Vec lo, Vec hi,
                              std::function<Jet(double)> rho, std::function<Jet(double)> beta) {
  ImmersedPatch p{std::move(name), std::move(model), std::move(lo), std::move(hi), {}, {}, {}};
  auto frame = [](double t, double b) {
    Vec n(3), nt(3), nb(3), ntt(3), ntb(3);
    n << std::cos(t) * std::sin(b), std::sin(t) * std::sin(b), std::cos(b);
    nt << -std::sin(t) * std::sin(b), std::cos(t) * std::sin(b), 0.0;
    nb << std::cos(t) * std::cos(b), std::sin(t) * std::cos(b), -std::sin(b);
    ntt << -std::cos(t) * std::sin(b), -std::sin(t) * std::sin(b), 0.0;
    ntb << -std::sin(t) * std::cos(b), std::cos(t) * std::cos(b), 0.0;
    return std::array<Vec, 5>{n, nt, nb, ntt, ntb};
  };
  p.phi = [=](const Vec& u) {
    const Jet r = rho(u[1]), b = beta(u[1]);
    return Vec(r.value * frame(u[0], b.value)[0]);
  };
  p.jacobian = [=](const Vec& u) {
    const Jet r = rho(u[1]), b = beta(u[1]);
    const auto f = frame(u[0], b.value);
    Mat J(3, 2);
    J.col(0) = r.value * f[1];
    J.col(1) = r.d1 * f[0] + r.value * b.d1 * f[2];
    return J;
  };
  p.hessian = [=](const Vec& u) {
    const Jet r = rho(u[1]), b = beta(u[1]);
    const auto f = frame(u[0], b.value);
    const Vec tt = r.value * f[3];
    const Vec ts = r.d1 * f[1] + r.value * b.d1 * f[4];
    const Vec ss = r.d2 * f[0] + (2.0 * r.d1 * b.d1 + r.value * b.d2) * f[2] - r.value * b.d1 * b.d1 * f[0];
    return std::vector<Vec>{tt, ts, ts, ss};
  };
  return p;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

Mat ambient_metric(const ModelManifold& model, const Vec& y) { return metric_of(radial_data(model, y)); }

Vec ambient_connection(const ModelManifold& model, const Vec& y, const Vec& v, const Vec& w) {
  return connection(radial_data(model, y), v, w);
}

std::vector<Vec> ImmersedPatch::sample_grid(int per_axis) const {
  if (per_axis < 2) throw PreconditionError("need at least two samples per axis");
  const int dim = k();
  std::vector<Vec> out;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    Vec p(dim);
    for (int i = 0; i < dim; ++i)
      p[i] = lo[i] + (hi[i] - lo[i]) * (idx[static_cast<std::size_t>(i)] / static_cast<double>(per_axis - 1));
    out.push_back(p);
    int i = 0;
    while (i < dim && ++idx[static_cast<std::size_t>(i)] == per_axis) idx[static_cast<std::size_t>(i++)] = 0;
    if (i == dim) break;
  }
  return out;
}

ImmersedPatch finite_difference_copy(const ImmersedPatch& patch, double stencil) {
  ImmersedPatch out = patch;
  out.jacobian = nullptr;
  out.hessian = nullptr;
  out.stencil = stencil;
  return out;
}

ImmersedPatch theta_shift(const ImmersedPatch& patch, double angle) {
  ImmersedPatch out = patch;
  const Mat R = rotation(patch.ambient.dim(), angle);
  const auto phi = patch.phi;
  out.phi = [R, phi](const Vec& u) { return Vec(R * phi(u)); };
  if (patch.jacobian) {
    const auto jac = patch.jacobian;
    out.jacobian = [R, jac](const Vec& u) { return Mat(R * jac(u)); };
  }
  if (patch.hessian) {
    const auto hess = patch.hessian;
    out.hessian = [R, hess](const Vec& u) {
      std::vector<Vec> h = hess(u);
      for (Vec& v : h) v = R * v;
      return h;
    };
  }
  return out;
}

InducedGeometry induced_geometry(const ImmersedPatch& patch, const Vec& p) {
  check_patch(patch);
  return geometry_from(patch, patch.phi(p), derivatives(patch, p, patch.stencil).J);
}

MeanCurvatureSample mean_curvature(const ImmersedPatch& patch, const Vec& p) {
  check_patch(patch);
  MeanCurvatureSample s;
  s.param = p;
  InducedGeometry geo;
  if (patch.exact()) {
    s.H = raw_mean_curvature(patch, p, patch.stencil, &geo);
  } else {
    const Vec coarse = raw_mean_curvature(patch, p, patch.stencil, &geo);
    const Vec fine = raw_mean_curvature(patch, p, 0.5 * patch.stencil);
    s.H = (4.0 * fine - coarse) / 3.0;
    s.refinement_delta = g_norm(patch.ambient, geo.point, fine - coarse);
  }
  s.point = geo.point;
  s.norm = g_norm(patch.ambient, geo.point, s.H);
  if (s.refinement_delta > 1e-4 * (1.0 + s.norm)) {
    std::ostringstream msg;
    msg << "mean curvature unstable under stencil refinement: change " << s.refinement_delta;
    throw NumericError(msg.str());
  }
  if (s.norm > 1e-12) {
    const Mat g = ambient_metric(patch.ambient, geo.point);
    for (int i = 0; i < patch.k(); ++i) {
      const Vec t = geo.tangents.col(i);
      s.normality = std::max(s.normality, std::abs(t.dot(g * s.H)) / (s.norm * std::sqrt(t.dot(g * t))));
    }
  }
  return s;
}

MeanCurvatureField mean_curvature_field(const ImmersedPatch& patch, int per_axis) {
  MeanCurvatureField f;
  for (const Vec& p : patch.sample_grid(per_axis)) {
    f.samples.push_back(mean_curvature(patch, p));
    f.sup = std::max(f.sup, f.samples.back().norm);
  }
  return f;
}

Supremum mean_curvature_supremum(const ImmersedPatch& patch) {
  Supremum s;
  s.per_axis = 2 * patch.samples_per_axis - 1;
  s.coarse = mean_curvature_field(patch, patch.samples_per_axis).sup;
  s.value = mean_curvature_field(patch, s.per_axis).sup;
  s.refinement_delta = s.value - s.coarse;
  return s;
}

CompositionCheck laplacian_composition_check(const ImmersedPatch& patch, const RadialFunction& g, const Vec& p) {
  check_patch(patch);
  InducedGeometry geo;
  const Vec H = raw_mean_curvature(patch, p, patch.stencil, &geo);
  const Jet gj = g(geo.rho);
  const Vec omega = geo.point / geo.rho;
  const double log_d = patch.ambient.profile().log_derivative(geo.rho);
  CompositionCheck c;
  for (int i = 0; i < patch.k(); ++i) {
    const double a = geo.frame.col(i).dot(omega);
    c.hessian_term += gj.d2 * a * a + gj.d1 * log_d * (1.0 - a * a);
  }
  c.mean_curvature_term = gj.d1 * H.dot(omega);
  c.rhs = c.hessian_term + c.mean_curvature_term;
  c.lhs = intrinsic_laplacian(patch, g, p);
  c.residual = std::abs(c.lhs - c.rhs);
  return c;
}

CompositionConvergence composition_convergence(const ImmersedPatch& patch, const RadialFunction& g, double stencil) {
  CompositionConvergence out;
  out.stencil = stencil;
  const ImmersedPatch coarse = finite_difference_copy(patch, stencil);
  const ImmersedPatch fine = finite_difference_copy(patch, 0.5 * stencil);
  for (const Vec& p : patch.sample_grid()) {
    out.residual_coarse = std::max(out.residual_coarse, laplacian_composition_check(coarse, g, p).residual);
    out.residual_fine = std::max(out.residual_fine, laplacian_composition_check(fine, g, p).residual);
  }
  out.ratio = out.residual_fine > 0.0 ? out.residual_coarse / out.residual_fine : INFINITY;
  return out;
}

ChainReport supersolution_chain_check(const ImmersedPatch& patch, double lambda, double R) {
  check_patch(patch);
  if (!patch.ambient.cartan_hadamard()) throw PreconditionError("ambient must be Cartan-Hadamard");
  if (!(lambda > 0.0)) throw PreconditionError("lambda must be positive");
  if (!(R > 0.0)) throw PreconditionError("radius must be positive");
  const std::vector<Vec> grid = patch.sample_grid();
  for (const Vec& p : grid)
    if (!(patch.phi(p).norm() >= R * (1.0 - 1e-12))) throw PreconditionError("patch must lie outside the ball B(o, R)");

  ChainReport rep;
  rep.lambda = lambda;
  rep.R = R;
  const MeanCurvatureField field = mean_curvature_field(patch, patch.samples_per_axis);
  rep.sup_H = field.sup;
  const double sl = std::sqrt(lambda);
  rep.mu = lambda + sl * rep.sup_H;
  const RadialFunction u = [sl, R](double r) {
    const double v = std::exp(-sl * (r - R));
    return Jet{v, -sl * v, sl * sl * v};
  };
  int holding = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const MeanCurvatureSample& m = field.samples[i];
    ChainSample c;
    c.param = grid[i];
    c.rho = m.point.norm();
    const Jet uj = u(c.rho);
    c.laplacian_u = intrinsic_laplacian(patch, u, grid[i]);
    c.bound = uj.d2 + uj.d1 * m.H.dot(m.point / c.rho);
    c.mu_u = rep.mu * uj.value;
    c.slack_first = c.bound - c.laplacian_u;
    c.slack_second = c.mu_u - c.bound;
    const double tol = 1e-6 * (1.0 + std::abs(c.laplacian_u) + std::abs(c.bound) + std::abs(c.mu_u));
    c.holds = c.slack_first >= -tol && c.slack_second >= -tol;
    holding += c.holds ? 1 : 0;
    rep.samples.push_back(c);
  }
  rep.fraction_holding = static_cast<double>(holding) / static_cast<double>(grid.size());
  rep.all_hold = holding == static_cast<int>(grid.size());
  return rep;
}

ImmersedPatch geodesic_slice_patch() {
  return spherical_patch(
      "geodesic slice of H^3", ModelManifold(3, WarpingProfile::hyperbolic(1.0), 200.0, true), vec2(0.0, 1.0),
      vec2(1.0, 2.0), [](double s) { return Jet{s, 1.0, 0.0}; },
      [](double) { return Jet{0.5 * std::numbers::pi, 0.0, 0.0}; });
}

ImmersedPatch sphere_patch(double radius) {
  if (!(radius > 0.0)) throw PreconditionError("radius must be positive");
  std::ostringstream name;
  name << "sphere rho=" << radius << " in R^3";
  return spherical_patch(
      name.str(), ModelManifold(3, WarpingProfile::euclidean(), 1e6, true), vec2(0.0, 1.0), vec2(1.0, 2.0),
      [radius](double) { return Jet{radius, 0.0, 0.0}; }, [](double s) { return Jet{s, 1.0, 0.0}; });
}

ImmersedPatch horosphere_patch(double level) {
  if (!(level > 0.0) || level == 1.0) throw PreconditionError("horosphere level must be positive and not 1");
  const double c = level;
  // Distance from (0, 0, 1) in the upper half-space: cosh rho = 1 + (s^2 + (c-1)^2) / (2c).
  auto rho = [c](double s) {
    const double q = 1.0 + (s * s + (c - 1.0) * (c - 1.0)) / (2.0 * c);
    const double q1 = s / c, q2 = 1.0 / c, w = q * q - 1.0;
    return Jet{std::acosh(q), q1 / std::sqrt(w), (q2 * w - q * q1 * q1) / std::pow(w, 1.5)};
  };
  // Colatitude of the image under the Cayley map to the ball centred at (0, 0, 1).
  auto beta = [c](double s) {
    const double N = 2.0 * s, M = 1.0 - s * s - c * c;
    const double Q = N * N + M * M, P = 2.0 * (1.0 - c * c + s * s);
    const double dP = 4.0 * s, dQ = 8.0 * s - 4.0 * s * M;
    return Jet{std::atan2(N, M), P / Q, (dP * Q - P * dQ) / (Q * Q)};
  };
  std::ostringstream name;
  name << "horosphere z=" << level << " in H^3";
  return spherical_patch(name.str(), ModelManifold(3, WarpingProfile::hyperbolic(1.0), 200.0, true), vec2(0.0, 0.2),
                         vec2(1.0, 0.8), rho, beta);
}

ImmersedPatch graph_surface_patch() {
  ImmersedPatch p{"graph z = 1 + x^2 + y^2 in R^3", ModelManifold(3, WarpingProfile::euclidean(), 1e6, true),
                  vec2(-1.0, -1.0), vec2(1.0, 1.0), {}, {}, {}};
  p.phi = [](const Vec& u) {
    Vec y(3);
    y << u[0], u[1], 1.0 + u[0] * u[0] + u[1] * u[1];
    return y;
  };
  p.jacobian = [](const Vec& u) {
    Mat J(3, 2);
    J << 1.0, 0.0, 0.0, 1.0, 2.0 * u[0], 2.0 * u[1];
    return J;
  };
  p.hessian = [](const Vec&) {
    Vec xx(3), xy = Vec::Zero(3);
    xx << 0.0, 0.0, 2.0;
    return std::vector<Vec>{xx, xy, xy, xx};
  };
  return p;
}

std::vector<ImmersedPatch> golden_patches() {
  return {geodesic_slice_patch(), sphere_patch(2.0), horosphere_patch(2.0), graph_surface_patch()};
}

}  // namespace stochlab
