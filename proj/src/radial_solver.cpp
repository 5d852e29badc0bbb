#include "stochlab/radial_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "stochlab/errors.hpp"

namespace stochlab {

namespace odeint = boost::numeric::odeint;

ExteriorProblem::ExteriorProblem(ModelManifold model_, double R_, double lambda_)
    : model(std::move(model_)), R(R_), lambda(lambda_) {
  if (!(lambda > 0.0)) throw PreconditionError("exterior problem needs lambda > 0");
  if (!(R > 0.0) || !(R < model.r_max())) throw PreconditionError("exterior problem needs 0 < R < r_max");
}

double TruncatedSolution::value_at(double r) const {
  if (r < grid.front()) throw DomainError("radius inside the inner boundary");
  if (r >= grid.back()) return 0.0;
  const auto it = std::upper_bound(grid.begin(), grid.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  const double t = (r - grid[i]) / (grid[i + 1] - grid[i]);
  return (1.0 - t) * values[i] + t * values[i + 1];
}

namespace {

std::vector<double> build_grid(double R, double R_n, const GridSpec& spec) {
  if (spec.min_nodes < 64) throw PreconditionError("grid must have at least 64 nodes");
  if (!(spec.spacing > 0.0)) throw PreconditionError("grid spacing must be positive");
  const double span = R_n - R;
  const double d = std::min(spec.spacing, span / (spec.min_nodes - 1));
  const auto full = static_cast<std::size_t>(std::floor(span / d + 1e-9));
  const double rem = span - static_cast<double>(full) * d;
  std::size_t last_lattice = full;
  if (rem < 0.25 * d) last_lattice = full - 1;
  std::vector<double> grid;
  grid.reserve(last_lattice + 2);
  for (std::size_t i = 0; i <= last_lattice; ++i) grid.push_back(R + static_cast<double>(i) * d);
  grid.push_back(R_n);
  return grid;
}

TruncatedSolution solve_on_grid(const ExteriorProblem& p, std::vector<double> grid) {
  const std::size_t n = grid.size();
  const std::size_t k = n - 2;  // interior unknowns
  std::vector<double> lower(k), diag(k), upper(k), rhs(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t i = j + 1;
    const double dm = grid[i] - grid[i - 1];
    const double dp = grid[i + 1] - grid[i];
    const double dbar = 0.5 * (dm + dp);
    const double ls = p.model.log_sphere_area(grid[i]);
    const double wm = std::exp(p.model.log_sphere_area(0.5 * (grid[i] + grid[i - 1])) - ls) / (dm * dbar);
    const double wp = std::exp(p.model.log_sphere_area(0.5 * (grid[i] + grid[i + 1])) - ls) / (dp * dbar);
    lower[j] = -wm;
    upper[j] = -wp;
    diag[j] = wm + wp + p.lambda;
  }
  rhs[0] = -lower[0];  // h(R) = 1
  const std::vector<double> a = lower, b = diag, c = upper, d0 = rhs;

  // Thomas elimination; the matrix is a strictly diagonally dominant M-matrix.
  for (std::size_t j = 1; j < k; ++j) {
    if (!(diag[j - 1] > 0.0)) throw InternalError("singular tridiagonal system");
    const double m = lower[j] / diag[j - 1];
    diag[j] -= m * upper[j - 1];
    rhs[j] -= m * rhs[j - 1];
  }
  if (!(diag[k - 1] > 0.0)) throw InternalError("singular tridiagonal system");
  std::vector<double> h(k);
  h[k - 1] = rhs[k - 1] / diag[k - 1];
  for (std::size_t j = k - 1; j-- > 0;) h[j] = (rhs[j] - upper[j] * h[j + 1]) / diag[j];

  double residual = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double row = b[j] * h[j] - d0[j];
    if (j > 0) row += a[j] * h[j - 1];
    if (j + 1 < k) row += c[j] * h[j + 1];
    residual = std::max(residual, std::abs(row) / b[j]);
  }

  TruncatedSolution sol;
  sol.R_n = grid.back();
  sol.values.reserve(n);
  sol.values.push_back(1.0);
  sol.values.insert(sol.values.end(), h.begin(), h.end());
  sol.values.push_back(0.0);
  sol.grid = std::move(grid);
  sol.residual_norm = residual;
  return sol;
}

}  // namespace

TruncatedSolution solve_truncated(const ExteriorProblem& problem, double R_n, const GridSpec& spec) {
  if (!(R_n > problem.R)) throw PreconditionError("outer radius must exceed R");
  problem.model.check_radius(R_n);
  constexpr double tol = 1e-10;
  GridSpec s = spec;
  for (int attempt = 0; attempt < 4; ++attempt) {
    TruncatedSolution sol = solve_on_grid(problem, build_grid(problem.R, R_n, s));
    if (sol.residual_norm < tol) return sol;
    s.spacing *= 0.5;
  }
  throw NumericError("exterior solve residual above tolerance after refinement");
}

std::vector<double> default_schedule(const ExteriorProblem& problem, double max_outer) {
  const double cap = std::min(problem.model.r_max(), max_outer);
  std::vector<double> s;
  for (double r = 2.0 * problem.R; r <= cap * (1.0 + 1e-12); r *= 2.0) s.push_back(std::min(r, cap));
  if (s.size() < 3) throw PreconditionError("exhaustion schedule needs at least three radii below r_max");
  return s;
}

MinimalSolution minimal_solution(const ExteriorProblem& problem, const std::vector<double>& schedule,
                                 double tolerance, const GridSpec& spec) {
  if (schedule.size() < 2) throw PreconditionError("schedule needs at least two radii");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > (i == 0 ? problem.R : schedule[i - 1])))
      throw PreconditionError("schedule must be strictly increasing and exceed R");
  }
  if (schedule.back() > problem.model.r_max()) throw PreconditionError("schedule exceeds r_max");

  GridSpec common = spec;
  common.spacing = std::min(spec.spacing, (schedule.front() - problem.R) / (spec.min_nodes - 1));

  MinimalSolution out{problem, {}, {}, {}, 0.0, {}, {}, false};
  for (double R_n : schedule) {
    out.iterates.push_back(solve_truncated(problem, R_n, common));
    if (out.iterates.size() < 2) continue;
    const TruncatedSolution& prev = out.iterates[out.iterates.size() - 2];
    const TruncatedSolution& cur = out.iterates.back();
    const double window = 0.5 * (problem.R + prev.R_n);
    double inc = 0.0;
    std::size_t last_in_window = 0;
    for (std::size_t i = 0; i + 1 < prev.grid.size() && i < cur.grid.size(); ++i) {
      if (std::abs(prev.grid[i] - cur.grid[i]) > 1e-12 * cur.grid[i]) break;
      const double diff = cur.values[i] - prev.values[i];
      if (diff < -1e-10) throw InternalError("exhaustion iterates are not monotone");
      if (prev.grid[i] <= window) {
        inc = std::max(inc, std::abs(diff));
        last_in_window = i;
      }
    }
    out.increments.push_back(inc);
    out.tail_history.push_back(cur.values[last_in_window]);
  }
  const TruncatedSolution& last = out.iterates.back();
  const double window = 0.5 * (problem.R + out.iterates[out.iterates.size() - 2].R_n);
  for (std::size_t i = 0; i < last.grid.size() && last.grid[i] <= window; ++i) {
    out.grid.push_back(last.grid[i]);
    out.limit_values.push_back(last.values[i]);
  }
  out.tail_value = out.tail_history.back();
  out.converged = out.increments.back() < tolerance;
  return out;
}

MinimalSolution minimal_solution(const ExteriorProblem& problem, double tolerance) {
  return minimal_solution(problem, default_schedule(problem), tolerance);
}

std::string to_string(Boundedness b) {
  switch (b) {
    case Boundedness::Bounded: return "Bounded";
    case Boundedness::Unbounded: return "Unbounded";
    case Boundedness::Inconclusive: return "Inconclusive";
  }
  return "?";
}

double window_slope(const std::vector<double>& x, const std::vector<double>& y, double x_from) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < x_from) continue;
    sx += x[i];
    sy += y[i];
    ++n;
  }
  if (n < 2) throw NumericError("too few samples in the fit window");
  const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < x_from) continue;
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

namespace {

using State = std::array<double, 2>;

constexpr double kPoleStart = 1e-4;
constexpr double kOdeTol = 1e-12;

struct Riccati {
  const ModelManifold* model;
  double lambda;
  void operator()(const State& s, State& ds, double r) const {
    ds[0] = s[1];
    ds[1] = lambda - s[1] * s[1] - model->radial_drift(r) * s[1];
  }
};

auto make_stepper() {
  return odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(kOdeTol, kOdeTol);
}

}  // namespace

double RadialFunctionEstimate::value(std::size_t i) const { return std::exp(log_values[i]); }

double RadialFunctionEstimate::derivative(std::size_t i) const {
  return log_derivatives[i] * std::exp(log_values[i]);
}

Jet RadialFunctionEstimate::jet(double r) const {
  if (r < grid.front()) {
    const double m = model->dim();
    return {1.0 + lambda * r * r / (2 * m), lambda * r / m, lambda / m};
  }
  auto it = std::upper_bound(grid.begin(), grid.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
  State s{log_values[i], log_derivatives[i]};
  if (r > grid[i]) {
    const double span = r - grid[i];
    odeint::integrate_adaptive(make_stepper(), Riccati{model.get(), lambda}, s, grid[i], r, span);
  }
  const double g = std::exp(s[0]);
  const double dg = s[1] * g;
  return {g, dg, lambda * g - model->radial_drift(r) * dg};
}

RadialFunctionEstimate khasminskii_solution(const ModelManifold& model, double lambda) {
  if (!(lambda > 0.0)) throw PreconditionError("Khasminskii function needs lambda > 0");
  RadialFunctionEstimate est;
  est.model = std::make_shared<const ModelManifold>(model);
  est.lambda = lambda;
  const double m = model.dim();
  const double r_max = model.r_max();

  State s{std::log1p(lambda * kPoleStart * kPoleStart / (2 * m)),
          (lambda * kPoleStart / m) / (1.0 + lambda * kPoleStart * kPoleStart / (2 * m))};
  double r = kPoleStart;
  double dt = 1e-6;
  const double log_max = std::log(std::numeric_limits<double>::max());
  auto stepper = make_stepper();
  const Riccati rhs{est.model.get(), lambda};

  est.grid.push_back(r);
  est.log_values.push_back(s[0]);
  est.log_derivatives.push_back(s[1]);
  int failures = 0;
  while (r < r_max) {
    dt = std::min({dt, r_max / 2000.0, 2e-3 * r + 1e-3, r_max - r});
    if (stepper.try_step(rhs, s, r, dt) == odeint::fail) {
      if (++failures > 10000) throw NumericError("Khasminskii integration stalled");
      continue;
    }
    failures = 0;
    if (r_max - r < 1e-12 * r_max) r = r_max;
    if (!std::isfinite(s[0]) || !std::isfinite(s[1]) || s[0] > log_max) {
      est.overflow_radius = r;
      break;
    }
    est.grid.push_back(r);
    est.log_values.push_back(s[0]);
    est.log_derivatives.push_back(s[1]);
  }
  est.r_end = est.grid.back();

  if (est.overflow_radius) {
    est.classification = Boundedness::Unbounded;
    est.growth_slope = window_slope(est.grid, est.log_values, 0.9 * est.r_end);
    return est;
  }
  est.growth_slope = window_slope(est.grid, est.log_values, 0.9 * est.r_end);
  if (est.growth_slope < 1e-3) {
    est.classification = Boundedness::Bounded;
    est.limit = est.value(est.grid.size() - 1);
  } else if (est.growth_slope > 0.1) {
    est.classification = Boundedness::Unbounded;
  } else {
    est.classification = Boundedness::Inconclusive;
  }
  return est;
}

OYCertificate oy_certificate(const ModelManifold& model, double lambda, double eta) {
  if (!(eta > 0.0)) throw PreconditionError("eta must be positive");
  RadialFunctionEstimate est = khasminskii_solution(model, lambda);
  if (est.classification != Boundedness::Bounded)
    throw PreconditionError("Omori-Yau certificate needs a bounded Khasminskii function, got " +
                            to_string(est.classification));
  OYCertificate cert;
  cert.sup_u = est.limit;
  cert.eta = eta;
  cert.predicted_inf = lambda * (cert.sup_u - eta);
  const double level = cert.sup_u - eta;
  if (!(level > 1.0)) throw PreconditionError("eta must be below sup u - 1 so that Omega_eta is proper");

  std::size_t hi = 0;
  while (est.value(hi) <= level) ++hi;
  double a = est.grid[hi - 1], b = est.grid[hi];
  for (int it = 0; it < 200 && b - a > 1e-14 * b; ++it) {
    const double mid = 0.5 * (a + b);
    (est.jet(mid).value <= level ? a : b) = mid;
  }
  cert.r_eta = b;

  const RadialFunctionEstimate& u = est;
  const RadialFunction fd_jet = [&u](double r) {
    const double h = 1e-4 * std::max(1.0, r);
    const Jet c = u.jet(r);
    const double d2 = (u.jet(r + h).d1 - u.jet(r - h).d1) / (2 * h);
    return Jet{c.value, c.d1, d2};
  };
  const double h_edge = 1e-4 * std::max(1.0, est.r_end);
  const double r_hi = est.r_end - h_edge;
  double inf = std::numeric_limits<double>::infinity();
  constexpr int samples = 400;
  for (int k = 0; k <= samples; ++k) {
    const double r = cert.r_eta + (r_hi - cert.r_eta) * k / samples;
    inf = std::min(inf, radial_laplacian_apply(model, fd_jet, r));
  }
  cert.inf_laplacian = inf;
  cert.u = std::move(est);
  return cert;
}

}  // namespace stochlab
