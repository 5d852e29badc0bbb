#include "stochlab/montecarlo.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "stochlab/errors.hpp"

namespace stochlab {

std::string to_string(Scheme s) {
  return s == Scheme::EulerMaruyama ? "EulerMaruyama" : "MilsteinDriftCorrected";
}

std::string to_string(Terminal t) {
  switch (t) {
    case Terminal::HitInner: return "HitInner";
    case Terminal::Exploded: return "Exploded";
    case Terminal::Censored: return "Censored";
  }
  return "?";
}

RadialSDEConfig::RadialSDEConfig(ModelManifold model_, Scheme scheme_, DtPolicy dt_, std::uint64_t seed_,
                                 double r_explode_, double T_)
    : model(std::move(model_)), scheme(scheme_), dt(dt_), seed(seed_), r_explode(r_explode_), T(T_) {
  if (!(dt.dt > 0.0) || !(dt.dt_min > 0.0) || !(dt.kappa > 0.0)) throw PreconditionError("dt policy must be positive");
  if (r_explode < 0.0) r_explode = 0.45 * model.r_max();
  if (!std::isfinite(r_explode)) throw PreconditionError("r_explode must be finite; set r_max or r_explode");
  if (!(r_explode > 0.0) || r_explode > model.r_max()) throw PreconditionError("r_explode must lie in (0, r_max]");
  if (!(T >= 0.0)) throw PreconditionError("time horizon must be non-negative");
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

double step_size(const RadialSDEConfig& c, double r, double K, double drift) {
  if (!c.dt.adaptive) return c.dt.dt;
  double dt = std::min(c.dt.dt, c.dt.kappa * r * (K > 0.0 ? r - K : r));
  if (drift != 0.0) dt = std::min(dt, 0.1 * r / std::abs(drift));
  return std::max(dt, c.dt.dt_min);
}

}  // namespace

PathOutcome simulate_radial_path(const RadialSDEConfig& config, double r0, double K, std::uint64_t index) {
  if (!(K >= 0.0) || !(r0 >= K) || !(r0 > 0.0)) throw PreconditionError("need 0 <= K_radius <= r0");
  if (!(r0 < config.r_explode)) throw PreconditionError("r0 must lie below r_explode");
  PathOutcome out;
  if (K > 0.0 && r0 == K) {
    out.terminal = Terminal::HitInner;
    out.final_r = r0;
    return out;
  }

  std::mt19937_64 rng(path_seed(config.seed, index));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  const ModelManifold& model = config.model;
  const double T = config.T;
  const double sqrt2 = std::sqrt(2.0);

  double r = r0;
  double t = 0.0;
  while (true) {
    if (t >= T) {
      out.terminal = Terminal::Censored;
      out.time = T;
      break;
    }
    const double drift = model.radial_drift(r);
    double dt = std::min(step_size(config, r, K, drift), T - t);
    const double dW = std::sqrt(dt) * normal(rng);

    double next = r + drift * dt + sqrt2 * dW;
    if (config.scheme == Scheme::MilsteinDriftCorrected && next > 0.0 && next < config.r_explode)
      next = r + 0.5 * (drift + model.radial_drift(next)) * dt + sqrt2 * dW;
    if (next <= 0.0) next = std::max(-next, 1e-12 * r);
    ++out.steps;

    if (K > 0.0) {
      const double a = r - K;
      const double b = next - K;
      bool hit = b <= 0.0;
      double frac = hit ? a / (a - b) : 0.0;
      if (!hit && uniform(rng) < std::exp(-a * b / dt)) {
        hit = true;
        frac = a / (a + b);
      }
      if (hit) {
        out.terminal = Terminal::HitInner;
        out.time = t + frac * dt;
        out.final_r = K;
        return out;
      }
    }
    t += dt;
    r = next;
    if (r >= config.r_explode) {
      out.terminal = Terminal::Exploded;
      out.time = t;
      break;
    }
  }
  out.final_r = r;
  return out;
}

Estimate Estimate::from_samples(const std::vector<double>& x, std::uint64_t seed_begin) {
  Estimate e;
  e.n = static_cast<long>(x.size());
  e.seed_begin = seed_begin;
  e.seed_end = seed_begin + x.size();
  if (x.empty()) return e;
  // Welford.
  double mean = 0.0, m2 = 0.0;
  long k = 0;
  for (double v : x) {
    ++k;
    const double d = v - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (v - mean);
  }
  e.mean = mean;
  e.m2 = m2;
  e.std_error = e.n > 1 ? std::sqrt(m2 / static_cast<double>(e.n - 1) / static_cast<double>(e.n)) : 0.0;
  return e;
}

Estimate merge(const Estimate& a, const Estimate& b) {
  if (a.n == 0) return b;
  if (b.n == 0) return a;
  if (a.seed_begin < b.seed_end && b.seed_begin < a.seed_end) throw PreconditionError("seed ranges overlap");
  Estimate e;
  e.n = a.n + b.n;
  const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n), n = static_cast<double>(e.n);
  const double delta = b.mean - a.mean;
  e.mean = (na * a.mean + nb * b.mean) / n;
  e.m2 = a.m2 + b.m2 + delta * delta * na * nb / n;
  e.std_error = e.n > 1 ? std::sqrt(e.m2 / (n - 1.0) / n) : 0.0;
  e.seed_begin = std::min(a.seed_begin, b.seed_begin);
  e.seed_end = std::max(a.seed_end, b.seed_end);
  return e;
}

Estimate hitting_probability(const RadialSDEConfig& config, double r0, double K, double t0, long n) {
  if (n < 1000) throw PreconditionError("hitting_probability needs n >= 1000");
  if (!(K > 0.0)) throw PreconditionError("K_radius must be positive");
  RadialSDEConfig c = config;
  c.T = std::min(config.T, t0);
  return run_paths<1>(c, r0, K, n, [t0](const PathOutcome& o) {
    return std::array<double, 1>{o.terminal == Terminal::HitInner && o.time < t0 ? 1.0 : 0.0};
  })[0];
}

FeynmanKacReport feynman_kac_crosscheck(const RadialSDEConfig& config, const ExteriorProblem& problem, double r0,
                                        long n) {
  if (n < 10000) throw PreconditionError("feynman_kac_crosscheck needs n >= 10^4");
  if (!(r0 >= problem.R)) throw PreconditionError("r0 must not lie inside the ball of radius R");
  const double lambda = problem.lambda;
  RadialSDEConfig c = config;
  if (!std::isfinite(c.T)) c.T = 40.0 / lambda;

  FeynmanKacReport rep;
  const auto est = run_paths<2>(c, r0, problem.R, n, [lambda](const PathOutcome& o) {
    if (o.terminal == Terminal::HitInner) {
      const double v = std::exp(-lambda * o.time);
      return std::array<double, 2>{v, v};
    }
    // Unfinished paths can still hit later, but not before time o.time.
    return std::array<double, 2>{0.0, std::exp(-lambda * o.time)};
  });
  rep.mc = est[0];
  rep.lower = est[0].mean;
  rep.upper = est[1].mean;

  if (r0 == problem.R) {
    rep.bvp = 1.0;
  } else {
    const MinimalSolution h = minimal_solution(problem);
    rep.bvp = h.value_at(r0);
  }
  const double se = rep.mc.std_error;
  const double diff = rep.mc.mean - rep.bvp;
  rep.z_score = se > 0.0 ? diff / se : (std::abs(diff) < 1e-12 ? 0.0 : std::copysign(INFINITY, diff));
  rep.inconclusive = rep.upper - rep.lower > 6.0 * se && rep.upper - rep.lower > 1e-12;
  return rep;
}

ExplosionReport explosion_probability(const RadialSDEConfig& config, double r0, double T, long n) {
  if (n < 1000) throw PreconditionError("explosion_probability needs n >= 1000");
  if (!(T >= 0.0)) throw PreconditionError("T must be non-negative");
  if (2.0 * config.r_explode > config.model.r_max())
    throw PreconditionError("doubled r_explode exceeds r_max; the sensitivity check cannot run");
  auto exploded = [](const PathOutcome& o) {
    return std::array<double, 1>{o.terminal == Terminal::Exploded ? 1.0 : 0.0};
  };
  RadialSDEConfig c = config;
  c.T = T;
  ExplosionReport rep;
  rep.estimate = run_paths<1>(c, r0, 0.0, n, exploded)[0];
  c.r_explode = 2.0 * config.r_explode;
  rep.doubled = run_paths<1>(c, r0, 0.0, n, exploded)[0];
  const double diff = std::abs(rep.estimate.mean - rep.doubled.mean);
  rep.threshold_dependent = diff > 0.0 && diff >= rep.estimate.std_error;
  return rep;
}

std::string path_summary_csv(const RadialSDEConfig& config, double r0, double K, long n) {
  std::ostringstream os;
  os.precision(17);
  os << "seed,terminal,tau,final_r,steps\n";
  for (long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    const PathOutcome o = simulate_radial_path(config, r0, K, idx);
    os << path_seed(config.seed, idx) << ',' << to_string(o.terminal) << ',' << o.time << ',' << o.final_r << ','
       << o.steps << '\n';
  }
  return os.str();
}

}  // namespace stochlab
