#pragma once

// Radial diffusion generated by the Laplacian: dr = sqrt(2) dW + (m-1)(sigma'/sigma)(r) dt.

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "stochlab/profile.hpp"
#include "stochlab/radial_solver.hpp"

namespace stochlab {

enum class Scheme { EulerMaruyama, MilsteinDriftCorrected };

std::string to_string(Scheme s);

struct DtPolicy {
  bool adaptive = true;
  /// Fixed step, or the cap of the adaptive step.
  double dt = 1e6;
  /// Adaptive step is min(dt, kappa r (r - K), 0.1 r/|drift|), floored at dt_min,
  /// with K = 0 when there is no inner target.
  double kappa = 0.004;
  double dt_min = 1e-9;
};

struct RadialSDEConfig {
  RadialSDEConfig(ModelManifold model, Scheme scheme = Scheme::MilsteinDriftCorrected, DtPolicy dt = {},
                  std::uint64_t seed = 1, double r_explode = -1.0,
                  double T = std::numeric_limits<double>::infinity());

  ModelManifold model;
  Scheme scheme;
  DtPolicy dt;
  std::uint64_t seed;
  /// Defaults to 0.45 r_max so that the doubled threshold still fits.
  double r_explode;
  double T;
};

enum class Terminal { HitInner, Exploded, Censored };

std::string to_string(Terminal t);

struct PathOutcome {
  Terminal terminal = Terminal::Censored;
  /// Hitting time, explosion time or T.
  double time = 0.0;
  double final_r = 0.0;
  long steps = 0;
};

/// Seed of path `index` in the stream of `seed` (splitmix64 mixing).
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

/// Simulates path `index` of the config's stream until it hits K_radius, exceeds
/// r_explode or reaches T. Crossings of K between grid times are detected with the
/// Brownian-bridge probability exp(-(r_n - K)(r_{n+1} - K)/dt).
PathOutcome simulate_radial_path(const RadialSDEConfig& config, double r0, double K_radius,
                                 std::uint64_t index = 0);

/// Sample mean with stderr = sample standard deviation / sqrt(n) over the paths
/// [seed_begin, seed_end) of one stream.
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n = 0;
  std::uint64_t seed_begin = 0;
  std::uint64_t seed_end = 0;
  /// Sum of squared deviations from the mean.
  double m2 = 0.0;

  static Estimate from_samples(const std::vector<double>& x, std::uint64_t seed_begin);
};

/// Chan-Golub-LeVeque combination; PreconditionError if the seed ranges overlap.
Estimate merge(const Estimate& a, const Estimate& b);

/// Runs paths [first, first + n) in fixed chunks of 4096 on worker threads and
/// merges chunk estimates in chunk order. `f` maps an outcome to k sample values.
template <std::size_t k, class F>
std::array<Estimate, k> run_paths(const RadialSDEConfig& config, double r0, double K, long n, F&& f,
                                  std::uint64_t first = 0);

/// P[tau_K < t0].
Estimate hitting_probability(const RadialSDEConfig& config, double r0, double K_radius, double t0, long n);

struct FeynmanKacReport {
  /// E[exp(-lambda tau) 1{tau < T}], censored paths counted as 0.
  Estimate mc;
  /// Bracket [mc, mc + P(censored) exp(-lambda T)].
  double lower = 0.0;
  double upper = 0.0;
  double bvp = 0.0;
  double z_score = 0.0;
  /// Set when the bracket is wider than 6 standard errors.
  bool inconclusive = false;
};

FeynmanKacReport feynman_kac_crosscheck(const RadialSDEConfig& config, const ExteriorProblem& problem, double r0,
                                        long n);

struct ExplosionReport {
  Estimate estimate;
  /// Same paths with r_explode doubled.
  Estimate doubled;
  /// Set when the doubled threshold moves the estimate by at least one standard error.
  bool threshold_dependent = false;
};

ExplosionReport explosion_probability(const RadialSDEConfig& config, double r0, double T, long n);

/// Path summaries as CSV: seed,terminal,tau,final_r,steps.
std::string path_summary_csv(const RadialSDEConfig& config, double r0, double K_radius, long n);

}  // namespace stochlab

#include "stochlab/detail/run_paths.hpp"
