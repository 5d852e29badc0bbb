#pragma once

// Suite orchestration behind the command line tool.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stochlab/config.hpp"
#include "stochlab/graph.hpp"
#include "stochlab/immersion.hpp"
#include "stochlab/montecarlo.hpp"
#include "stochlab/profile.hpp"

namespace stochlab {

inline constexpr const char* kVersion = "stochlab 0.1.0";
/// Environment variable holding the default output directory.
inline constexpr const char* kOutputEnv = "STOCHLAB_OUT";

enum class Suite { Verdicts, Feller, MonteCarlo, Submersion, Immersion };

std::string to_string(Suite s);
/// verdicts, feller, mc, submersion, immersion.
std::optional<Suite> parse_suite(const std::string& s);
std::vector<Suite> all_suites();

struct Tolerances {
  double feller_tail = 1e-4;
  double feller_stability = 0.1;
  double convergence = 1e-6;
  double feller_max_outer = 128.0;
  double mass = 1e-6;
  double heat_time = 1.0;
  double z_max = 3.0;
};

struct ManifoldSpec {
  std::string name;
  ModelManifold model;
  /// Radius of the compact ball for Feller and Monte Carlo.
  double R = 1.0;
};

struct GraphSpec {
  std::string name;
  std::string kind;
  /// Set for layered (infinite) families.
  FamilyPtr family;
  /// Set for finite graphs, usable as fibers.
  std::optional<WeightedGraph> finite;
};

struct SubmersionSpec {
  std::string name;
  /// product, golden or counterexamples.
  std::string kind;
  std::string base;
  std::string fiber;
};

struct PatchSpec {
  std::string name;
  ImmersedPatch patch;
  double R = 1.0;
  /// rho or rho_sq, the radial test function of the composition check.
  std::string g = "rho_sq";
  bool chain = true;
};

struct McSpec {
  long n = 10000;
  std::vector<double> r0 = {2.0};
  /// Censoring time of the hitting sweep.
  double T = 10.0;
  double explosion_T = 1.0;
  Scheme scheme = Scheme::MilsteinDriftCorrected;
  DtPolicy dt;
};

struct RunConfig {
  std::string source;
  std::vector<Suite> suites;
  std::vector<double> lambdas = {1.0};
  std::uint64_t seed = 1;
  std::string out_dir;
  double profile_step = 0.1;
  Tolerances tol;
  McSpec mc;
  std::vector<ManifoldSpec> manifolds;
  std::vector<GraphSpec> graphs;
  std::vector<SubmersionSpec> submersions;
  std::vector<PatchSpec> patches;
  /// Every effective setting, defaults included, as key/value pairs.
  std::vector<std::pair<std::string, std::string>> echo;

  const GraphSpec* graph(const std::string& name) const;
};

struct Overrides {
  std::optional<std::vector<Suite>> suites;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> lambdas;
  std::optional<std::string> out_dir;
};

/// Validates the file and resolves references. ConfigError carries source:line.
RunConfig build_run_config(const ConfigFile& file, const Overrides& overrides = {});

struct SuiteResult {
  Suite suite;
  std::vector<std::pair<std::string, std::string>> entries;
  int inconclusive = 0;
  std::vector<std::string> failures;
  double wall_seconds = 0.0;
};

struct CrossCheck {
  std::string subject;
  std::string check;
  std::string left;
  std::string right;
  bool agrees = true;
};

struct CsvFile {
  Suite suite;
  std::string name;
  std::string content;
};

struct RunReport {
  std::string version = kVersion;
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::vector<SuiteResult> suites;
  std::vector<CrossCheck> cross_checks;
  std::vector<std::string> contradictions;
  std::vector<CsvFile> csv;
  std::vector<std::string> errors;

  int inconclusive() const;
  bool has_suite(Suite s) const;
};

/// PreconditionError when no suites are requested. Numerical failures inside a suite
/// are recorded in `errors` and the remaining suites still run.
RunReport run(const RunConfig& config);

/// 1 on errors, failures or contradictions; 2 on Inconclusive verdicts under strict; else 0.
int exit_code(const RunReport& report, bool strict);

std::string render_report(const RunReport& report, int code);

/// Writes every CSV of the report into `dir` in a fixed order and returns notices for
/// plot data whose suite did not run.
std::vector<std::string> emit_plotdata(const RunReport& report, const std::string& dir);

/// Runs the command line tool; `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stochlab
