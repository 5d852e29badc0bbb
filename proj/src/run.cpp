#include "stochlab/run.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "stochlab/errors.hpp"
#include "stochlab/radial_solver.hpp"
#include "stochlab/submersion.hpp"
#include "stochlab/verdicts.hpp"

namespace stochlab {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(15) << x;
  return os.str();
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + num(xs[i]);
  return out;
}

std::string join(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + std::to_string(xs[i]);
  return out;
}

std::string describe(const Verdict& v) {
  std::string s = to_string(v.outcome) + " (" + v.evidence.method + " " + num(v.evidence.value) + ")";
  if (!v.evidence.diagnostic.empty()) s += " " + v.evidence.diagnostic;
  return s;
}

// Linear interpolation on an increasing grid, clamped at the ends.
double interpolate(const std::vector<double>& x, const std::vector<double>& y, double t) {
  if (t <= x.front()) return y.front();
  if (t >= x.back()) return y.back();
  const auto it = std::upper_bound(x.begin(), x.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double w = (t - x[i - 1]) / (x[i] - x[i - 1]);
  return (1.0 - w) * y[i - 1] + w * y[i];
}

}  // namespace

std::string to_string(Suite s) {
  switch (s) {
    case Suite::Verdicts: return "verdicts";
    case Suite::Feller: return "feller";
    case Suite::MonteCarlo: return "mc";
    case Suite::Submersion: return "submersion";
    case Suite::Immersion: return "immersion";
  }
  return "?";
}

std::optional<Suite> parse_suite(const std::string& s) {
  for (Suite x : all_suites())
    if (to_string(x) == s) return x;
  return std::nullopt;
}

std::vector<Suite> all_suites() {
  return {Suite::Verdicts, Suite::Feller, Suite::MonteCarlo, Suite::Submersion, Suite::Immersion};
}

const GraphSpec* RunConfig::graph(const std::string& name) const {
  for (const GraphSpec& g : graphs)
    if (g.name == name) return &g;
  return nullptr;
}

int RunReport::inconclusive() const {
  int n = 0;
  for (const SuiteResult& s : suites) n += s.inconclusive;
  return n;
}

bool RunReport::has_suite(Suite s) const {
  return std::any_of(suites.begin(), suites.end(), [s](const SuiteResult& r) { return r.suite == s; });
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

TabulatedSamples read_table(const ConfigBlock& b, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) b.fail("table", "cannot open table " + path.string());
  TabulatedSamples t;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#' || std::isalpha(static_cast<unsigned char>(text.front()))) continue;
    const auto items = split_list(text);
    if (items.size() != 4) b.fail("table", path.string() + ":" + std::to_string(row) + ": expected r,sigma,dsigma,d2sigma");
    std::array<double, 4> v{};
    for (std::size_t i = 0; i < 4; ++i) {
      try {
        std::size_t used = 0;
        v[i] = std::stod(items[i], &used);
        if (used != items[i].size()) throw std::invalid_argument(items[i]);
      } catch (const std::exception&) {
        b.fail("table", path.string() + ":" + std::to_string(row) + ": not a number: " + items[i]);
      }
    }
    t.r.push_back(v[0]);
    t.sigma.push_back(v[1]);
    t.dsigma.push_back(v[2]);
    t.d2sigma.push_back(v[3]);
  }
  return t;
}

using Echo = std::vector<std::pair<std::string, std::string>>;

ManifoldSpec build_manifold(const ConfigBlock& b, const std::filesystem::path& dir, Echo& echo) {
  b.check_keys({"kind", "dim", "params", "r_max", "cartan_hadamard", "R", "table", "consistency_tol"});
  const std::string p = "manifold." + b.name() + ".";
  const std::string kind = b.require_string("kind");
  const long dim = b.get_long("dim", 2);
  if (dim < 1) b.fail("dim", "dim must be at least 1");
  const std::vector<double> params = b.get_doubles("params", {});
  auto param = [&](std::size_t i, double fallback) { return i < params.size() ? params[i] : fallback; };
  auto max_params = [&](std::size_t n) {
    if (params.size() > n) b.fail("params", kind + " takes at most " + std::to_string(n) + " parameters");
  };

  std::optional<WarpingProfile> profile;
  std::vector<double> used;
  try {
    if (kind == "euclidean") {
      max_params(0);
      profile = WarpingProfile::euclidean();
    } else if (kind == "hyperbolic") {
      max_params(1);
      used = {param(0, 1.0)};
      profile = WarpingProfile::hyperbolic(used[0]);
    } else if (kind == "polyexp" || kind == "cusp") {
      max_params(3);
      used = {param(0, 1.0), param(1, 3.0), param(2, 1.0)};
      profile = kind == "polyexp" ? WarpingProfile::poly_exp(used[0], used[1], used[2])
                                  : WarpingProfile::cusp(used[0], used[1], used[2]);
    } else if (kind == "tabulated") {
      const std::filesystem::path table = dir / b.require_string("table");
      profile = WarpingProfile::tabulated(read_table(b, table), b.get_double("consistency_tol", 1e-4));
      echo.emplace_back(p + "table", table.string());
      echo.emplace_back(p + "consistency_tol", num(b.get_double("consistency_tol", 1e-4)));
    } else {
      b.fail("kind", "unknown manifold kind '" + kind + "' (euclidean, hyperbolic, polyexp, cusp, tabulated)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    b.fail(b.has("params") ? "params" : "kind", std::string("invalid profile: ") + e.what());
  }

  const double fallback_rmax =
      kind == "tabulated" ? profile->domain_end() : default_horizon(profile->kind());
  const double r_max = b.get_double("r_max", fallback_rmax);
  const double R = b.get_double("R", 1.0);
  if (!(R > 0.0)) b.fail("R", "R must be positive");
  if (!(r_max >= 8.0 * R)) b.fail("r_max", "r_max must be at least 8 R to fit three exhaustion radii");
  const bool ch = b.get_bool("cartan_hadamard", false);
  std::optional<ModelManifold> model;
  try {
    model.emplace(static_cast<int>(dim), *profile, r_max, ch);
  } catch (const std::exception& e) {
    b.fail(b.has("cartan_hadamard") ? "cartan_hadamard" : "kind", std::string("invalid model: ") + e.what());
  }
  echo.emplace_back(p + "kind", kind);
  echo.emplace_back(p + "dim", std::to_string(dim));
  echo.emplace_back(p + "params", join(used));
  echo.emplace_back(p + "r_max", num(r_max));
  echo.emplace_back(p + "cartan_hadamard", ch ? "true" : "false");
  echo.emplace_back(p + "R", num(R));
  return {b.name(), *model, R};
}

GraphSpec build_graph(const ConfigBlock& b, const RunConfig& cfg, Echo& echo) {
  b.check_keys({"kind", "dim", "n", "manifold", "spacing", "R", "truncations", "base", "fiber", "a", "b"});
  const std::string p = "graph." + b.name() + ".";
  const std::string kind = b.require_string("kind");
  GraphSpec g{b.name(), kind, nullptr, std::nullopt};
  echo.emplace_back(p + "kind", kind);

  auto finite_size = [&]() {
    const long n = b.get_long("n", 3);
    if (n < 1 || n > 100000) b.fail("n", "n must be in [1, 100000]");
    echo.emplace_back(p + "n", std::to_string(n));
    return static_cast<int>(n);
  };
  auto family_ref = [&](const std::string& key) -> FamilyPtr {
    const std::string name = b.require_string(key);
    const GraphSpec* ref = cfg.graph(name);
    if (!ref) b.fail(key, "unknown graph '" + name + "' (graphs must be defined before use)");
    if (!ref->family) b.fail(key, "graph '" + name + "' is finite, a layered family is required");
    echo.emplace_back(p + key, name);
    return ref->family;
  };
  auto truncations = [&](const std::vector<int>& fallback) {
    std::vector<int> out;
    for (long t : b.get_longs("truncations", {})) {
      if (t < 1) b.fail("truncations", "truncations must be positive");
      out.push_back(static_cast<int>(t));
    }
    if (out.empty()) out = fallback;
    if (!out.empty() && (out.size() != 3 || !std::is_sorted(out.begin(), out.end()) ||
                         std::adjacent_find(out.begin(), out.end()) != out.end()))
      b.fail("truncations", "exactly three increasing truncations are required");
    return out;
  };

  try {
    if (kind == "lattice") {
      const long d = b.get_long("dim", 2);
      if (d < 1 || d > 4) b.fail("dim", "lattice dim must be in [1, 4]");
      g.family = std::make_shared<LatticeFamily>(static_cast<int>(d));
      echo.emplace_back(p + "dim", std::to_string(d));
    } else if (kind == "chain") {
      g.family = std::make_shared<RadialChainFamily>();
    } else if (kind == "discrete") {
      const std::string mname = b.require_string("manifold");
      const auto it = std::find_if(cfg.manifolds.begin(), cfg.manifolds.end(),
                                   [&](const ManifoldSpec& m) { return m.name == mname; });
      if (it == cfg.manifolds.end()) b.fail("manifold", "unknown manifold '" + mname + "'");
      const double h = b.get_double("spacing", 0.2);
      if (!(h > 0.0)) b.fail("spacing", "spacing must be positive");
      const double R = b.get_double("R", it->R);
      const std::vector<int> tr = truncations({});
      g.family = std::make_shared<DiscreteModelFamily>(it->model, h, R, tr);
      echo.emplace_back(p + "manifold", mname);
      echo.emplace_back(p + "spacing", num(h));
      echo.emplace_back(p + "R", num(R));
    } else if (kind == "cycle") {
      g.finite = cycle_graph(finite_size());
    } else if (kind == "path") {
      g.finite = path_graph(finite_size());
    } else if (kind == "complete") {
      g.finite = complete_graph(finite_size());
    } else if (kind == "product") {
      const FamilyPtr base = family_ref("base");
      const std::string fname = b.require_string("fiber");
      const GraphSpec* fiber = cfg.graph(fname);
      if (!fiber || !fiber->finite) b.fail("fiber", "fiber '" + fname + "' must be a finite graph defined earlier");
      g.family = std::make_shared<ProductFamily>(base, *fiber->finite);
      echo.emplace_back(p + "fiber", fname);
    } else if (kind == "pair") {
      const FamilyPtr a = family_ref("a");
      const FamilyPtr c = family_ref("b");
      if (!b.has("truncations")) b.fail("truncations", "pair products need explicit truncations");
      g.family = std::make_shared<PairProductFamily>(a, c, truncations({}));
    } else {
      b.fail("kind", "unknown graph kind '" + kind + "' (lattice, chain, discrete, cycle, path, complete, product, pair)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    b.fail("kind", std::string("invalid graph: ") + e.what());
  }
  if (g.family) echo.emplace_back(p + "truncations", join(g.family->truncations()));
  return g;
}

SubmersionSpec build_submersion(const ConfigBlock& b, const RunConfig& cfg, Echo& echo) {
  b.check_keys({"kind", "base", "fiber"});
  const std::string p = "submersion." + b.name() + ".";
  SubmersionSpec s{b.name(), b.get_string("kind", "product"), {}, {}};
  echo.emplace_back(p + "kind", s.kind);
  if (s.kind == "product") {
    s.base = b.require_string("base");
    s.fiber = b.require_string("fiber");
    const GraphSpec* base = cfg.graph(s.base);
    const GraphSpec* fiber = cfg.graph(s.fiber);
    if (!base) b.fail("base", "unknown graph '" + s.base + "'");
    if (!base->family) b.fail("base", "base '" + s.base + "' must be a layered family");
    if (!fiber) b.fail("fiber", "unknown graph '" + s.fiber + "'");
    if (!fiber->finite) b.fail("fiber", "fiber '" + s.fiber + "' must be finite");
    echo.emplace_back(p + "base", s.base);
    echo.emplace_back(p + "fiber", s.fiber);
  } else if (s.kind != "golden" && s.kind != "counterexamples") {
    b.fail("kind", "unknown submersion kind '" + s.kind + "' (product, golden, counterexamples)");
  } else if (b.has("base") || b.has("fiber")) {
    b.fail(b.has("base") ? "base" : "fiber", "builtin submersion suites take no base or fiber");
  }
  return s;
}

PatchSpec build_patch(const ConfigBlock& b, Echo& echo) {
  b.check_keys({"kind", "radius", "level", "samples", "stencil", "R", "g", "chain"});
  const std::string p = "patch." + b.name() + ".";
  const std::string kind = b.require_string("kind");
  std::optional<ImmersedPatch> patch;
  if (kind == "geodesic_slice") {
    patch = geodesic_slice_patch();
  } else if (kind == "sphere") {
    const double r = b.get_double("radius", 2.0);
    if (!(r > 0.0)) b.fail("radius", "radius must be positive");
    patch = sphere_patch(r);
    echo.emplace_back(p + "radius", num(r));
  } else if (kind == "horosphere") {
    const double level = b.get_double("level", 2.0);
    if (!(level > 0.0)) b.fail("level", "level must be positive");
    patch = horosphere_patch(level);
    echo.emplace_back(p + "level", num(level));
  } else if (kind == "graph_surface") {
    patch = graph_surface_patch();
  } else {
    b.fail("kind", "unknown patch kind '" + kind + "' (geodesic_slice, sphere, horosphere, graph_surface)");
  }
  const long samples = b.get_long("samples", patch->samples_per_axis);
  if (samples < 2 || samples > 200) b.fail("samples", "samples must be in [2, 200]");
  const double stencil = b.get_double("stencil", patch->stencil);
  if (!(stencil > 0.0 && stencil < 0.1)) b.fail("stencil", "stencil must be in (0, 0.1)");
  patch->samples_per_axis = static_cast<int>(samples);
  patch->stencil = stencil;
  PatchSpec s{b.name(), *patch, b.get_double("R", 1.0), b.get_string("g", "rho_sq"), b.get_bool("chain", true)};
  if (!(s.R > 0.0)) b.fail("R", "R must be positive");
  if (s.g != "rho" && s.g != "rho_sq") b.fail("g", "g must be rho or rho_sq");
  echo.emplace_back(p + "kind", kind);
  echo.emplace_back(p + "samples", std::to_string(samples));
  echo.emplace_back(p + "stencil", num(stencil));
  echo.emplace_back(p + "R", num(s.R));
  echo.emplace_back(p + "g", s.g);
  echo.emplace_back(p + "chain", s.chain ? "true" : "false");
  return s;
}

}  // namespace

RunConfig build_run_config(const ConfigFile& file, const Overrides& overrides) {
  RunConfig cfg;
  cfg.source = file.source;
  const std::filesystem::path dir = std::filesystem::path(file.source).parent_path();
  static const std::vector<std::string> known = {"run", "tolerances", "mc", "manifold", "graph", "submersion", "patch"};
  for (const ConfigBlock& b : file.blocks) {
    if (std::find(known.begin(), known.end(), b.type()) == known.end())
      b.fail("", "unknown section type '" + b.type() + "'");
    const bool named = b.type() == "manifold" || b.type() == "graph" || b.type() == "submersion" || b.type() == "patch";
    if (named && b.name().empty()) b.fail("", "section needs a name");
    if (!named && !b.name().empty()) b.fail("", "section takes no name");
  }
  const ConfigBlock empty_run(file.source, "run", "", 0);
  const ConfigBlock& run = file.find("run") ? *file.find("run") : empty_run;
  run.check_keys({"suites", "lambda", "seed", "out", "profile_step"});

  if (overrides.suites) {
    cfg.suites = *overrides.suites;
  } else {
    std::vector<std::string> names;
    for (Suite s : all_suites()) names.push_back(to_string(s));
    for (const std::string& name : run.get_strings("suites", names)) {
      const auto s = parse_suite(name);
      if (!s) run.fail("suites", "unknown suite '" + name + "' (verdicts, feller, mc, submersion, immersion)");
      if (std::find(cfg.suites.begin(), cfg.suites.end(), *s) == cfg.suites.end()) cfg.suites.push_back(*s);
    }
  }

  cfg.lambdas = overrides.lambdas ? *overrides.lambdas : run.get_doubles("lambda", {1.0});
  if (cfg.lambdas.empty()) run.fail("lambda", "lambda grid is empty");
  for (double l : cfg.lambdas)
    if (!(l > 0.0 && std::isfinite(l))) run.fail("lambda", "lambda values must be positive, got " + num(l));
  if (overrides.seed) {
    cfg.seed = *overrides.seed;
  } else {
    const long seed = run.get_long("seed", 1);
    if (seed < 0) run.fail("seed", "seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (overrides.out_dir) {
    cfg.out_dir = *overrides.out_dir;
  } else if (run.has("out")) {
    cfg.out_dir = run.get_string("out", "");
  } else if (const char* env = std::getenv(kOutputEnv); env && *env) {
    cfg.out_dir = env;
  } else {
    cfg.out_dir = "stochlab-out";
  }
  cfg.profile_step = run.get_double("profile_step", 0.1);
  if (!(cfg.profile_step > 0.0)) run.fail("profile_step", "profile_step must be positive");

  std::string suites;
  for (Suite s : cfg.suites) suites += (suites.empty() ? "" : ", ") + to_string(s);
  cfg.echo.emplace_back("run.suites", suites);
  cfg.echo.emplace_back("run.lambda", join(cfg.lambdas));
  cfg.echo.emplace_back("run.seed", std::to_string(cfg.seed));
  cfg.echo.emplace_back("run.out", cfg.out_dir);
  cfg.echo.emplace_back("run.profile_step", num(cfg.profile_step));

  const ConfigBlock empty_tol(file.source, "tolerances", "", 0);
  const ConfigBlock& tol = file.find("tolerances") ? *file.find("tolerances") : empty_tol;
  tol.check_keys({"feller_tail", "feller_stability", "convergence", "feller_max_outer", "mass", "heat_time", "z_max"});
  auto positive = [&](const std::string& key, double& slot) {
    slot = tol.get_double(key, slot);
    if (!(slot > 0.0 && std::isfinite(slot))) tol.fail(key, key + " must be positive");
    cfg.echo.emplace_back("tolerances." + key, num(slot));
  };
  positive("feller_tail", cfg.tol.feller_tail);
  positive("feller_stability", cfg.tol.feller_stability);
  positive("convergence", cfg.tol.convergence);
  positive("feller_max_outer", cfg.tol.feller_max_outer);
  positive("mass", cfg.tol.mass);
  positive("heat_time", cfg.tol.heat_time);
  positive("z_max", cfg.tol.z_max);

  const ConfigBlock empty_mc(file.source, "mc", "", 0);
  const ConfigBlock& mc = file.find("mc") ? *file.find("mc") : empty_mc;
  mc.check_keys({"n", "r0", "T", "explosion_T", "scheme", "dt", "adaptive", "kappa"});
  cfg.mc.n = mc.get_long("n", cfg.mc.n);
  if (cfg.mc.n < 10000) mc.fail("n", "n must be at least 10000");
  cfg.mc.r0 = mc.get_doubles("r0", cfg.mc.r0);
  if (cfg.mc.r0.empty()) mc.fail("r0", "r0 list is empty");
  cfg.mc.T = mc.get_double("T", cfg.mc.T);
  cfg.mc.explosion_T = mc.get_double("explosion_T", cfg.mc.explosion_T);
  if (!(cfg.mc.T > 0.0)) mc.fail("T", "T must be positive");
  if (!(cfg.mc.explosion_T > 0.0 && std::isfinite(cfg.mc.explosion_T)))
    mc.fail("explosion_T", "explosion_T must be positive and finite");
  const std::string scheme = mc.get_string("scheme", "heun");
  if (scheme == "heun") cfg.mc.scheme = Scheme::MilsteinDriftCorrected;
  else if (scheme == "euler") cfg.mc.scheme = Scheme::EulerMaruyama;
  else mc.fail("scheme", "scheme must be heun or euler");
  cfg.mc.dt.dt = mc.get_double("dt", cfg.mc.dt.dt);
  cfg.mc.dt.adaptive = mc.get_bool("adaptive", cfg.mc.dt.adaptive);
  cfg.mc.dt.kappa = mc.get_double("kappa", cfg.mc.dt.kappa);
  if (!(cfg.mc.dt.dt > 0.0)) mc.fail("dt", "dt must be positive");
  if (!(cfg.mc.dt.kappa > 0.0)) mc.fail("kappa", "kappa must be positive");
  cfg.echo.emplace_back("mc.n", std::to_string(cfg.mc.n));
  cfg.echo.emplace_back("mc.r0", join(cfg.mc.r0));
  cfg.echo.emplace_back("mc.T", num(cfg.mc.T));
  cfg.echo.emplace_back("mc.explosion_T", num(cfg.mc.explosion_T));
  cfg.echo.emplace_back("mc.scheme", scheme);
  cfg.echo.emplace_back("mc.dt", num(cfg.mc.dt.dt));
  cfg.echo.emplace_back("mc.adaptive", cfg.mc.dt.adaptive ? "true" : "false");
  cfg.echo.emplace_back("mc.kappa", num(cfg.mc.dt.kappa));
  cfg.echo.emplace_back("mc.dt_min", num(cfg.mc.dt.dt_min));

  for (const ConfigBlock* b : file.of_type("manifold")) {
    cfg.manifolds.push_back(build_manifold(*b, dir, cfg.echo));
    for (double r0 : cfg.mc.r0)
      if (!(r0 > cfg.manifolds.back().R))
        mc.fail("r0", "r0 = " + num(r0) + " must exceed R of manifold '" + b->name() + "'");
  }
  for (const ConfigBlock* b : file.of_type("graph")) cfg.graphs.push_back(build_graph(*b, cfg, cfg.echo));
  for (const ConfigBlock* b : file.of_type("submersion"))
    cfg.submersions.push_back(build_submersion(*b, cfg, cfg.echo));
  for (const ConfigBlock* b : file.of_type("patch")) cfg.patches.push_back(build_patch(*b, cfg.echo));
  return cfg;
}

// ---------------------------------------------------------------------------
// Suites

namespace {

struct Context {
  const RunConfig& cfg;
  RunReport& report;
  SuiteResult& result;

  void entry(const std::string& key, const std::string& value) { result.entries.emplace_back(key, value); }
  void verdict(const std::string& key, const Verdict& v) {
    entry(key, describe(v));
    if (v.outcome == Outcome::Inconclusive) ++result.inconclusive;
    if (v.outcome == Outcome::Inconclusive && v.evidence.diagnostic.rfind("method disagreement", 0) == 0)
      report.contradictions.push_back(key + ": " + v.evidence.diagnostic);
  }
  void csv(const std::string& name, std::string content) {
    report.csv.push_back({result.suite, name, std::move(content)});
  }
  void cross(CrossCheck c) {
    if (!c.agrees)
      report.contradictions.push_back(c.subject + " " + c.check + ": " + c.left + " vs " + c.right);
    report.cross_checks.push_back(std::move(c));
  }
};

FellerOptions feller_options(const Tolerances& t) {
  FellerOptions o;
  o.tail_tolerance = t.feller_tail;
  o.stability = t.feller_stability;
  o.convergence_tolerance = t.convergence;
  o.max_outer = t.feller_max_outer;
  return o;
}

GraphVerdictOptions graph_options(const Tolerances& t) {
  GraphVerdictOptions o;
  o.t = t.heat_time;
  o.tail_tolerance = t.feller_tail;
  o.stability = t.feller_stability;
  o.mass_tolerance = t.mass;
  o.convergence_tolerance = t.convergence;
  return o;
}

std::string tag(const std::string& name, double lambda) { return name + ".lambda=" + num(lambda); }

// File-name stem for a tag: anything outside [A-Za-z0-9_-] becomes '_', "=" is dropped.
std::string stem(const std::string& tag) {
  std::string out;
  for (char ch : tag) {
    if (ch == '=') continue;
    out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ? ch : '_';
  }
  return out;
}

void verdicts_suite(Context& c) {
  std::string rows = verdict_csv_header();
  std::string masses = "graph,lambda,truncation,mass\n";
  for (const ManifoldSpec& m : c.cfg.manifolds) {
    const Verdict par = parabolicity_verdict(m.model);
    for (double lambda : c.cfg.lambdas) {
      const std::string id = tag(m.name, lambda);
      const Verdict sc = stochastic_completeness_verdict(m.model, lambda);
      const Verdict fe = feller_verdict(m.model, lambda, m.R, feller_options(c.cfg.tol));
      for (const Verdict* v : {&par, &sc, &fe}) {
        c.verdict(id + "." + to_string(v->property), *v);
        rows += to_csv_row(id, *v);
      }
    }
  }
  for (const GraphSpec& g : c.cfg.graphs) {
    if (!g.family) continue;
    for (double lambda : c.cfg.lambdas) {
      const std::string id = tag(g.name, lambda);
      const GraphTriple t = graph_triple_verdicts(*g.family, lambda, graph_options(c.cfg.tol));
      for (Property p : {Property::Parabolic, Property::StochasticallyComplete, Property::Feller}) {
        c.verdict(id + "." + to_string(p), t.get(p));
        rows += to_csv_row(id, t.get(p));
      }
      for (std::size_t i = 0; i < t.truncations.size(); ++i)
        masses += g.name + "," + num(lambda) + "," + std::to_string(t.truncations[i]) + "," + num(t.masses[i]) + "\n";
    }
  }
  if (c.cfg.manifolds.empty() && c.cfg.graphs.empty()) c.entry("note", "no manifold or graph blocks");
  c.csv("verdicts.csv", rows);
  c.csv("kernel_masses.csv", masses);
}

void feller_suite(Context& c) {
  for (const ManifoldSpec& m : c.cfg.manifolds) {
    for (double lambda : c.cfg.lambdas) {
      const std::string id = tag(m.name, lambda);
      const ExteriorProblem problem(m.model, m.R, lambda);
      const MinimalSolution ms =
          minimal_solution(problem, default_schedule(problem, c.cfg.tol.feller_max_outer), c.cfg.tol.convergence);
      const Verdict v = feller_verdict(m.model, lambda, m.R, feller_options(c.cfg.tol));
      c.verdict(id + ".Feller", v);
      std::vector<double> schedule;
      for (const TruncatedSolution& it : ms.iterates) schedule.push_back(it.R_n);
      c.entry(id + ".schedule", join(schedule));
      c.entry(id + ".tail_value", num(ms.tail_value));
      c.entry(id + ".tail_history", join(ms.tail_history));
      c.entry(id + ".converged", ms.converged ? "true" : "false");

      std::ostringstream os;
      os << std::setprecision(15) << "r";
      for (double R_n : schedule) os << ",h_" << num(R_n);
      os << ",h_limit\n";
      const double end = ms.grid.back();
      const long rows = static_cast<long>(std::floor((end - m.R) / c.cfg.profile_step + 1e-9));
      for (long i = 0; i <= rows; ++i) {
        const double r = m.R + static_cast<double>(i) * c.cfg.profile_step;
        os << num(r);
        for (const TruncatedSolution& it : ms.iterates) os << ',' << num(it.value_at(r));
        os << ',' << num(interpolate(ms.grid, ms.limit_values, r)) << '\n';
      }
      c.csv("feller_" + stem(id) + ".csv", os.str());
    }
  }
  if (c.cfg.manifolds.empty()) c.entry("note", "no manifold blocks");
}

RadialSDEConfig sde(const RunConfig& cfg, const ModelManifold& model, double T) {
  return RadialSDEConfig(model, cfg.mc.scheme, cfg.mc.dt, cfg.seed, -1.0, T);
}

void mc_suite(Context& c) {
  const McSpec& mc = c.cfg.mc;
  std::string fk_rows = "manifold,lambda,r0,estimate,stderr,n,lower,upper,bvp,z\n";
  for (const ManifoldSpec& m : c.cfg.manifolds) {
    std::ostringstream sweep;
    sweep << "r0,estimate,stderr,n\n";
    const RadialSDEConfig hit_cfg = sde(c.cfg, m.model, mc.T);
    for (double r0 : mc.r0) {
      const Estimate e = hitting_probability(hit_cfg, r0, m.R, mc.T, mc.n);
      sweep << num(r0) << ',' << num(e.mean) << ',' << num(e.std_error) << ',' << e.n << '\n';
      c.entry(m.name + ".hit.r0=" + num(r0), num(e.mean) + " +- " + num(e.std_error));
    }
    c.csv("mc_" + m.name + ".csv", sweep.str());

    const RadialSDEConfig fk_cfg = sde(c.cfg, m.model, std::numeric_limits<double>::infinity());
    for (double lambda : c.cfg.lambdas) {
      for (double r0 : mc.r0) {
        const FeynmanKacReport fk = feynman_kac_crosscheck(fk_cfg, ExteriorProblem(m.model, m.R, lambda), r0, mc.n);
        const std::string id = tag(m.name, lambda) + ".r0=" + num(r0);
        c.entry(id + ".feynman_kac", num(fk.mc.mean) + " +- " + num(fk.mc.std_error) + " vs bvp " + num(fk.bvp) +
                                         " (z = " + num(fk.z_score) + (fk.inconclusive ? ", inconclusive" : "") + ")");
        fk_rows += m.name + ',' + num(lambda) + ',' + num(r0) + ',' + num(fk.mc.mean) + ',' + num(fk.mc.std_error) +
                   ',' + std::to_string(fk.mc.n) + ',' + num(fk.lower) + ',' + num(fk.upper) + ',' + num(fk.bvp) +
                   ',' + num(fk.z_score) + '\n';
        if (fk.inconclusive) ++c.result.inconclusive;
        c.cross({id, "feynman_kac", "bvp " + num(fk.bvp), "mc " + num(fk.mc.mean),
                 fk.inconclusive || std::abs(fk.z_score) <= c.cfg.tol.z_max});
      }
    }

    const ExplosionReport ex = explosion_probability(hit_cfg, mc.r0.front(), mc.explosion_T, mc.n);
    Outcome mc_sc = Outcome::Holds;
    if (ex.threshold_dependent) mc_sc = Outcome::Inconclusive;
    else if (ex.estimate.mean > 3.0 * ex.estimate.std_error && ex.estimate.mean > 0.0) mc_sc = Outcome::Fails;
    c.entry(m.name + ".explosion", num(ex.estimate.mean) + " +- " + num(ex.estimate.std_error) + " (doubled threshold " +
                                       num(ex.doubled.mean) + ") -> " + to_string(mc_sc));
    if (mc_sc == Outcome::Inconclusive) ++c.result.inconclusive;
    const Outcome analytic = stochastic_completeness_verdict(m.model, c.cfg.lambdas.front()).outcome;
    const bool agrees = analytic == Outcome::Inconclusive || mc_sc == Outcome::Inconclusive || analytic == mc_sc;
    c.cross({m.name, "stochastic_completeness", "analytic " + to_string(analytic), "monte_carlo " + to_string(mc_sc),
             agrees});
  }
  if (c.cfg.manifolds.empty()) c.entry("note", "no manifold blocks");
  c.csv("mc_feynman_kac.csv", fk_rows);
}

void record_equivalence(Context& c, const std::string& id, const EquivalenceReport& r, std::string& masses) {
  for (Property p : {Property::Parabolic, Property::StochasticallyComplete, Property::Feller}) {
    const Verdict& b = r.base.get(p);
    const Verdict& t = r.total.get(p);
    c.entry(id + ".base." + to_string(p), describe(b));
    c.entry(id + ".total." + to_string(p), describe(t));
    if (b.outcome == Outcome::Inconclusive) ++c.result.inconclusive;
    if (t.outcome == Outcome::Inconclusive) ++c.result.inconclusive;
    c.cross({id, to_string(p) + " base/total", "base " + to_string(b.outcome), "total " + to_string(t.outcome),
             b.outcome == t.outcome});
  }
  c.entry(id + ".fiber_volume", num(r.fiber_volume));
  c.entry(id + ".flux_exact", r.flux_exact ? "true" : "false");
  c.entry(id + ".lift_error", num(r.lift_error));
  c.entry(id + ".lemma1_error", num(r.lemma1_error));
  c.entry(id + ".passed", r.passed ? "true" : "false");
  if (!r.passed) c.result.failures.push_back(id + ": " + r.evidence);

  std::ostringstream flux;
  flux << "k,C_k_base,C_k_total,ratio\n";
  for (const FluxRow& row : r.flux)
    flux << row.k << ',' << num(row.base) << ',' << num(row.total) << ',' << num(row.ratio) << '\n';
  c.csv("submersion_" + stem(id) + "_flux.csv", flux.str());
  for (const auto* t : {&r.base, &r.total})
    for (std::size_t i = 0; i < t->truncations.size(); ++i)
      masses += id + ',' + (t == &r.base ? "base" : "total") + ',' + std::to_string(t->truncations[i]) + ',' +
                num(t->masses[i]) + '\n';
}

void submersion_suite(Context& c) {
  std::string masses = "submersion,space,truncation,mass\n";
  for (const SubmersionSpec& s : c.cfg.submersions) {
    for (double lambda : c.cfg.lambdas) {
      const std::string id = tag(s.name, lambda);
      if (s.kind == "product") {
        const GraphSpec* base = c.cfg.graph(s.base);
        const GraphSpec* fiber = c.cfg.graph(s.fiber);
        record_equivalence(c, id, equivalence_suite(base->family, *fiber->finite, lambda, graph_options(c.cfg.tol)),
                           masses);
      } else if (s.kind == "golden") {
        const auto reports = golden_equivalence_suites(lambda);
        for (std::size_t i = 0; i < reports.size(); ++i)
          record_equivalence(c, id + ".case" + std::to_string(i + 1), reports[i], masses);
      } else {
        const CounterexampleReport rep = counterexample_suite(lambda);
        for (const CounterexampleCase& k : rep.cases) {
          c.entry(id + "." + k.name, to_string(k.property) + ": base " + to_string(k.base_outcome) + ", total " +
                                         to_string(k.total_outcome) + (k.passed ? " (as expected)" : " (UNEXPECTED)"));
          if (!k.passed) c.result.failures.push_back(id + "." + k.name + ": unexpected outcome");
        }
        c.entry(id + ".control_passed", rep.control.passed ? "true" : "false");
        if (!rep.passed && rep.control.passed) c.result.failures.push_back(id + ": counterexample suite failed");
        if (!rep.control.passed) c.result.failures.push_back(id + ": compact-fiber control failed");
      }
    }
  }
  if (c.cfg.submersions.empty()) c.entry("note", "no submersion blocks");
  c.csv("kernel_masses_submersion.csv", masses);
}

void immersion_suite(Context& c) {
  const RadialFunction rho_sq = [](double r) { return Jet{r * r, 2.0 * r, 2.0}; };
  const RadialFunction rho = [](double r) { return Jet{r, 1.0, 0.0}; };
  for (const PatchSpec& p : c.cfg.patches) {
    const Supremum sup = mean_curvature_supremum(p.patch);
    c.entry(p.name + ".sup_H", num(sup.value) + " (refinement delta " + num(sup.refinement_delta) + ")");
    const CompositionConvergence conv =
        composition_convergence(p.patch, p.g == "rho" ? rho : rho_sq, p.patch.stencil);
    c.entry(p.name + ".composition", "residual " + num(conv.residual_coarse) + " -> " + num(conv.residual_fine) +
                                         " (ratio " + num(conv.ratio) + ")");
    if (!p.chain) continue;
    std::ostringstream os;
    os << "lambda,u0,u1,rho,laplacian_u,bound,mu_u,slack_first,slack_second,holds\n";
    for (double lambda : c.cfg.lambdas) {
      const ChainReport r = supersolution_chain_check(p.patch, lambda, p.R);
      c.entry(tag(p.name, lambda) + ".chain",
              "mu " + num(r.mu) + ", holding " + num(100.0 * r.fraction_holding) + "% of " +
                  std::to_string(r.samples.size()) + " samples");
      if (!r.all_hold) c.result.failures.push_back(tag(p.name, lambda) + ": supersolution chain violated");
      for (const ChainSample& s : r.samples) {
        os << num(lambda);
        for (int i = 0; i < 2; ++i) os << ',' << (i < s.param.size() ? num(s.param[i]) : "");
        os << ',' << num(s.rho) << ',' << num(s.laplacian_u) << ',' << num(s.bound) << ',' << num(s.mu_u) << ','
           << num(s.slack_first) << ',' << num(s.slack_second) << ',' << (s.holds ? 1 : 0) << '\n';
      }
    }
    c.csv("immersion_" + p.name + ".csv", os.str());
  }
  if (c.cfg.patches.empty()) c.entry("note", "no patch blocks");
}

}  // namespace

RunReport run(const RunConfig& config) {
  if (config.suites.empty()) throw PreconditionError("no suites requested");
  RunReport report;
  report.config_echo = config.echo;
  const std::map<Suite, std::function<void(Context&)>> table = {
      {Suite::Verdicts, verdicts_suite}, {Suite::Feller, feller_suite}, {Suite::MonteCarlo, mc_suite},
      {Suite::Submersion, submersion_suite}, {Suite::Immersion, immersion_suite}};
  for (Suite s : config.suites) {
    report.suites.push_back({s, {}, 0, {}, 0.0});
    Context ctx{config, report, report.suites.back()};
    const auto start = std::chrono::steady_clock::now();
    try {
      table.at(s)(ctx);
    } catch (const std::exception& e) {
      report.errors.push_back(to_string(s) + ": " + e.what());
    }
    report.suites.back().wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return report;
}

int exit_code(const RunReport& report, bool strict) {
  bool failed = !report.errors.empty() || !report.contradictions.empty();
  for (const SuiteResult& s : report.suites) failed = failed || !s.failures.empty();
  if (failed) return 1;
  if (strict && report.inconclusive() > 0) return 2;
  return 0;
}

std::string render_report(const RunReport& report, int code) {
  std::ostringstream os;
  os << "version=" << report.version << '\n';
  os << "exit_code=" << code << '\n';
  os << "contradictions=" << report.contradictions.size() << '\n';
  for (const std::string& c : report.contradictions) os << "!! CONTRADICTION " << c << '\n';
  for (const std::string& e : report.errors) os << "!! ERROR " << e << '\n';
  os << "inconclusive=" << report.inconclusive() << '\n';
  os << "\n[config]\n";
  for (const auto& [k, v] : report.config_echo) os << k << '=' << v << '\n';
  for (const SuiteResult& s : report.suites) {
    os << "\n[suite " << to_string(s.suite) << "]\n";
    os << "wall_seconds=" << std::fixed << std::setprecision(3) << s.wall_seconds << std::defaultfloat << '\n';
    for (const auto& [k, v] : s.entries) os << k << '=' << v << '\n';
    os << "inconclusive=" << s.inconclusive << '\n';
    for (const std::string& f : s.failures) os << "!! FAILURE " << f << '\n';
  }
  if (!report.cross_checks.empty()) {
    os << "\n[cross_checks]\n";
    for (const CrossCheck& c : report.cross_checks)
      os << c.subject << " | " << c.check << " | " << c.left << " | " << c.right << " | "
         << (c.agrees ? "agree" : "CONTRADICTION") << '\n';
  }
  return os.str();
}

std::vector<std::string> emit_plotdata(const RunReport& report, const std::string& dir) {
  std::vector<std::string> notices;
  std::filesystem::create_directories(dir);
  for (Suite s : all_suites()) {
    if (!report.has_suite(s)) {
      notices.push_back("skipped " + to_string(s) + " plot data: suite not run");
      continue;
    }
    for (const CsvFile& f : report.csv) {
      if (f.suite != s) continue;
      std::ofstream out(std::filesystem::path(dir) / f.name, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + (std::filesystem::path(dir) / f.name).string());
      out << f.content;
    }
  }
  return notices;
}

}  // namespace stochlab
