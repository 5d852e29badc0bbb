#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "stochlab/run.hpp"

namespace stochlab {

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heat-semigroup verdicts for model manifolds, graphs, submersions and immersions.", "stochlab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  bool strict = false;
  std::string out_dir;
  std::vector<double> lambdas;
  app.add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Seed for every Monte Carlo stream");
  app.add_flag("--strict", strict, "Exit with 2 when any verdict is Inconclusive");
  auto* out_opt = app.add_option("--out", out_dir, std::string("Output directory (default $") + kOutputEnv + ")");
  auto* lambda_opt = app.add_option("--lambda", lambdas, "Lambda grid, comma separated")->delimiter(',');

  const std::vector<std::pair<std::string, std::optional<Suite>>> commands = {
      {"verdict", Suite::Verdicts},     {"feller", Suite::Feller},         {"mc", Suite::MonteCarlo},
      {"submersion", Suite::Submersion}, {"immersion", Suite::Immersion}, {"all", std::nullopt}};
  for (const auto& [name, suite] : commands)
    app.add_subcommand(name, suite ? "Run the " + to_string(*suite) + " suite" : "Run the suites listed in [run]");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  Overrides overrides;
  for (const auto& [name, suite] : commands)
    if (app.got_subcommand(name) && suite) overrides.suites = std::vector<Suite>{*suite};
  if (*seed_opt) overrides.seed = seed;
  if (*out_opt) overrides.out_dir = out_dir;
  if (*lambda_opt) overrides.lambdas = lambdas;

  try {
    const RunConfig config = build_run_config(load_config(config_path), overrides);
    const RunReport report = run(config);
    const int code = exit_code(report, strict);
    const std::string text = render_report(report, code);
    out << text;
    for (const std::string& notice : emit_plotdata(report, config.out_dir)) err << "notice: " << notice << '\n';
    std::ofstream(std::filesystem::path(config.out_dir) / "report.txt") << text;
    return code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace stochlab
