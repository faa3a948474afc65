#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "mvcontract/commands.hpp"
#include "mvcontract/config.hpp"

using namespace mvcontract;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::string> seed;
  std::optional<std::string> paths;
  std::optional<std::string> steps;
  std::optional<std::string> case_tag;
  std::optional<std::string> p2_mode;
};

// Flag > environment > config file > built-in default.
RunConfig resolve(const Overrides& o) {
  std::string config_path = o.config;
  if (config_path.empty()) {
    if (const char* env = std::getenv("MVCONTRACT_CONFIG")) config_path = env;
  }
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);

  const auto apply = [&](const char* key, const char* env_name, const std::optional<std::string>& flag) {
    if (flag) {
      set_config_value(cfg, key, *flag);
    } else if (const char* env = std::getenv(env_name)) {
      set_config_value(cfg, key, env);
    }
  };
  apply("out_dir", "MVCONTRACT_OUT", o.out);
  apply("seed", "MVCONTRACT_SEED", o.seed);
  apply("n_paths", "MVCONTRACT_PATHS", o.paths);
  apply("n_steps", "MVCONTRACT_STEPS", o.steps);
  apply("case", "MVCONTRACT_CASE", o.case_tag);
  apply("p2_drift_mode", "MVCONTRACT_P2_MODE", o.p2_mode);
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-variance LQ contract solver: Riccati coefficients, Monte-Carlo sweeps and oracle checks"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config, "key = value config file (env MVCONTRACT_CONFIG)");
  app.add_option("--out", o.out, "output directory (env MVCONTRACT_OUT)");
  app.add_option("--seed", o.seed, "RNG seed, u64 (env MVCONTRACT_SEED)");
  app.add_option("--paths", o.paths, "Monte-Carlo paths (env MVCONTRACT_PATHS)");
  app.add_option("--steps", o.steps, "time steps (env MVCONTRACT_STEPS)");
  app.add_option("--case", o.case_tag, "transversality case i|ii|iii|iv|v|explicit (env MVCONTRACT_CASE)");
  app.add_option("--p2-mode", o.p2_mode, "as_printed|eta_equals_x (env MVCONTRACT_P2_MODE)");

  auto* riccati = app.add_subcommand("riccati", "integrate the coefficient ODEs and write riccati.csv");
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo sweep over the multiplier grid, writes eval.csv");
  auto* check = app.add_subcommand("check", "run the oracle suite");
  auto* weakcheck = app.add_subcommand("weakcheck", "run the weak-formulation checks");
  bool dump = false;
  app.add_flag("--print-config", dump, "print the resolved config before running");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  return guarded(std::cerr, [&] {
    const RunConfig cfg = resolve(o);
    if (dump) std::cout << to_config_text(cfg);
    if (riccati->parsed()) return run_riccati(cfg, std::cout, std::cerr);
    if (simulate->parsed()) return run_simulate(cfg, std::cout, std::cerr);
    if (check->parsed()) return run_check(cfg, std::cout, std::cerr);
    if (weakcheck->parsed()) return run_weakcheck(cfg, std::cout, std::cerr);
    return static_cast<int>(kExitUnexpected);
  });
}
