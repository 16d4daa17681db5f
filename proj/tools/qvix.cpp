// qvix: run, validate or oracle-check an experiment config.
//
//   qvix run <config.json> [--out DIR] [--seed N]
//   qvix validate <config.json>
//   qvix oracle <config.json> [--out DIR] [--seed N]
//
// QVIX_LOG sets the log level (trace, debug, info, warn, error, off).

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "qvix/experiment.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("qvix");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("QVIX_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept "off" when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("unknown QVIX_LOG level '{}', keeping info", env);
    }
  }
}

int execute(const std::string& path, const std::string& out_dir, std::optional<std::uint64_t> seed,
            bool oracle) {
  qvix::ExperimentConfig cfg = qvix::load_config(path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (seed) cfg.seed = *seed;
  qvix::RunOptions opts;
  opts.force_oracle = oracle;
  const qvix::RunArtifacts art = qvix::run_experiment(cfg, opts);
  qvix::emit_report(art, cfg.output_dir);
  std::cout << (art.ok() ? "ok" : "FAILED") << ": report written to " << cfg.output_dir << "\n";
  for (const std::string& f : art.failures) std::cout << "  failed: " << f << "\n";
  return art.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extremal solutions and sensitivities of implicit obstacle problems"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run an experiment and write its report");
  run->add_option("config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--seed", seed, "Seed for randomized diagnostics");

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  auto* oracle = app.add_subcommand("oracle", "Run with enumeration-oracle cross-checks (n <= 14)");
  oracle->add_option("config", config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  oracle->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  oracle->add_option("--seed", seed, "Seed for randomized diagnostics");

  CLI11_PARSE(app, argc, argv);
  setup_logging();

  try {
    if (validate->parsed()) {
      const qvix::ExperimentConfig cfg = qvix::load_config(config);
      std::cout << "valid: " << qvix::to_string(cfg.map.kind) << ", n = " << cfg.grid.n_nodes
                << ", run " << qvix::to_string(cfg.run) << "\n";
      return 0;
    }
    return execute(config, out_dir, seed, oracle->parsed());
  } catch (const qvix::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qvix::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
