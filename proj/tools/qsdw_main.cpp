// Command line front end: load a config, run the experiment it names, write
// CSV tables plus a JSON summary, and report per-check pass/fail lines.
//
// Exit codes: 0 all checks pass, 1 config or usage error, 2 a physics check
// failed, 3 a numerical check failed or the integration itself blew up.
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "qsdw/config.hpp"
#include "qsdw/experiments.hpp"
#include "qsdw/io.hpp"

namespace {

void print_result(const qsdw::RunResult& result) {
  std::printf("experiment %s  (config %s, scheme %s, family %s, N=%d, dt=%g, T=%g)\n",
              result.experiment.c_str(), result.config_hash.c_str(), result.scheme.c_str(),
              result.family.c_str(), result.N, result.dt, result.T);
  for (const auto& c : result.checks) {
    std::printf("  [%s] %-34s measured %.6g  threshold %.6g%s%s\n", c.pass ? "pass" : "FAIL",
                c.name.c_str(), c.measured, c.threshold, c.note.empty() ? "" : "  ",
                c.note.c_str());
  }
  for (const auto& f : result.fits) {
    std::printf("  fit    %-34s rate %.6g  r2 %.6g\n", f.name.c_str(), f.fit.rate,
                f.fit.r_squared);
  }
  std::printf("%s (%.0f ms)\n", result.all_passed() ? "all checks passed" : "CHECKS FAILED",
              result.wall_ms);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-linear damped wave lab"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  std::string config_path;
  std::string output_dir;
  long long seed_override = -1;
  bool quiet = false;
  run->add_option("config", config_path, "config file (key = value lines)")->required();
  run->add_option("--output-dir", output_dir, "directory for CSV/JSON outputs");
  run->add_option("--seed", seed_override, "override initial.seed");
  run->add_flag("--quiet", quiet, "suppress per-check output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    qsdw::ExperimentConfig cfg = qsdw::load_experiment_config(config_path);
    if (seed_override >= 0) {
      cfg.initial.seed = static_cast<std::uint64_t>(seed_override);
      qsdw::refresh_config_identity(cfg);
    }

    const qsdw::RunResult result = qsdw::run_experiment(cfg);
    if (!output_dir.empty()) qsdw::write_run_outputs(result, cfg, output_dir);
    if (!quiet) print_result(result);

    if (result.numerical_failure()) return 3;
    if (!result.all_passed()) return 2;
    return 0;
  } catch (const qsdw::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const qsdw::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
