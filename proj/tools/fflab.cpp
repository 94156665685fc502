// Batch experiment runner. `fflab run <config>` executes one experiment and
// writes <prefix>.csv / <prefix>.json (and .svg for snapshots);
// `fflab snapshot <config>` is a shorthand that requires a snapshot config.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fflab/config.hpp"
#include "fflab/experiments.hpp"

namespace {

int thread_default() {
  const char* env = std::getenv("FFLAB_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == nullptr || *end != '\0' || v < 1 || v > 4096) return 0;
  return static_cast<int>(v);
}

struct Overrides {
  std::string config_path;
  bool assert_checks = false;
  int threads = 0;  // 0 = keep config / env default
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<std::string> sets;  // key=value pairs targeting [params]
};

fflab::ExperimentConfig load(const Overrides& ov) {
  fflab::ExperimentConfig cfg = fflab::parse_config_file(ov.config_path);
  if (ov.assert_checks) cfg.assert_checks = true;
  if (ov.threads > 0)
    cfg.threads = ov.threads;
  else if (const int env = thread_default(); env > 0)
    cfg.threads = env;
  if (ov.has_seed) cfg.seed = ov.seed;
  if (!ov.out.empty()) cfg.output = ov.out;
  for (const std::string& kv : ov.sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw fflab::ConfigError(0, "--set expects key=value, got '" + kv + "'");
    cfg.params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return cfg;
}

int execute(const Overrides& ov, bool snapshot_only) {
  const fflab::ExperimentConfig cfg = load(ov);
  if (snapshot_only && cfg.experiment != "snapshot")
    throw fflab::ConfigError(0, "snapshot command requires experiment name 'snapshot'");
  const fflab::RunOutputs out = fflab::run_experiment(cfg);
  std::printf("wrote %s\n", out.csv_path.c_str());
  std::printf("wrote %s\n", out.json_path.c_str());
  if (!out.svg_path.empty()) std::printf("wrote %s\n", out.svg_path.c_str());
  if (!out.checks_passed) {
    std::printf("checks: FAILED\n");
    if (cfg.assert_checks) return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forest-fire simulation lab"};
  app.require_subcommand(1);

  Overrides run_ov, snap_ov;

  CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("config", run_ov.config_path, "config file")->required();
  run->add_flag("--assert", run_ov.assert_checks, "exit 2 when any check fails");
  run->add_option("--threads", run_ov.threads, "worker threads");
  run->add_option("--seed", run_ov.seed, "master seed override")
      ->each([&run_ov](const std::string&) { run_ov.has_seed = true; });
  run->add_option("--out", run_ov.out, "output path prefix");
  run->add_option("--set", run_ov.sets, "parameter override key=value (repeatable)");

  CLI::App* snap = app.add_subcommand("snapshot", "render one configuration snapshot");
  snap->add_option("config", snap_ov.config_path, "config file")->required();
  snap->add_option("--threads", snap_ov.threads, "worker threads");
  snap->add_option("--seed", snap_ov.seed, "master seed override")
      ->each([&snap_ov](const std::string&) { snap_ov.has_seed = true; });
  snap->add_option("--out", snap_ov.out, "output path prefix");
  snap->add_option("--set", snap_ov.sets, "parameter override key=value (repeatable)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return execute(run_ov, false);
    return execute(snap_ov, true);
  } catch (const fflab::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
