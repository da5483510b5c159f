#include <iostream>

#include "CLI11.hpp"

#include "gge/harness.hpp"

namespace gge {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Generalized geometric entanglement experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::size_t workers = 0;
  bool resume = false;

  auto* run = app.add_subcommand("run", "run an experiment and write records");
  run->add_option("config_file", config_path, "experiment config (YAML)");
  run->add_option("--config", config_path, "experiment config (YAML)");
  run->add_option("--workers", workers, "parallel tasks (0: OpenMP default)");
  run->add_option("--out", out_dir, "output directory (overrides config and environment)");
  run->add_flag("--resume", resume, "skip tasks completed by an earlier run of the same config");

  auto* check = app.add_subcommand("validate-config", "check a config without running it");
  check->add_option("config_file", config_path, "experiment config (YAML)");
  check->add_option("--config", config_path, "experiment config (YAML)");

  auto* list = app.add_subcommand("list-experiments", "print the available experiments");
  auto* version = app.add_subcommand("version", "print the software version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  if (version->parsed()) {
    std::cout << "gge " << GGE_VERSION << "\n";
    return kExitOk;
  }
  if (list->parsed()) {
    for (auto e : all_experiments()) {
      std::cout << experiment_name(e) << "\t" << experiment_description(e) << "\n";
    }
    return kExitOk;
  }
  if (config_path.empty()) {
    std::cerr << "error: a config file is required (positional or --config)\n";
    return kExitConfig;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (check->parsed()) {
    std::cout << config_path << ": ok (" << experiment_name(cfg.experiment) << ", "
              << task_keys(cfg).size() << " tasks, hash " << config_hash(cfg) << ")\n";
    return kExitOk;
  }

  try {
    RunOptions opts;
    opts.out_dir = out_dir;
    opts.workers = workers;
    opts.resume = resume;
    const auto outcome = run_to_directory(cfg, opts);
    std::cout << "tasks: " << outcome.tasks << " (resumed " << outcome.tasks_resumed << ")\n"
              << "records: " << outcome.records_file.string() << "\n"
              << "csv: " << outcome.csv_file.string() << "\n"
              << "manifest: " << outcome.manifest_file.string() << "\n";
    if (!outcome.complete()) {
      for (const auto& f : outcome.failures) std::cerr << "failed: " << f << "\n";
      std::cerr << outcome.failures.size() << " task(s) failed; rerun with --resume\n";
      return kExitPartial;
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace gge
