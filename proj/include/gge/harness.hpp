#pragma once

// Experiment configs, record streams and the run driver behind the CLI.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gge/errors.hpp"
#include "gge/solvers.hpp"

namespace gge {

enum class Experiment { aklt_sweep, mg_sweep, haldane_grid, mbl_scan, mbl_scatter };

std::string_view experiment_name(Experiment e);
std::optional<Experiment> experiment_from_name(std::string_view name);
std::vector<Experiment> all_experiments();
std::string_view experiment_description(Experiment e);

/// Config problem located in the source text. line and column are 1-based; 0 when unknown.
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& source, std::size_t line, std::size_t column,
              const std::string& message);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::aklt_sweep;
  std::string name;  ///< file stem for outputs, defaults to the experiment name
  std::uint64_t seed = 0;
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> chi_list;
  std::size_t refinement_sweeps = 0;

  std::vector<double> j_aklt;  ///< aklt_sweep
  double j1 = 1.0;             ///< mg_sweep
  std::vector<double> j2;      ///< mg_sweep
  double j = 1.0;              ///< haldane_grid, mbl_*
  std::vector<double> d;       ///< haldane_grid
  std::vector<double> e;       ///< haldane_grid
  std::vector<double> h;       ///< mbl_*
  std::size_t samples = 64;
  std::size_t eigenstates_per_sample = 5;

  DmrgConfig solver;
  std::string output_dir = "results";

  /// Desk-scale defaults for everything except seed and chi_list.
  static ExperimentConfig defaults(Experiment e);

  /// Throws ConfigError (without a location) naming the offending field.
  void validate() const;
};

/// Parses YAML. Unknown keys, keys that belong to another experiment, missing
/// required fields (experiment, seed, chi_list) and bad values raise ConfigError
/// with the line and column of the offending node.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the resolved config (output_dir excluded) and its SHA-256.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

struct SweepRecord {
  std::string experiment;
  std::string task;  ///< identifies the unit of work that produced the record
  std::string model;
  std::size_t n = 0;
  std::vector<std::pair<std::string, double>> params;  ///< model parameters in model order
  std::size_t chi = 1;
  std::optional<std::size_t> chi_hi;  ///< set for Delta E records (chi is then chi_lo)
  std::optional<std::size_t> sample;
  std::optional<std::uint64_t> sample_seed;
  std::optional<std::size_t> eigenstate;  ///< index in the ascending spectrum
  std::optional<double> mu;
  std::optional<double> energy;
  double value = 0.0;  ///< E_chi, or clamped Delta E
  std::optional<double> raw;        ///< Delta E before clamping
  std::optional<double> e_lo;       ///< E_chi_lo behind a Delta E record
  std::optional<double> e_hi;       ///< E_chi_hi behind a Delta E record
  std::optional<double> fidelity;   ///< fidelity of E_chi (E_chi_hi for Delta E)
  std::optional<double> neel_order; ///< haldane_grid: max_a |<S^a_{n/4} S^a_{3n/4}>|
  bool converged = true;
};

/// Mean and standard error over samples and eigenstates of one (n, h, chi pair).
struct MblAggregate {
  std::size_t n = 0;
  double h = 0.0;
  std::size_t chi_lo = 1;
  std::size_t chi_hi = 2;
  std::size_t count = 0;
  double mean_delta = 0.0, stderr_delta = 0.0;
  double mean_e_lo = 0.0, stderr_e_lo = 0.0;
  double mean_e_hi = 0.0, stderr_e_hi = 0.0;
};

/// Seed of disorder sample s at size n; shared by all h so samples differ only in scale.
std::uint64_t sample_seed(std::uint64_t seed, std::size_t n, std::size_t sample);

/// Units of work in canonical order.
std::vector<std::string> task_keys(const ExperimentConfig& cfg);
std::vector<SweepRecord> run_task(const ExperimentConfig& cfg, std::size_t index);

/// Runs every task (OpenMP over tasks) and returns records in canonical order.
std::vector<SweepRecord> run_experiment(const ExperimentConfig& cfg);
std::vector<SweepRecord> run_aklt_sweep(const ExperimentConfig& cfg);
std::vector<SweepRecord> run_mg_sweep(const ExperimentConfig& cfg);
std::vector<SweepRecord> run_haldane_grid(const ExperimentConfig& cfg);
std::vector<SweepRecord> run_mbl_scan(const ExperimentConfig& cfg);
std::vector<SweepRecord> run_mbl_scatter(const ExperimentConfig& cfg);

std::vector<MblAggregate> aggregate_mbl(const std::vector<SweepRecord>& records);

// ----------------------------------------------------------------- output

std::string to_ndjson_line(const SweepRecord& r);
SweepRecord from_ndjson_line(std::string_view line);
std::string csv_header();
std::string to_csv_line(const SweepRecord& r, const std::string& hash);
std::string aggregate_csv_header();
std::string to_csv_line(const MblAggregate& a, const std::string& hash);

struct RunOptions {
  std::filesystem::path out_dir;  ///< empty: cfg.output_dir
  std::size_t workers = 0;        ///< 0: OpenMP default
  bool resume = false;
};

struct RunOutcome {
  std::filesystem::path records_file;
  std::filesystem::path csv_file;
  std::filesystem::path manifest_file;
  std::size_t tasks = 0;
  std::size_t tasks_resumed = 0;
  std::vector<std::string> failures;  ///< "task: message"
  bool complete() const noexcept { return failures.empty(); }
};

/// Runs the experiment and writes <name>.records.ndjson, <name>.records.csv,
/// <name>.manifest.json (plus <name>.summary.* for mbl_scan). Completed tasks
/// are journaled to <name>.partial so an interrupted or failed run can resume.
RunOutcome run_to_directory(const ExperimentConfig& cfg, const RunOptions& options);

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "GGE_OUTPUT_DIR";

int cli_main(int argc, char** argv);

}  // namespace gge
