#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <set>

#include <omp.h>

#include "json.hpp"

#include "gge/harness.hpp"
#include "gge/measures.hpp"

namespace gge {

namespace {

using ojson = nlohmann::ordered_json;

struct Task {
  std::size_t n = 0;
  double a = 0.0;  // j_aklt, j2, d or h
  double b = 0.0;  // e
  std::size_t sample = 0;
  std::string key;
};

std::string num(double v) { return ojson(v).dump(); }

bool is_mbl(Experiment e) { return e == Experiment::mbl_scan || e == Experiment::mbl_scatter; }

std::vector<Task> make_tasks(const ExperimentConfig& cfg) {
  std::vector<Task> tasks;
  for (auto n : cfg.sizes) {
    const std::string ns = "n=" + std::to_string(n);
    switch (cfg.experiment) {
      case Experiment::aklt_sweep:
        for (double j : cfg.j_aklt) tasks.push_back({n, j, 0.0, 0, ns + ",j_aklt=" + num(j)});
        break;
      case Experiment::mg_sweep:
        for (double j2 : cfg.j2) tasks.push_back({n, j2, 0.0, 0, ns + ",j2=" + num(j2)});
        break;
      case Experiment::haldane_grid:
        for (double d : cfg.d) {
          for (double e : cfg.e) tasks.push_back({n, d, e, 0, ns + ",d=" + num(d) + ",e=" + num(e)});
        }
        break;
      case Experiment::mbl_scan:
      case Experiment::mbl_scatter:
        for (double h : cfg.h) {
          for (std::size_t s = 0; s < cfg.samples; ++s) {
            tasks.push_back({n, h, 0.0, s, ns + ",h=" + num(h) + ",sample=" + std::to_string(s)});
          }
        }
        break;
    }
  }
  return tasks;
}

std::vector<std::pair<std::string, double>> ordered_params(const ModelSpec& spec) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& name : model_parameters(spec.model)) out.emplace_back(name, spec.param(name));
  return out;
}

// max over a of |<S^a_i S^a_j>| with i, j at a quarter and three quarters of the chain.
double neel_order(const MatrixProductState& state, std::size_t n) {
  std::size_t i = n / 4, j = (3 * n) / 4;
  if (i == j) {
    i = 0;
    j = n - 1;
  }
  const auto ops = spin_operators(state.site(i).phys_dim());
  const auto opj = spin_operators(state.site(j).phys_dim());
  double best = 0.0;
  best = std::max(best, std::abs(correlation(state, ops.sx, i, opj.sx, j).real()));
  best = std::max(best, std::abs(correlation(state, ops.sy, i, opj.sy, j).real()));
  best = std::max(best, std::abs(correlation(state, ops.sz, i, opj.sz, j).real()));
  return best;
}

std::vector<SweepRecord> run_ground_state_task(const ExperimentConfig& cfg, const Task& t) {
  ModelSpec spec;
  switch (cfg.experiment) {
    case Experiment::aklt_sweep:
      spec = extended_haldane(t.n, t.a);
      break;
    case Experiment::mg_sweep:
      spec = j1j2(t.n, cfg.j1, t.a);
      break;
    case Experiment::haldane_grid:
      spec = anisotropic_haldane(t.n, cfg.j, t.a, t.b);
      break;
    default:
      throw InvalidParameter("not a ground-state experiment");
  }
  const auto result = dmrg_ground_state(to_mpo(spec), cfg.solver);
  const auto profile = ge_profile(result.state, cfg.chi_list, cfg.refinement_sweeps);
  std::optional<double> order;
  if (cfg.experiment == Experiment::haldane_grid) order = neel_order(result.state, t.n);

  std::vector<SweepRecord> out;
  for (const auto& ge : profile) {
    SweepRecord r;
    r.experiment = std::string(experiment_name(cfg.experiment));
    r.task = t.key;
    r.model = std::string(model_name(spec.model));
    r.n = t.n;
    r.params = ordered_params(spec);
    r.chi = ge.chi;
    r.energy = result.energy;
    r.value = ge.value;
    r.fidelity = ge.fidelity;
    r.neel_order = order;
    r.converged = result.report.converged;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SweepRecord> run_mbl_task(const ExperimentConfig& cfg, const Task& t) {
  const std::uint64_t seed = sample_seed(cfg.seed, t.n, t.sample);
  const auto [spec, disorder] = disordered_heisenberg(t.n, cfg.j, t.a, seed);
  const auto sol = exact_spectrum(to_sparse(spec), site_dims(spec));
  const auto picked = mid_spectrum_indices(sol, cfg.eigenstates_per_sample);

  std::vector<SweepRecord> out;
  for (auto idx : picked) {
    const auto profile = ge_profile(sol.state(idx), cfg.chi_list, cfg.refinement_sweeps);
    SweepRecord base;
    base.experiment = std::string(experiment_name(cfg.experiment));
    base.task = t.key;
    base.model = std::string(model_name(spec.model));
    base.n = t.n;
    base.params = ordered_params(spec);
    base.sample = t.sample;
    base.sample_seed = seed;
    base.eigenstate = idx;
    base.mu = sol.mu[idx];
    base.energy = sol.energies[idx];
    if (cfg.experiment == Experiment::mbl_scatter) {
      for (const auto& ge : profile) {
        SweepRecord r = base;
        r.chi = ge.chi;
        r.value = ge.value;
        r.fidelity = ge.fidelity;
        out.push_back(std::move(r));
      }
    } else {
      for (std::size_t k = 1; k < profile.size(); ++k) {
        const auto rel = relative_ge(profile.front(), profile[k]);
        SweepRecord r = base;
        r.chi = rel.chi_lo;
        r.chi_hi = rel.chi_hi;
        r.value = rel.value;
        r.raw = rel.raw;
        r.e_lo = profile.front().value;
        r.e_hi = profile[k].value;
        r.fidelity = profile[k].fidelity;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

std::vector<SweepRecord> execute(const ExperimentConfig& cfg, const Task& t) {
  return is_mbl(cfg.experiment) ? run_mbl_task(cfg, t) : run_ground_state_task(cfg, t);
}

std::vector<SweepRecord> run_checked(const ExperimentConfig& cfg, Experiment expected) {
  if (cfg.experiment != expected) {
    throw InvalidParameter("config is for experiment " + std::string(experiment_name(cfg.experiment)) +
                           ", not " + std::string(experiment_name(expected)));
  }
  return run_experiment(cfg);
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ResourceError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string journal_entry(const std::string& key, const std::vector<SweepRecord>& records) {
  ojson j;
  j["task"] = key;
  ojson list = ojson::array();
  for (const auto& r : records) list.push_back(ojson::parse(to_ndjson_line(r)));
  j["records"] = list;
  return j.dump();
}

// Completed tasks from a journal written by an earlier run of the same config.
std::map<std::string, std::vector<SweepRecord>> read_journal(const std::filesystem::path& path,
                                                             const std::string& hash) {
  std::map<std::string, std::vector<SweepRecord>> done;
  std::ifstream in(path, std::ios::binary);
  if (!in) return done;
  std::string line;
  if (!std::getline(in, line)) return done;
  const auto header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.contains("config_hash")) {
    throw InvalidInput("resume: malformed journal " + path.string());
  }
  if (header.at("config_hash").get<std::string>() != hash) {
    throw InvalidInput("resume: journal " + path.string() + " belongs to a different config");
  }
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto entry = nlohmann::json::parse(lines[i], nullptr, false);
    if (entry.is_discarded()) {
      if (i + 1 == lines.size()) break;  // torn final write
      throw InvalidInput("resume: malformed journal line " + std::to_string(i + 2));
    }
    std::vector<SweepRecord> records;
    for (const auto& r : entry.at("records")) records.push_back(from_ndjson_line(r.dump()));
    done[entry.at("task").get<std::string>()] = std::move(records);
  }
  return done;
}

// Completed tasks from a finished record file of the same config.
std::map<std::string, std::vector<SweepRecord>> read_records(const std::filesystem::path& records,
                                                             const std::filesystem::path& manifest,
                                                             const std::string& hash) {
  std::map<std::string, std::vector<SweepRecord>> done;
  std::ifstream man(manifest, std::ios::binary);
  if (!man) return done;
  const auto m = nlohmann::json::parse(man, nullptr, false);
  if (m.is_discarded() || m.value("config_hash", std::string()) != hash) return done;
  std::ifstream in(records, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto r = from_ndjson_line(line);
    done[r.task].push_back(std::move(r));
  }
  return done;
}

}  // namespace

std::uint64_t sample_seed(std::uint64_t seed, std::size_t n, std::size_t sample) {
  return splitmix64(splitmix64(seed) ^ splitmix64((static_cast<std::uint64_t>(n) << 32) ^ sample));
}

std::vector<std::string> task_keys(const ExperimentConfig& cfg) {
  std::vector<std::string> keys;
  for (const auto& t : make_tasks(cfg)) keys.push_back(t.key);
  return keys;
}

std::vector<SweepRecord> run_task(const ExperimentConfig& cfg, std::size_t index) {
  const auto tasks = make_tasks(cfg);
  if (index >= tasks.size()) throw InvalidParameter("run_task: index out of range");
  return execute(cfg, tasks[index]);
}

std::vector<SweepRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto tasks = make_tasks(cfg);
  std::vector<std::vector<SweepRecord>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  const auto count = static_cast<std::ptrdiff_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      results[static_cast<std::size_t>(i)] = execute(cfg, tasks[static_cast<std::size_t>(i)]);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<SweepRecord> out;
  for (auto& r : results) std::move(r.begin(), r.end(), std::back_inserter(out));
  return out;
}

std::vector<SweepRecord> run_aklt_sweep(const ExperimentConfig& cfg) {
  return run_checked(cfg, Experiment::aklt_sweep);
}
std::vector<SweepRecord> run_mg_sweep(const ExperimentConfig& cfg) {
  return run_checked(cfg, Experiment::mg_sweep);
}
std::vector<SweepRecord> run_haldane_grid(const ExperimentConfig& cfg) {
  return run_checked(cfg, Experiment::haldane_grid);
}
std::vector<SweepRecord> run_mbl_scan(const ExperimentConfig& cfg) {
  return run_checked(cfg, Experiment::mbl_scan);
}
std::vector<SweepRecord> run_mbl_scatter(const ExperimentConfig& cfg) {
  return run_checked(cfg, Experiment::mbl_scatter);
}

std::vector<MblAggregate> aggregate_mbl(const std::vector<SweepRecord>& records) {
  struct Acc {
    MblAggregate agg;
    std::vector<double> delta, lo, hi;
  };
  std::vector<Acc> groups;
  std::map<std::tuple<std::size_t, double, std::size_t, std::size_t>, std::size_t> index;
  for (const auto& r : records) {
    if (!r.chi_hi) continue;
    double h = 0.0;
    for (const auto& [k, v] : r.params) {
      if (k == "h") h = v;
    }
    const auto key = std::make_tuple(r.n, h, r.chi, *r.chi_hi);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      Acc acc;
      acc.agg.n = r.n;
      acc.agg.h = h;
      acc.agg.chi_lo = r.chi;
      acc.agg.chi_hi = *r.chi_hi;
      groups.push_back(std::move(acc));
    }
    auto& g = groups[it->second];
    g.delta.push_back(r.value);
    g.lo.push_back(r.e_lo.value_or(0.0));
    g.hi.push_back(r.e_hi.value_or(0.0));
  }
  auto stats = [](const std::vector<double>& v, double& mean, double& se) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    se = 0.0;
    if (v.size() < 2) return;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  };
  std::vector<MblAggregate> out;
  for (auto& g : groups) {
    g.agg.count = g.delta.size();
    stats(g.delta, g.agg.mean_delta, g.agg.stderr_delta);
    stats(g.lo, g.agg.mean_e_lo, g.agg.stderr_e_lo);
    stats(g.hi, g.agg.mean_e_hi, g.agg.stderr_e_hi);
    out.push_back(g.agg);
  }
  return out;
}

RunOutcome run_to_directory(const ExperimentConfig& cfg, const RunOptions& options) {
  cfg.validate();
  std::filesystem::path dir = options.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv(kOutputDirEnv);
    dir = (env != nullptr && *env != '\0') ? std::filesystem::path(env) : std::filesystem::path(cfg.output_dir);
  }
  std::filesystem::create_directories(dir);
  const std::string hash = config_hash(cfg);
  const std::string stem = cfg.name;

  RunOutcome outcome;
  outcome.records_file = dir / (stem + ".records.ndjson");
  outcome.csv_file = dir / (stem + ".records.csv");
  outcome.manifest_file = dir / (stem + ".manifest.json");
  const auto journal = dir / (stem + ".partial");

  const auto tasks = make_tasks(cfg);
  outcome.tasks = tasks.size();

  std::map<std::string, std::vector<SweepRecord>> done;
  if (options.resume) {
    done = read_journal(journal, hash);
    if (done.empty()) done = read_records(outcome.records_file, outcome.manifest_file, hash);
  }
  std::set<std::string> valid;
  for (const auto& t : tasks) valid.insert(t.key);
  for (auto it = done.begin(); it != done.end();) {
    it = valid.count(it->first) ? std::next(it) : done.erase(it);
  }
  outcome.tasks_resumed = done.size();

  {
    // Rewrite the journal so it holds exactly the completed tasks.
    std::string content = ojson{{"config_hash", hash}}.dump() + "\n";
    for (const auto& t : tasks) {
      if (auto it = done.find(t.key); it != done.end()) content += journal_entry(t.key, it->second) + "\n";
    }
    write_atomically(journal, content);
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!done.count(tasks[i].key)) pending.push_back(i);
  }
  std::vector<std::vector<SweepRecord>> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::vector<char> ok(tasks.size(), 0);
  {
    std::ofstream log(journal, std::ios::binary | std::ios::app);
    const int threads = options.workers > 0 ? static_cast<int>(options.workers) : omp_get_max_threads();
    const auto count = static_cast<std::ptrdiff_t>(pending.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::ptrdiff_t p = 0; p < count; ++p) {
      const std::size_t i = pending[static_cast<std::size_t>(p)];
      try {
        results[i] = execute(cfg, tasks[i]);
        ok[i] = 1;
        const std::string line = journal_entry(tasks[i].key, results[i]) + "\n";
#pragma omp critical(gge_journal)
        {
          log << line;
          log.flush();
        }
      } catch (const std::exception& ex) {
        errors[i] = ex.what();
      }
    }
  }

  std::vector<SweepRecord> records;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (auto it = done.find(tasks[i].key); it != done.end()) {
      records.insert(records.end(), it->second.begin(), it->second.end());
    } else if (ok[i]) {
      records.insert(records.end(), results[i].begin(), results[i].end());
    } else {
      outcome.failures.push_back(tasks[i].key + ": " + errors[i]);
    }
  }

  std::string ndjson, csv = csv_header() + "\n";
  for (const auto& r : records) {
    ndjson += to_ndjson_line(r) + "\n";
    csv += to_csv_line(r, hash) + "\n";
  }
  write_atomically(outcome.records_file, ndjson);
  write_atomically(outcome.csv_file, csv);

  ojson files = {{"records", outcome.records_file.filename().string()},
                 {"csv", outcome.csv_file.filename().string()}};
  if (cfg.experiment == Experiment::mbl_scan) {
    std::string sum_json, sum_csv = aggregate_csv_header() + "\n";
    for (const auto& a : aggregate_mbl(records)) {
      ojson j{{"n", a.n}, {"h", a.h}, {"chi_lo", a.chi_lo}, {"chi_hi", a.chi_hi}, {"count", a.count},
              {"mean_delta", a.mean_delta}, {"stderr_delta", a.stderr_delta},
              {"mean_e_lo", a.mean_e_lo}, {"stderr_e_lo", a.stderr_e_lo},
              {"mean_e_hi", a.mean_e_hi}, {"stderr_e_hi", a.stderr_e_hi}};
      sum_json += j.dump() + "\n";
      sum_csv += to_csv_line(a, hash) + "\n";
    }
    const auto sj = dir / (stem + ".summary.ndjson");
    const auto sc = dir / (stem + ".summary.csv");
    write_atomically(sj, sum_json);
    write_atomically(sc, sum_csv);
    files["summary"] = sj.filename().string();
    files["summary_csv"] = sc.filename().string();
  }

  ojson manifest;
  manifest["name"] = cfg.name;
  manifest["experiment"] = experiment_name(cfg.experiment);
  manifest["config_hash"] = hash;
  manifest["seed"] = cfg.seed;
  manifest["version"] = GGE_VERSION;
  manifest["config"] = ojson::parse(canonical_config(cfg));
  manifest["tasks"] = tasks.size();
  manifest["tasks_completed"] = tasks.size() - outcome.failures.size();
  manifest["records"] = records.size();
  manifest["complete"] = outcome.failures.empty();
  manifest["failures"] = outcome.failures;
  manifest["files"] = files;
  write_atomically(outcome.manifest_file, manifest.dump(2) + "\n");

  if (outcome.failures.empty()) std::filesystem::remove(journal);
  return outcome;
}

}  // namespace gge
