#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "gge/harness.hpp"

namespace gge {

namespace {

struct ExperimentInfo {
  Experiment id;
  std::string_view name;
  std::string_view description;
};

constexpr ExperimentInfo kExperiments[] = {
    {Experiment::aklt_sweep, "aklt_sweep", "extended Haldane chain, E_chi of DMRG ground states over j_aklt"},
    {Experiment::mg_sweep, "mg_sweep", "J1-J2 chain, E_chi of DMRG ground states over j2"},
    {Experiment::haldane_grid, "haldane_grid", "anisotropic Haldane chain, E_chi over a (D, E) grid"},
    {Experiment::mbl_scan, "mbl_scan", "disordered Heisenberg, Delta E of mid-spectrum eigenstates with averages"},
    {Experiment::mbl_scatter, "mbl_scatter", "disordered Heisenberg, per-eigenstate (mu, E_chi) points"},
};

std::vector<double> linspace(double lo, double hi, std::size_t points) {
  std::vector<double> out(points);
  for (std::size_t i = 0; i < points; ++i) {
    out[i] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return out;
}

bool is_mbl(Experiment e) { return e == Experiment::mbl_scan || e == Experiment::mbl_scatter; }

std::set<std::string> allowed_keys(Experiment e) {
  std::set<std::string> keys{"experiment", "name", "seed", "sizes", "chi_list",
                             "refinement_sweeps", "solver", "output_dir"};
  switch (e) {
    case Experiment::aklt_sweep:
      keys.insert("j_aklt");
      break;
    case Experiment::mg_sweep:
      keys.insert({"j1", "j2"});
      break;
    case Experiment::haldane_grid:
      keys.insert({"j", "d", "e"});
      break;
    case Experiment::mbl_scan:
    case Experiment::mbl_scatter:
      keys.insert({"j", "h", "samples", "eigenstates_per_sample"});
      break;
  }
  return keys;
}

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const auto mark = node.Mark();
    if (mark.is_null()) throw ConfigError(source_, 0, 0, msg);
    throw ConfigError(source_, static_cast<std::size_t>(mark.line) + 1,
                      static_cast<std::size_t>(mark.column) + 1, msg);
  }

  template <typename T>
  T scalar(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, key + ": expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, key + ": cannot read '" + node.Scalar() + "'");
    }
  }

  std::size_t count(const YAML::Node& node, const std::string& key) const {
    const std::string text = node.IsScalar() ? node.Scalar() : std::string();
    if (!text.empty() && text.front() == '-') fail(node, key + ": must be non-negative");
    return scalar<std::size_t>(node, key);
  }

  double real(const YAML::Node& node, const std::string& key) const {
    const double v = scalar<double>(node, key);
    if (!std::isfinite(v)) fail(node, key + ": must be finite");
    return v;
  }

  // A list of numbers, or {start, stop, points} expanded to an evenly spaced grid.
  std::vector<double> grid(const YAML::Node& node, const std::string& key) const {
    std::vector<double> out;
    if (node.IsSequence()) {
      for (const auto& item : node) out.push_back(real(item, key));
    } else if (node.IsMap()) {
      std::optional<double> start, stop;
      std::optional<std::size_t> points;
      for (const auto& kv : node) {
        const auto k = kv.first.as<std::string>();
        if (k == "start") {
          start = real(kv.second, key + ".start");
        } else if (k == "stop") {
          stop = real(kv.second, key + ".stop");
        } else if (k == "points") {
          points = count(kv.second, key + ".points");
        } else {
          fail(kv.first, key + ": unknown key '" + k + "' (expected start, stop, points)");
        }
      }
      if (!start || !stop || !points) fail(node, key + ": range needs start, stop and points");
      if (*points == 0) fail(node, key + ": grid must not be empty");
      out = linspace(*start, *stop, *points);
    } else {
      out.push_back(real(node, key));
    }
    if (out.empty()) fail(node, key + ": grid must not be empty");
    return out;
  }

  std::vector<std::size_t> counts(const YAML::Node& node, const std::string& key) const {
    std::vector<std::size_t> out;
    if (node.IsSequence()) {
      for (const auto& item : node) out.push_back(count(item, key));
    } else {
      out.push_back(count(node, key));
    }
    if (out.empty()) fail(node, key + ": list must not be empty");
    return out;
  }

  void solver(const YAML::Node& node, DmrgConfig& cfg) const {
    if (!node.IsMap()) fail(node, "solver: expected a mapping");
    for (const auto& kv : node) {
      const auto k = kv.first.as<std::string>();
      const auto& v = kv.second;
      const std::string key = "solver." + k;
      if (k == "max_bond") {
        cfg.max_bond = count(v, key);
      } else if (k == "sweeps") {
        cfg.sweeps = count(v, key);
      } else if (k == "min_sweeps") {
        cfg.min_sweeps = count(v, key);
      } else if (k == "energy_tol") {
        cfg.energy_tol = real(v, key);
      } else if (k == "truncation_tol") {
        cfg.truncation_tol = real(v, key);
      } else if (k == "initial_bond") {
        cfg.initial_bond = count(v, key);
      } else if (k == "lanczos_krylov") {
        cfg.lanczos_krylov = count(v, key);
      } else if (k == "lanczos_restarts") {
        cfg.lanczos_restarts = count(v, key);
      } else if (k == "lanczos_tol") {
        cfg.lanczos_tol = real(v, key);
      } else {
        fail(kv.first, "unknown key '" + key + "'");
      }
    }
  }

 private:
  std::string source_;
};

std::string hex_sha256(std::string_view text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, std::size_t line, std::size_t column,
                         const std::string& message)
    : InvalidInput(line == 0 ? source + ": " + message
                             : source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                                   ": " + message),
      line_(line),
      column_(column) {}

std::string_view experiment_name(Experiment e) {
  for (const auto& info : kExperiments) {
    if (info.id == e) return info.name;
  }
  return "unknown";
}

std::optional<Experiment> experiment_from_name(std::string_view name) {
  for (const auto& info : kExperiments) {
    if (info.name == name) return info.id;
  }
  return std::nullopt;
}

std::vector<Experiment> all_experiments() {
  std::vector<Experiment> out;
  for (const auto& info : kExperiments) out.push_back(info.id);
  return out;
}

std::string_view experiment_description(Experiment e) {
  for (const auto& info : kExperiments) {
    if (info.id == e) return info.description;
  }
  return "";
}

ExperimentConfig ExperimentConfig::defaults(Experiment e) {
  ExperimentConfig cfg;
  cfg.experiment = e;
  cfg.name = std::string(experiment_name(e));
  switch (e) {
    case Experiment::aklt_sweep:
      cfg.sizes = {8, 16, 32};
      cfg.j_aklt = linspace(0.0, 2.0, 21);
      break;
    case Experiment::mg_sweep:
      cfg.sizes = {8, 16, 32};
      cfg.j2 = linspace(0.0, 1.0, 21);
      break;
    case Experiment::haldane_grid:
      cfg.sizes = {32};
      cfg.d = linspace(0.0, 2.0, 21);
      cfg.e = linspace(0.0, 2.0, 21);
      break;
    case Experiment::mbl_scan:
    case Experiment::mbl_scatter:
      cfg.sizes = {8, 10, 12};
      cfg.h = {0.5, 1.0, 2.0, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0};
      break;
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  auto bad = [](const std::string& msg) { throw ConfigError("config", 0, 0, msg); };
  if (name.empty()) bad("name: must not be empty");
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
      bad("name: only letters, digits, '_', '-' and '.' are allowed");
    }
  }
  if (sizes.empty()) bad("sizes: must not be empty");
  const std::size_t min_n = (experiment == Experiment::aklt_sweep || experiment == Experiment::mg_sweep) ? 3 : 2;
  for (auto n : sizes) {
    if (n < min_n) bad("sizes: every size must be at least " + std::to_string(min_n));
  }
  if (chi_list.empty()) bad("chi_list: must not be empty");
  for (std::size_t i = 0; i < chi_list.size(); ++i) {
    if (chi_list[i] < 1) bad("chi_list: entries must be positive");
    if (i > 0 && chi_list[i] <= chi_list[i - 1]) bad("chi_list: entries must be strictly ascending");
  }
  auto finite_grid = [&bad](const std::vector<double>& g, const std::string& key) {
    if (g.empty()) bad(key + ": grid must not be empty");
    for (double v : g) {
      if (!std::isfinite(v)) bad(key + ": values must be finite");
    }
  };
  switch (experiment) {
    case Experiment::aklt_sweep:
      finite_grid(j_aklt, "j_aklt");
      break;
    case Experiment::mg_sweep:
      finite_grid(j2, "j2");
      break;
    case Experiment::haldane_grid:
      finite_grid(d, "d");
      finite_grid(e, "e");
      break;
    case Experiment::mbl_scan:
    case Experiment::mbl_scatter:
      finite_grid(h, "h");
      for (double v : h) {
        if (v < 0.0) bad("h: disorder strengths must be non-negative");
      }
      if (samples < 1) bad("samples: must be at least 1");
      if (eigenstates_per_sample < 1) bad("eigenstates_per_sample: must be at least 1");
      for (auto n : sizes) {
        if (n > 20) bad("sizes: exact diagonalization supports at most 20 sites");
        if (eigenstates_per_sample > (std::size_t{1} << n)) {
          bad("eigenstates_per_sample: exceeds the Hilbert space dimension at n = " + std::to_string(n));
        }
      }
      if (experiment == Experiment::mbl_scan && chi_list.size() < 2) {
        bad("chi_list: mbl_scan needs at least two entries (chi_lo, chi_hi...)");
      }
      break;
  }
  try {
    solver.validate();
  } catch (const InvalidParameter& ex) {
    bad(std::string("solver: ") + ex.what());
  }
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& ex) {
    throw ConfigError(source, static_cast<std::size_t>(ex.mark.line) + 1,
                      static_cast<std::size_t>(ex.mark.column) + 1, ex.msg);
  }
  Parser p(source);
  if (!root.IsMap()) {
    if (root.IsNull()) throw ConfigError(source, 0, 0, "empty config; missing required field 'experiment'");
    p.fail(root, "top level must be a mapping");
  }
  const YAML::Node exp_node = root["experiment"];
  if (!exp_node) throw ConfigError(source, 0, 0, "missing required field 'experiment'");
  const auto exp_name = p.scalar<std::string>(exp_node, "experiment");
  const auto exp = experiment_from_name(exp_name);
  if (!exp) p.fail(exp_node, "experiment: unknown experiment '" + exp_name + "'");

  ExperimentConfig cfg = ExperimentConfig::defaults(*exp);
  const auto allowed = allowed_keys(*exp);
  bool has_seed = false, has_chi = false;
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const auto& v = kv.second;
    if (!allowed.count(key)) {
      bool known_elsewhere = false;
      for (auto other : all_experiments()) known_elsewhere = known_elsewhere || allowed_keys(other).count(key);
      p.fail(kv.first, known_elsewhere ? "key '" + key + "' is not used by experiment " + exp_name
                                       : "unknown key '" + key + "'");
    }
    if (key == "experiment") continue;
    if (key == "name") {
      cfg.name = p.scalar<std::string>(v, key);
    } else if (key == "seed") {
      const std::string s = v.IsScalar() ? v.Scalar() : std::string();
      if (!s.empty() && s.front() == '-') p.fail(v, "seed: must be a non-negative integer");
      cfg.seed = p.scalar<std::uint64_t>(v, key);
      has_seed = true;
    } else if (key == "sizes") {
      cfg.sizes = p.counts(v, key);
    } else if (key == "chi_list") {
      cfg.chi_list = p.counts(v, key);
      has_chi = true;
    } else if (key == "refinement_sweeps") {
      cfg.refinement_sweeps = p.count(v, key);
    } else if (key == "solver") {
      p.solver(v, cfg.solver);
    } else if (key == "output_dir") {
      cfg.output_dir = p.scalar<std::string>(v, key);
    } else if (key == "j_aklt") {
      cfg.j_aklt = p.grid(v, key);
    } else if (key == "j1") {
      cfg.j1 = p.real(v, key);
    } else if (key == "j2") {
      cfg.j2 = p.grid(v, key);
    } else if (key == "j") {
      cfg.j = p.real(v, key);
    } else if (key == "d") {
      cfg.d = p.grid(v, key);
    } else if (key == "e") {
      cfg.e = p.grid(v, key);
    } else if (key == "h") {
      cfg.h = p.grid(v, key);
    } else if (key == "samples") {
      cfg.samples = p.count(v, key);
    } else if (key == "eigenstates_per_sample") {
      cfg.eigenstates_per_sample = p.count(v, key);
    }
  }
  if (!has_seed) throw ConfigError(source, 0, 0, "missing required field 'seed'");
  if (!has_chi) throw ConfigError(source, 0, 0, "missing required field 'chi_list'");
  try {
    cfg.validate();
  } catch (const ConfigError& ex) {
    std::string msg = ex.what();
    const std::string prefix = "config: ";
    if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    // Point at the field's node when it exists.
    const auto field = msg.substr(0, msg.find(':'));
    const auto top = field.substr(0, field.find('.'));
    if (root[top]) p.fail(root[top], msg);
    throw ConfigError(source, 0, 0, msg);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string(), 0, 0, "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string canonical_config(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["experiment"] = experiment_name(cfg.experiment);
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["sizes"] = cfg.sizes;
  j["chi_list"] = cfg.chi_list;
  j["refinement_sweeps"] = cfg.refinement_sweeps;
  switch (cfg.experiment) {
    case Experiment::aklt_sweep:
      j["j_aklt"] = cfg.j_aklt;
      break;
    case Experiment::mg_sweep:
      j["j1"] = cfg.j1;
      j["j2"] = cfg.j2;
      break;
    case Experiment::haldane_grid:
      j["j"] = cfg.j;
      j["d"] = cfg.d;
      j["e"] = cfg.e;
      break;
    case Experiment::mbl_scan:
    case Experiment::mbl_scatter:
      j["j"] = cfg.j;
      j["h"] = cfg.h;
      j["samples"] = cfg.samples;
      j["eigenstates_per_sample"] = cfg.eigenstates_per_sample;
      break;
  }
  if (!is_mbl(cfg.experiment)) {
    const auto& s = cfg.solver;
    j["solver"] = {{"max_bond", s.max_bond},
                   {"sweeps", s.sweeps},
                   {"min_sweeps", s.min_sweeps},
                   {"energy_tol", s.energy_tol},
                   {"truncation_tol", s.truncation_tol},
                   {"initial_bond", s.initial_bond},
                   {"lanczos_krylov", s.lanczos_krylov},
                   {"lanczos_restarts", s.lanczos_restarts},
                   {"lanczos_tol", s.lanczos_tol}};
  }
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) { return hex_sha256(canonical_config(cfg)); }

}  // namespace gge
