#include <sstream>

#include "json.hpp"

#include "gge/harness.hpp"

namespace gge {

namespace {

using ojson = nlohmann::ordered_json;

// Union of model parameters, in CSV column order.
const std::vector<std::string> kParamColumns{"j_aklt", "j1", "j2", "j", "d", "e", "h"};

std::string number(double v) { return ojson(v).dump(); }

template <typename T>
std::string optional_cell(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return number(*v);
  } else {
    return std::to_string(*v);
  }
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

template <typename T>
std::optional<T> get_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

std::string to_ndjson_line(const SweepRecord& r) {
  ojson j;
  j["experiment"] = r.experiment;
  j["task"] = r.task;
  j["model"] = r.model;
  j["n"] = r.n;
  ojson params = ojson::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  j["params"] = params;
  j["chi"] = r.chi;
  if (r.chi_hi) j["chi_hi"] = *r.chi_hi;
  if (r.sample) j["sample"] = *r.sample;
  if (r.sample_seed) j["sample_seed"] = *r.sample_seed;
  if (r.eigenstate) j["eigenstate"] = *r.eigenstate;
  if (r.mu) j["mu"] = *r.mu;
  if (r.energy) j["energy"] = *r.energy;
  j["value"] = r.value;
  if (r.raw) j["raw"] = *r.raw;
  if (r.e_lo) j["e_lo"] = *r.e_lo;
  if (r.e_hi) j["e_hi"] = *r.e_hi;
  if (r.fidelity) j["fidelity"] = *r.fidelity;
  if (r.neel_order) j["neel_order"] = *r.neel_order;
  j["converged"] = r.converged;
  return j.dump();
}

SweepRecord from_ndjson_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidInput(std::string("record: ") + ex.what());
  }
  try {
    SweepRecord r;
    r.experiment = j.at("experiment").get<std::string>();
    r.task = j.at("task").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.n = j.at("n").get<std::size_t>();
    // nlohmann::json sorts object keys; restore the model's parameter order.
    const auto& params = j.at("params");
    if (const auto m = model_from_name(r.model)) {
      for (const auto& name : model_parameters(*m)) {
        if (params.contains(name)) r.params.emplace_back(name, params.at(name).get<double>());
      }
    }
    if (r.params.size() != params.size()) throw InvalidInput("record: unexpected model parameters");
    r.chi = j.at("chi").get<std::size_t>();
    r.chi_hi = get_optional<std::size_t>(j, "chi_hi");
    r.sample = get_optional<std::size_t>(j, "sample");
    r.sample_seed = get_optional<std::uint64_t>(j, "sample_seed");
    r.eigenstate = get_optional<std::size_t>(j, "eigenstate");
    r.mu = get_optional<double>(j, "mu");
    r.energy = get_optional<double>(j, "energy");
    r.value = j.at("value").get<double>();
    r.raw = get_optional<double>(j, "raw");
    r.e_lo = get_optional<double>(j, "e_lo");
    r.e_hi = get_optional<double>(j, "e_hi");
    r.fidelity = get_optional<double>(j, "fidelity");
    r.neel_order = get_optional<double>(j, "neel_order");
    r.converged = j.at("converged").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw InvalidInput(std::string("record: ") + ex.what());
  }
}

std::string csv_header() {
  std::string out = "experiment,task,model,n";
  for (const auto& p : kParamColumns) out += "," + p;
  out += ",chi,chi_hi,sample,sample_seed,eigenstate,mu,energy,value,raw,e_lo,e_hi,fidelity,neel_order,converged,config_hash";
  return out;
}

std::string to_csv_line(const SweepRecord& r, const std::string& hash) {
  std::ostringstream out;
  out << csv_escape(r.experiment) << ',' << csv_escape(r.task) << ',' << csv_escape(r.model) << ',' << r.n;
  for (const auto& col : kParamColumns) {
    out << ',';
    for (const auto& [k, v] : r.params) {
      if (k == col) out << number(v);
    }
  }
  out << ',' << r.chi << ',' << optional_cell(r.chi_hi) << ',' << optional_cell(r.sample) << ','
      << optional_cell(r.sample_seed) << ',' << optional_cell(r.eigenstate) << ','
      << optional_cell(r.mu) << ',' << optional_cell(r.energy) << ',' << number(r.value) << ','
      << optional_cell(r.raw) << ',' << optional_cell(r.e_lo) << ',' << optional_cell(r.e_hi) << ','
      << optional_cell(r.fidelity) << ',' << optional_cell(r.neel_order) << ','
      << (r.converged ? "true" : "false") << ',' << hash;
  return out.str();
}

std::string aggregate_csv_header() {
  return "n,h,chi_lo,chi_hi,count,mean_delta,stderr_delta,mean_e_lo,stderr_e_lo,mean_e_hi,stderr_e_hi,config_hash";
}

std::string to_csv_line(const MblAggregate& a, const std::string& hash) {
  std::ostringstream out;
  out << a.n << ',' << number(a.h) << ',' << a.chi_lo << ',' << a.chi_hi << ',' << a.count << ','
      << number(a.mean_delta) << ',' << number(a.stderr_delta) << ',' << number(a.mean_e_lo) << ','
      << number(a.stderr_e_lo) << ',' << number(a.mean_e_hi) << ',' << number(a.stderr_e_hi) << ','
      << hash;
  return out.str();
}

}  // namespace gge
