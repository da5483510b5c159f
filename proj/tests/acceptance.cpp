// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "gge/harness.hpp"
#include "gge/measures.hpp"
#include "gge/solvers.hpp"
#include "testing.hpp"

namespace fs = std::filesystem;
using gge::Experiment;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> linspace(double a, double b, std::size_t points) {
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
  return v;
}

double param(const gge::SweepRecord& r, const std::string& name) {
  for (const auto& [k, v] : r.params)
    if (k == name) return v;
  return std::nan("");
}

// ---------------------------------------------------------------------- 1
Outcome single_cut_oracle() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> dim(2, 6);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const gge::Extents dims{dim(rng), dim(rng)};
    const auto psi = testing_util::random_state(rng, dims);
    const Eigen::VectorXd w = testing_util::schmidt_weights(psi, 1);
    double kept = 0.0;
    for (std::size_t chi = 1; chi <= std::min(dims[0], dims[1]); ++chi) {
      kept += w(static_cast<Eigen::Index>(chi - 1));
      worst = std::max(worst, std::abs(gge::geometric_entanglement(psi, chi).value - (1.0 - kept)));
    }
  }
  return {worst <= 1e-12, fmt("max |E_chi - (1 - sum s_i^2)| = %.2e over 200 states (tol 1e-12)", worst)};
}

// ---------------------------------------------------------------------- 2
Outcome hierarchy() {
  std::mt19937_64 rng(1002);
  double worst_e = 0.0, worst_d = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto psi = testing_util::random_state(rng, gge::Extents(8, 2));
    std::vector<std::size_t> chis(16);
    for (std::size_t i = 0; i < 16; ++i) chis[i] = i + 1;
    const auto prof = gge::ge_profile(psi, chis);
    for (std::size_t i = 1; i < prof.size(); ++i) worst_e = std::max(worst_e, prof[i].value - prof[i - 1].value);
    for (std::size_t i = 2; i < prof.size(); ++i) {
      const double d_prev = gge::relative_ge(prof[0], prof[i - 1]).value;
      const double d_next = gge::relative_ge(prof[0], prof[i]).value;
      worst_d = std::max(worst_d, d_prev - d_next);
    }
  }
  return {worst_e <= 1e-10 && worst_d <= 1e-10,
          fmt("max violation E_chi chain %.2e, Delta E_{1,chi} chain %.2e (tol 1e-10)", worst_e, worst_d)};
}

// ---------------------------------------------------------------------- 3
Outcome aklt_detection() {
  auto cfg = gge::ExperimentConfig::defaults(Experiment::aklt_sweep);
  cfg.seed = 1;
  cfg.sizes = {32};
  cfg.j_aklt = linspace(0.0, 2.0, 21);
  cfg.chi_list = {1, 2};
  cfg.solver.max_bond = 64;
  const auto rec = gge::run_aklt_sweep(cfg);
  std::vector<double> e1(21), e2(21);
  for (const auto& r : rec) {
    const auto i = static_cast<std::size_t>(std::lround(param(r, "j_aklt") * 10));
    (r.chi == 1 ? e1 : e2)[i] = r.value;
  }
  const double e2_at = e2[10];
  const auto argmin = static_cast<std::size_t>(std::min_element(e2.begin(), e2.end()) - e2.begin());
  const double e1_min = *std::min_element(e1.begin(), e1.end());
  bool up = true, down = true;
  for (std::size_t i = 8; i < 12; ++i) {
    up = up && e1[i + 1] >= e1[i] - 1e-3;
    down = down && e1[i + 1] <= e1[i] + 1e-3;
  }
  const bool pass = e2_at <= 1e-4 && argmin == 10 && e1_min >= 0.9 && (up || down);
  return {pass, fmt("E2(1) = %.2e (<= 1e-4), argmin E2 at J = %.1f, min E1 = %.4f (>= 0.9), "
                    "E1 monotone on [0.8, 1.2]: %s",
                    e2_at, static_cast<double>(argmin) / 10.0, e1_min, (up || down) ? "yes" : "no")};
}

// ---------------------------------------------------------------------- 4
Outcome majumdar_ghosh() {
  auto cfg = gge::ExperimentConfig::defaults(Experiment::mg_sweep);
  cfg.seed = 1;
  cfg.sizes = {8, 32};
  cfg.j2 = {0.5};
  cfg.chi_list = {1, 2};
  const auto rec = gge::run_mg_sweep(cfg);
  double e2_32 = 1.0, e1_8 = 0.0;
  for (const auto& r : rec) {
    if (r.n == 32 && r.chi == 2) e2_32 = r.value;
    if (r.n == 8 && r.chi == 1) e1_8 = r.value;
  }
  const double bound = 1.0 - std::pow(2.0, -3.0) - 0.02;

  const auto gs = gge::dmrg_ground_state(gge::to_mpo(gge::j1j2(4, 1.0, 0.5)));
  const auto psi = gge::to_dense(gs.state);
  std::mt19937_64 rng(1004);
  const double brute = 1.0 - testing_util::max_product_overlap(psi, rng);
  const double refined = gge::geometric_entanglement(psi, 1, 100).value;
  const bool pass = e2_32 <= 1e-6 && e1_8 >= bound && std::abs(refined - brute) <= 1e-6;
  return {pass, fmt("n=32 E2 = %.2e (<= 1e-6), n=8 E1 = %.4f (>= %.4f), n=4 refined E1 = %.8f vs brute force %.8f",
                    e2_32, e1_8, bound, refined, brute)};
}

// ---------------------------------------------------------------------- 5
Outcome haldane_ordering() {
  auto cfg = gge::ExperimentConfig::defaults(Experiment::haldane_grid);
  cfg.seed = 1;
  cfg.sizes = {32};
  cfg.d = linspace(0.0, 2.0, 9);
  cfg.e = linspace(0.0, 2.0, 9);
  cfg.chi_list = {2, 3, 6};
  cfg.solver.max_bond = 64;
  const auto rec = gge::run_haldane_grid(cfg);
  std::map<std::tuple<double, double, std::size_t>, double> value;
  std::map<std::pair<double, double>, double> neel;
  for (const auto& r : rec) {
    value[{param(r, "d"), param(r, "e"), r.chi}] = r.value;
    neel[{param(r, "d"), param(r, "e")}] = *r.neel_order;
  }
  auto deepest = std::max_element(neel.begin(), neel.end(), [](auto& a, auto& b) { return a.second < b.second; });
  const auto [dn, en] = deepest->first;
  const double e2_neel = value[{dn, en, 2}];
  const double e3_d = value[{2.0, 0.0, 3}], e2_d = value[{2.0, 0.0, 2}];
  const double e6_h = value[{0.0, 0.0, 6}], e2_h = value[{0.0, 0.0, 2}];
  const bool pass = e2_neel < 0.1 && e3_d < 0.1 && e2_d > 0.3 && e6_h < 0.1 && e2_h > 0.3;
  return {pass, fmt("Neel-like point (D,E) = (%.2f,%.2f) order %.3f: E2 = %.4f (< 0.1); "
                    "(2,0): E3 = %.4f (< 0.1), E2 = %.4f (> 0.3); (0,0): E6 = %.4f (< 0.1), E2 = %.4f (> 0.3)",
                    dn, en, deepest->second, e2_neel, e3_d, e2_d, e6_h, e2_h)};
}

// ---------------------------------------------------------------------- 6
Outcome mbl_shape() {
  auto cfg = gge::ExperimentConfig::defaults(Experiment::mbl_scan);
  cfg.seed = 1;
  cfg.sizes = {12};
  cfg.h = {1.0, 3.5, 8.0};
  cfg.samples = 64;
  cfg.eigenstates_per_sample = 5;
  cfg.chi_list = {1, 2};
  const auto agg = gge::aggregate_mbl(gge::run_mbl_scan(cfg));
  std::map<double, gge::MblAggregate> at;
  for (const auto& a : agg) at[a.h] = a;
  const double d1 = at[1.0].mean_delta, d35 = at[3.5].mean_delta, d8 = at[8.0].mean_delta;
  const double e2_8 = at[8.0].mean_e_hi, e1_8 = at[8.0].mean_e_lo;
  const bool c1 = d1 <= 0.05, c2 = d35 >= 3 * d1 + 0.05, c3 = d8 < d35, c4 = e2_8 <= 0.2 && e1_8 >= e2_8 + 0.1;
  return {c1 && c2 && c3 && c4,
          fmt("mean dE12: h=1 %.4f +- %.4f (<= 0.05: %s), h=3.5 %.4f (>= 3*h1+0.05: %s), h=8 %.4f (< h3.5: %s); "
              "h=8 E2 = %.4f, E1 = %.4f (%s); %zu states per h",
              d1, at[1.0].stderr_delta, c1 ? "ok" : "no", d35, c2 ? "ok" : "no", d8, c3 ? "ok" : "no", e2_8, e1_8,
              c4 ? "ok" : "no", at[1.0].count)};
}

// ---------------------------------------------------------------------- 7
double ground_energy_by_ed(const gge::ModelSpec& spec) {
  return gge::exact_spectrum(gge::to_sparse(spec), gge::site_dims(spec)).energies.front();
}

Outcome cross_solver() {
  std::vector<gge::ModelSpec> specs;
  for (std::size_t n : {3, 5, 8})
    for (double ja : {0.0, 1.0, 2.0}) specs.push_back(gge::extended_haldane(n, ja));
  for (std::size_t n : {2, 4, 6})
    for (auto [d, e] : {std::pair{0.0, 0.0}, {1.0, 0.5}, {2.0, 0.0}, {0.5, 2.0}})
      specs.push_back(gge::anisotropic_haldane(n, 1.0, d, e));
  specs.push_back(gge::anisotropic_haldane(8, 1.0, 0.5, 0.0));
  for (std::size_t n : {2, 5, 8})
    for (double h : {0.5, 3.0, 8.0}) specs.push_back(gge::disordered_heisenberg(n, 1.0, h, 7 + n).first);
  for (std::size_t n : {3, 6, 8})
    for (double j2 : {0.0, 0.5, 1.0}) specs.push_back(gge::j1j2(n, 1.0, j2));

  double worst_e = 0.0;
  for (const auto& spec : specs) {
    const auto r = gge::dmrg_ground_state(gge::to_mpo(spec));
    worst_e = std::max(worst_e, std::abs(r.energy - ground_energy_by_ed(spec)));
  }

  std::mt19937_64 rng(1007);
  double worst_x = 0.0;
  const std::vector<gge::ModelSpec> mpo_specs{gge::extended_haldane(8, 1.0), gge::anisotropic_haldane(7, 1.0, 0.7, 0.4),
                                              gge::disordered_heisenberg(8, 1.0, 3.0, 5).first, gge::j1j2(8, 1.0, 0.5)};
  for (const auto& spec : mpo_specs) {
    const auto op = gge::to_mpo(spec);
    const Eigen::MatrixXcd h = testing_util::to_eigen(gge::to_dense_matrix(spec));
    for (int t = 0; t < 100; ++t) {
      const auto psi = testing_util::random_state(rng, gge::site_dims(spec));
      const Eigen::VectorXcd v = testing_util::to_eigen(psi);
      const gge::cplx dense = v.dot(h * v);
      worst_x = std::max(worst_x, std::abs(gge::expectation(gge::exact_mps(psi), op) - dense));
    }
  }
  return {worst_e <= 1e-8 && worst_x <= 1e-10,
          fmt("%zu model instances: max |E_dmrg - E_ed| = %.2e (<= 1e-8); MPO vs dense on 400 states: %.2e (<= 1e-10)",
              specs.size(), worst_e, worst_x)};
}

// ---------------------------------------------------------------------- 8
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  std::vector<gge::ExperimentConfig> cfgs;
  for (auto e : gge::all_experiments()) {
    auto cfg = gge::ExperimentConfig::defaults(e);
    cfg.seed = 17;
    cfg.chi_list = {1, 2, 3};
    switch (e) {
      case Experiment::aklt_sweep: cfg.sizes = {10}; cfg.j_aklt = linspace(0, 2, 5); break;
      case Experiment::mg_sweep: cfg.sizes = {10}; cfg.j2 = linspace(0, 1, 5); break;
      case Experiment::haldane_grid: cfg.sizes = {8}; cfg.d = linspace(0, 2, 3); cfg.e = linspace(0, 2, 3); break;
      default: cfg.sizes = {8}; cfg.h = {1.0, 8.0}; cfg.samples = 4; cfg.eigenstates_per_sample = 3; break;
    }
    cfgs.push_back(cfg);
  }
  const auto root = fs::temp_directory_path() / ("gge_acceptance_" + std::to_string(::getpid()));
  std::size_t files = 0, mismatches = 0;
  for (const auto& cfg : cfgs) {
    const auto a = root / cfg.name / "a", b = root / cfg.name / "b";
    gge::run_to_directory(cfg, {a, 1, false});
    gge::run_to_directory(cfg, {b, 0, false});
    for (const auto& entry : fs::directory_iterator(a)) {
      ++files;
      if (slurp(entry.path()) != slurp(b / entry.path().filename())) ++mismatches;
    }
  }
  fs::remove_all(root);
  return {mismatches == 0 && files > 0,
          fmt("%zu output files across %zu experiments, %zu differ between reruns", files, cfgs.size(), mismatches)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "single-cut oracle", 5, single_cut_oracle},
      {2, "hierarchy", 30, hierarchy},
      {3, "AKLT detection", 600, aklt_detection},
      {4, "Majumdar-Ghosh", 300, majumdar_ghosh},
      {5, "Haldane phase ordering", 1800, haldane_ordering},
      {6, "MBL transition shape", 1800, mbl_shape},
      {7, "cross-solver consistency", 120, cross_solver},
      {8, "determinism", 0, determinism},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s <= 0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s  %d %s: %s [%.1f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.budget_s > 0 ? fmt(", budget %.0f s", c.budget_s).c_str() : "");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
