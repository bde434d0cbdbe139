// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lexmatch/bp.hpp"
#include "lexmatch/exact.hpp"
#include "lexmatch/harness.hpp"
#include "lexmatch/rde.hpp"
#include "oracles.hpp"

using namespace lexmatch;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double time_limit;  // seconds; 0 when only "seconds" is asked for
  std::function<Outcome()> run;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

const double kGamma = oracle::poisson_gamma(1);

double metric(const ResultRecord& r, const std::string& name) {
  const Metric* m = r.find(name);
  if (!m) throw std::runtime_error("missing metric " + name);
  return m->estimate;
}

double tv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / 2;
}

Outcome oracle_equivalence() {
  int mismatches = 0;
  double worst = 0;
  const int forests = 1000;
  for (int i = 0; i < forests; ++i) {
    WeightedGraph f = random_forest(OffspringLaw::poisson(2), WeightLaw::uniform(0, 1), 4, kBruteForceEdgeLimit, 3,
                                    {2024, static_cast<std::uint64_t>(i)});
    Matching bp = extract_matching(f, sweep_tree(f, 1));
    Matching bf = brute_force_opt(f);
    worst = std::max(worst, std::abs(bp.weight - bf.weight));
    mismatches += !(bp.edges == bf.edges) || std::abs(bp.weight - bf.weight) >= 1e-9;
  }
  return {mismatches == 0, num(forests) + " forests, " + num(mismatches) + " mismatches, max weight gap " + num(worst)};
}

Outcome karp_sipser_size() {
  ExperimentConfig cfg("size");
  cfg.set("law", "poisson:1");
  cfg.set("n", "20000");
  cfg.set("replicas", "20");
  ResultRecord r = run_size(cfg);
  const double reference = 2 - 2 * 0.567143 - 0.567143 * 0.567143;
  double est = metric(r, "matched_vertex_fraction");
  bool ok = std::abs(est - reference) <= 0.01 && std::abs(kGamma - 0.567143) < 1e-6;
  return {ok, "matched fraction " + num(est) + " vs " + num(reference) + " +- 0.01"};
}

Outcome subcriticality() {
  double r1 = subcriticality_coefficient(OffspringLaw::poisson(1));
  double r2 = subcriticality_coefficient(OffspringLaw::poisson(2));
  double re = subcriticality_coefficient(OffspringLaw::poisson(std::exp(1.0)));
  bool ok = std::abs(r1 - std::exp(-1.0)) < 1e-6 && std::abs(r2 - 2 * std::exp(-1.0)) < 1e-6 && std::abs(re - 1) < 1e-3;
  return {ok, "rho " + num(r1) + ", " + num(r2) + ", " + num(re)};
}

Outcome correlation_decay() {
  ExperimentConfig cfg("decay");
  cfg.set("law", "poisson:1");
  cfg.set("hmin", "2");
  cfg.set("hmax", "12");
  cfg.set("samples", "10000");
  ResultRecord r = run_decay(cfg);
  bool monotone = metric(r, "monotone_non_increasing") == 1;
  double slope = metric(r, "log_slope");
  return {monotone && slope <= -0.9, std::string("monotone ") + (monotone ? "yes" : "no") + ", fitted log-slope " +
                                          num(slope) + " (needs <= -0.9), H=12 fraction " + num(metric(r, "uncertified_H12"))};
}

Outcome mandatory_blocking_densities() {
  ExperimentConfig cfg("mandatory");
  cfg.set("law", "poisson:1");
  cfg.set("depth", "12");
  cfg.set("samples", "10000");
  cfg.set("forests", "1000");
  ResultRecord r = run_mandatory(cfg);
  double mand = metric(r, "mandatory_density"), block = metric(r, "blocking_density");
  double disagreements = metric(r, "forest_disagreements");
  bool ok = std::abs(mand - 0.3217) <= 0.02 && std::abs(block - 0.1874) <= 0.02 && disagreements == 0 &&
            metric(r, "forest_certified_edges") > 0;
  return {ok, "mandatory " + num(mand) + " (0.3217), blocking " + num(block) + " (0.1874), forest disagreements " +
                  num(disagreements) + " of " + num(metric(r, "forest_certified_edges")) + " certified edges"};
}

Outcome solver_identities() {
  auto law = OffspringLaw::poisson(1);
  SolveOptions opt;
  opt.grid = default_grid(WeightLaw::uniform(0, 1));
  opt.grid.points = 4096;
  CdfSystem sys = solve_system(law, WeightLaw::uniform(0, 1), 1, opt);
  double plateau = sys.plateau.at(0);
  double cons = conservation_check(sys, law).max_abs;
  double size = size_from_system(sys, law), formula = size_from_plateau(sys, law);
  bool ok = std::abs(plateau - kGamma) < 1e-4 && cons < 2e-3 && std::abs(size - 0.544062) < 2e-3 &&
            std::abs(size - formula) < 2e-3;
  return {ok, "plateau " + num(plateau) + ", conservation " + num(cons) + ", size " + num(size) + " / " + num(formula)};
}

Outcome stationarity() {
  auto law = OffspringLaw::poisson(1);
  auto w = WeightLaw::uniform(0, 1);
  SolveOptions opt;
  opt.grid = default_grid(w);
  CdfSystem sys = solve_system(law, w, 1, opt);
  ZetaSampler z = zeta_prime(sys);
  Rng rng(77, 0);
  const int draws = 100000;
  std::vector<double> pushed(2, 0);
  for (int i = 0; i < draws; ++i) pushed[recursion_step(law, w, 1, z, rng).level] += 1.0 / draws;
  double step_tv = tv(pushed, z.level_masses());
  ZetaSampler pool = population_dynamics(law, w, 1, 10000, 1000000, {78, 0});
  double pool_tv = tv(pool.level_masses(), z.level_masses());
  return {step_tv < 0.02 && pool_tv < 0.02, "one-step TV " + num(step_tv) + ", population vs grid TV " + num(pool_tv)};
}

Outcome eps_renormalisation() {
  ExperimentConfig cfg("eps-sweep");
  cfg.set("trees", "500");
  cfg.set("eps_exp_max", "12");
  ResultRecord r = run_eps_sweep(cfg);
  double below = metric(r, "disagreements_below_gap"), last = metric(r, "final_disagreement");
  return {below == 0 && last == 0, "disagreements below gap " + num(below) + ", disagreement at 2^-12 " + num(last)};
}

Outcome separation() {
  ExperimentConfig cfg("separation");
  cfg.set("p", "1");
  cfg.set("samples", "10000");
  cfg.set("weights", "uniform:0:1;exp:1");
  ResultRecord r = run_separation(cfg);
  double wu = metric(r, "weighted_root_matched[uniform:0:1]"), we = metric(r, "weighted_root_matched[exp:1]");
  double uni = metric(r, "uniform_root_matched");
  bool ok = std::abs(wu - 0.75) <= 0.02 && std::abs(we - 0.75) <= 0.02 && std::abs(uni - 2.0 / 3) <= 0.02 &&
            std::abs(wu - we) <= 0.02;
  return {ok, "weighted " + num(wu) + " / " + num(we) + " (0.75), uniform " + num(uni) + " (0.6667)"};
}

Outcome structural_suite() {
  ResultRecord r = run_check(ExperimentConfig("check"));
  int failing = 0;
  for (const Metric& m : r.metrics) failing += !m.passed;
  return {r.passed(), num(r.metrics.size()) + " properties, " + num(failing) + " with violations"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "bp matching equals the brute-force optimum", 60, oracle_equivalence},
      {2, "leaf-removal matching size on ER(20000, 1)", 120, karp_sipser_size},
      {3, "subcriticality coefficient for Poisson laws", 0, subcriticality},
      {4, "correlation decay of root messages", 300, correlation_decay},
      {5, "mandatory and blocking edge densities", 300, mandatory_blocking_densities},
      {6, "level system identities on a 4096-point grid", 120, solver_identities},
      {7, "stationarity of the solved message law", 0, stationarity},
      {8, "1 + eps w matchings converge to the optimum", 0, eps_renormalisation},
      {9, "star-of-stars separation", 0, separation},
      {10, "structural property suite", 0, structural_suite},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool in_time = c.time_limit == 0 || secs < c.time_limit;
    bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("criterion %2d %s  %s: %s [%.2f s%s]\n", c.id, pass ? "PASS" : "FAIL", c.title, o.detail.c_str(), secs,
                in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
