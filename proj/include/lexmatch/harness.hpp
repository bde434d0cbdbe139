#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lexmatch/exact.hpp"
#include "lexmatch/genfn.hpp"
#include "lexmatch/graph.hpp"
#include "lexmatch/randgraph.hpp"
#include "lexmatch/rde.hpp"

namespace lexmatch {

// Flat key=value settings of one experiment. Values stay strings until an
// experiment asks for them with a type and a default.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;
  explicit ExperimentConfig(std::string experiment) : experiment_(std::move(experiment)) {}

  // One `key = value` per line; `#` starts a comment. Later keys win.
  static ExperimentConfig parse(std::istream& is);
  static ExperimentConfig load(const std::string& path);

  const std::string& experiment() const { return experiment_; }
  void set_experiment(std::string e) { experiment_ = std::move(e); }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t seed() const { return static_cast<std::uint64_t>(get_int("seed", 1)); }
  OffspringLaw law(const std::string& fallback = "poisson:1") const;
  WeightLaw weights(const std::string& fallback = "uniform:0:1") const;

 private:
  std::string experiment_;
  std::map<std::string, std::string> values_;
};

// One measured quantity and how it is judged.
struct Metric {
  enum class Check { None, Near, AtMost, AtLeast };

  std::string name;
  double estimate = 0;
  double se = 0;
  Check check = Check::None;
  double reference = 0;
  double tolerance = 0;
  std::string provenance;  // formula name and module behind the reference
  bool passed = true;

  static Metric info(std::string name, double estimate, double se = 0);
  // |estimate - reference| < max(tolerance, 3 se).
  static Metric near(std::string name, double estimate, double se, double reference, double tolerance,
                     std::string provenance);
  static Metric at_most(std::string name, double estimate, double bound, std::string provenance);
  static Metric at_least(std::string name, double estimate, double bound, std::string provenance);
  // Zero-violation count, judged exactly.
  static Metric count_zero(std::string name, double violations);
};

struct ResultRecord {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<Metric> metrics;
  std::vector<std::string> notes;

  bool passed() const;
  void param(const std::string& key, const std::string& value) { parameters.emplace_back(key, value); }
  void add(Metric m) { metrics.push_back(std::move(m)); }
  const Metric* find(const std::string& name) const;
};

void write_result_csv(std::ostream& os, const ResultRecord& r);
void write_result_json(std::ostream& os, const ResultRecord& r);

// Refused experiments (regime outside the experiment's scope, too few
// certified runs) throw this with a diagnostic.
class ExperimentRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Disjoint union of one to `max_parts` unimodular trees, each cut at a
// random depth in 1..max_depth, redrawn until it has at most `max_edges`
// edges, with weights from `wlaw`. The truncation boundaries are kept.
WeightedGraph random_forest(const OffspringLaw& law, const WeightLaw& wlaw, int max_depth, int max_edges,
                            int max_parts, RngSeed seed);

// Mean and standard error of the mean of replica values.
struct MeanSe {
  double mean = 0;
  double se = 0;
};
MeanSe mean_se(const std::vector<double>& xs);
// Least-squares slope of ys against xs.
double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

ResultRecord run_size(const ExperimentConfig& cfg);
ResultRecord run_decay(const ExperimentConfig& cfg);
ResultRecord run_mandatory(const ExperimentConfig& cfg);
ResultRecord run_separation(const ExperimentConfig& cfg);
ResultRecord run_eps_sweep(const ExperimentConfig& cfg);
// Solves the level system (or the eps equation when `eps` is set); the
// solved system is handed back through `solved` when non-null.
ResultRecord run_solve(const ExperimentConfig& cfg, CdfSystem* solved = nullptr);
// Randomised structural invariants of the message-passing and oracle layers.
ResultRecord run_check(const ExperimentConfig& cfg);

}  // namespace lexmatch
