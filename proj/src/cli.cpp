#include "lexmatch/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "lexmatch/bp.hpp"
#include "lexmatch/harness.hpp"
#include "lexmatch/text.hpp"

namespace lexmatch {

namespace {

struct Key {
  const char* name;
  const char* help;
};

const std::map<std::string, std::vector<Key>>& experiment_keys() {
  static const std::map<std::string, std::vector<Key>> keys = {
      {"gen",
       {{"kind", "er | config | ubgw"},
        {"law", "offspring law, e.g. poisson:1, geom:0.5, binom:3:0.5, pmf:0.2,0.5,0.3"},
        {"weights", "weight law: uniform:a:b, exp:rate, const:v"},
        {"n", "vertex count (er, config)"},
        {"depth", "truncation depth (ubgw)"},
        {"rooting", "vertex | edge (ubgw)"}}},
      {"match", {{"graph", "graph file"}, {"k", "number of levels (default 1)"}}},
      {"solve",
       {{"law", "offspring law"},
        {"weights", "weight law"},
        {"k", "number of levels (default from the law)"},
        {"eps", "solve the scalar equation with weights 1 + eps w instead"},
        {"T", "grid half-width"},
        {"points", "grid points (even)"},
        {"tol", "sup-norm tolerance"},
        {"max_iter", "iteration cap"},
        {"damping", "weight of the new iterate"}}},
      {"size",
       {{"law", "offspring law"},
        {"graph", "er | config"},
        {"n", "vertex count"},
        {"replicas", "certified replicas"},
        {"max_attempts", "replica attempts before refusing"},
        {"tol", "tolerance"}}},
      {"decay",
       {{"law", "offspring law"},
        {"weights", "weight law"},
        {"hmin", "first depth of the slope fit"},
        {"hmax", "last depth"},
        {"samples", "trees per depth"}}},
      {"mandatory",
       {{"law", "offspring law"},
        {"depth", "tree depth"},
        {"samples", "trees"},
        {"forests", "small forests for the exact cross-check"},
        {"tol", "tolerance"}}},
      {"separation",
       {{"p", "star-of-stars branching"},
        {"samples", "samples per weight law"},
        {"weights", "weight laws separated by ';'"},
        {"law", "offspring law used for the event probability"},
        {"tol", "tolerance"}}},
      {"eps-sweep",
       {{"law", "offspring law"},
        {"weights", "weight law"},
        {"trees", "tree count"},
        {"depth", "maximal tree depth"},
        {"eps_exp_min", "largest eps is 2^-eps_exp_min"},
        {"eps_exp_max", "smallest eps is 2^-eps_exp_max"}}},
      {"check", {{"instances", "random instances per property"}}},
  };
  return keys;
}

void write_record(const ResultRecord& r, const std::string& format, const std::string& out_dir, std::ostream& out) {
  std::ostringstream body;
  if (format == "json")
    write_result_json(body, r);
  else
    write_result_csv(body, r);
  out << body.str();
  if (!out_dir.empty()) {
    std::ofstream f(std::filesystem::path(out_dir) / (r.experiment + "." + format));
    if (!f) throw std::runtime_error("cannot write to " + out_dir);
    f << body.str();
  }
}

std::ofstream open_in(const std::string& dir, const std::string& name) {
  std::ofstream f(std::filesystem::path(dir) / name);
  if (!f) throw std::runtime_error("cannot write to " + dir);
  return f;
}

int run_gen(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& out) {
  std::string kind = cfg.get("kind", "er");
  OffspringLaw law = cfg.law();
  RngSeed seed{cfg.seed(), 0};
  WeightedGraph g;
  if (kind == "er") {
    if (law.family() != OffspringLaw::Family::Poisson) throw std::invalid_argument("er graphs need a poisson law");
    g = erdos_renyi(static_cast<int>(cfg.get_int("n", 1000)), law.param(), seed.child(0));
  } else if (kind == "config") {
    Rng rng(seed.child(0));
    std::vector<int> degrees(cfg.get_int("n", 1000));
    for (int& d : degrees) d = law.sample(rng);
    g = configuration_model(std::move(degrees), seed.child(1));
  } else if (kind == "ubgw") {
    std::string rooting = cfg.get("rooting", "vertex");
    if (rooting != "vertex" && rooting != "edge") throw std::invalid_argument("rooting must be vertex or edge");
    g = ubgw_tree(law, rooting == "edge" ? Rooting::Edge : Rooting::Vertex, static_cast<int>(cfg.get_int("depth", 6)),
                  seed.child(0));
  } else {
    throw std::invalid_argument("kind must be er, config or ubgw");
  }
  g = assign_weights(g, cfg.weights(), seed.child(2));
  if (out_dir.empty()) {
    write_graph(out, g);
  } else {
    auto f = open_in(out_dir, "graph.txt");
    write_graph(f, g);
    out << "wrote " << (std::filesystem::path(out_dir) / "graph.txt").string() << " n=" << g.n() << " m=" << g.m() << "\n";
  }
  return 0;
}

int run_match(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& out) {
  if (!cfg.has("graph")) throw std::invalid_argument("match needs --graph");
  std::ifstream in(cfg.get("graph", ""));
  if (!in) throw std::runtime_error("cannot open graph file " + cfg.get("graph", ""));
  WeightedGraph g = read_graph(in);
  int k = static_cast<int>(cfg.get_int("k", 1));
  Matching m;
  std::string method;
  if (g.is_forest()) {
    m = extract_matching(g, sweep_tree(g, k));
    method = "message-passing";
  } else if (g.m() <= kBruteForceEdgeLimit) {
    m = brute_force_opt(g);
    method = "brute-force";
  } else {
    LeafRemoval lr = leaf_removal(g, RngSeed{cfg.seed(), 0});
    m = lr.matching;
    method = lr.certified_maximum ? "leaf-removal (certified maximum size)" : "leaf-removal (uncertified)";
  }
  Perf pv = perf_vertex(g, m), pe = perf_edge(g, m);
  std::ostringstream perf;
  perf << "# method " << method << "\n# perf_vertex " << text::exact(pv.match_prob) << " "
       << text::exact(pv.expected_weight) << "\n# perf_edge " << text::exact(pe.match_prob) << " "
       << text::exact(pe.expected_weight) << "\n";
  if (out_dir.empty()) {
    write_matching(out, m);
  } else {
    auto f = open_in(out_dir, "matching.txt");
    write_matching(f, m);
  }
  out << perf.str();
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"optimal matchings on trees and sparse random graphs", "lexmatch"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir, format = "csv";
  std::uint64_t seed = 1;
  app.add_option("--config", config_path, "key=value config file");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  std::map<std::string, std::map<std::string, std::string>> given;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, keys] : experiment_keys()) {
    CLI::App* sub = app.add_subcommand(name, "");
    subs[name] = sub;
    for (const Key& key : keys) sub->add_option("--" + std::string(key.name), given[name][key.name], key.help);
  }
  subs["gen"]->description("generate a random graph or tree");
  subs["match"]->description("optimal matching of a graph file");
  subs["solve"]->description("solve the level system for the message law");
  subs["size"]->description("matched-vertex fraction on random graphs");
  subs["decay"]->description("certification decay on truncated trees");
  subs["mandatory"]->description("mandatory and blocking edge densities");
  subs["separation"]->description("weighted versus uniform optimum on the star of stars");
  subs["eps-sweep"]->description("scalar recursion with weights 1 + eps w");
  subs["check"]->description("randomised structural invariant suite");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    std::string name = app.get_subcommands().front()->get_name();
    ExperimentConfig cfg(name);
    if (!config_path.empty()) {
      cfg = ExperimentConfig::load(config_path);
      if (!cfg.experiment().empty() && cfg.experiment() != name)
        throw std::invalid_argument("config file is for '" + cfg.experiment() + "', not '" + name + "'");
      cfg.set_experiment(name);
      for (const auto& [key, value] : cfg.values()) {
        bool known = key == "seed";
        for (const Key& k : experiment_keys().at(name)) known = known || key == k.name;
        if (!known) throw std::invalid_argument("unknown config key '" + key + "' for " + name);
      }
    }
    for (const Key& key : experiment_keys().at(name))
      if (subs[name]->count("--" + std::string(key.name))) cfg.set(key.name, given[name][key.name]);
    if (seed_opt->count()) cfg.set("seed", std::to_string(seed));
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    if (name == "gen") return run_gen(cfg, out_dir, out);
    if (name == "match") return run_match(cfg, out_dir, out);

    ResultRecord record;
    if (name == "solve") {
      CdfSystem sys;
      record = run_solve(cfg, &sys);
      if (!out_dir.empty()) {
        auto f = open_in(out_dir, "cdf.csv");
        write_csv(f, sys);
      }
    } else if (name == "size") {
      record = run_size(cfg);
    } else if (name == "decay") {
      record = run_decay(cfg);
    } else if (name == "mandatory") {
      record = run_mandatory(cfg);
    } else if (name == "separation") {
      record = run_separation(cfg);
    } else if (name == "eps-sweep") {
      record = run_eps_sweep(cfg);
    } else {
      record = run_check(cfg);
    }
    write_record(record, format, out_dir, out);
    return record.passed() ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lexmatch
