#pragma once

#include <compare>
#include <iosfwd>
#include <utility>
#include <vector>

#include "lexmatch/graph.hpp"
#include "lexmatch/rng.hpp"

namespace lexmatch {

struct Matching {
  std::vector<std::pair<VertexId, VertexId>> edges;  // (u, v) with u < v, sorted
  int size = 0;
  double weight = 0;

  bool operator==(const Matching& o) const { return edges == o.edges; }
};

// Builds a matching from edge indices of g; throws if two edges share a vertex.
Matching make_matching(const WeightedGraph& g, std::vector<int> edge_ids);
// Throws std::invalid_argument unless m is a vertex-disjoint subset of g's edges.
void validate_matching(const WeightedGraph& g, const Matching& m);
std::vector<int> matching_edge_ids(const WeightedGraph& g, const Matching& m);

struct Perf {
  double match_prob = 0;
  double expected_weight = 0;

  auto operator<=>(const Perf&) const = default;
};

// Vertex-rooted: (matched vertices / n, 2 * matched weight / n).
Perf perf_vertex(const WeightedGraph& g, const Matching& m);
// Edge-rooted: probability a uniform directed edge is matched, and its
// expected weight contribution.
Perf perf_edge(const WeightedGraph& g, const Matching& m);

enum class EdgeState { Mandatory, Blocking, Free, Unknown };
using EdgeClass = std::vector<EdgeState>;
const char* to_string(EdgeState s);

constexpr int kBruteForceEdgeLimit = 26;
constexpr int kEnumerationEdgeLimit = 22;

// Calls visit(edge ids) once per matching of g (including the empty one), in
// a fixed order.
template <class Visit>
void for_each_matching(const WeightedGraph& g, Visit&& visit);

// Lexicographic optimum (size first, then weight) by exhaustive search.
Matching brute_force_opt(const WeightedGraph& g);

// Best (size, weight) pair of a subtree.
struct SubtreeValue {
  int size = 0;
  double weight = 0;
};

enum class Objective { Lexicographic, WeightOnly };

struct TreeOpt {
  Matching matching;
  // Per vertex, with each component rooted at its smallest vertex: best value
  // of the subtree with the vertex left unmatched inside it, and overall.
  std::vector<SubtreeValue> free_value;
  std::vector<SubtreeValue> best_value;
};

TreeOpt tree_opt_dp(const WeightedGraph& forest, Objective objective = Objective::Lexicographic);

// OPT(T_(u,v)) - OPT(T_(u,v) minus v) under the weight-only objective, where
// T_(u,v) is the component of v once the edge {u,v} is removed.
double marginal_gain(const WeightedGraph& forest, VertexId u, VertexId v);

struct LeafRemoval {
  Matching matching;
  // The leaf rule alone emptied the graph.
  bool exact = true;
  // The matching is provably maximum: either `exact`, or every time the leaf
  // rule got stuck the remainder was a union of disjoint cycles.
  bool certified_maximum = true;
  int removed_core_size = 0;  // vertices left when the leaf rule first got stuck
};

LeafRemoval leaf_removal(const WeightedGraph& g, RngSeed seed);

EdgeClass mandatory_blocking(const WeightedGraph& g);

Matching uniform_max_matching(const WeightedGraph& g, RngSeed seed);

// Largest matched weight among matchings of each size s = 0..max size.
std::vector<double> best_weight_by_size(const WeightedGraph& g);

// Sup of eps such that the maximum-weight matching for weights 1 + eps w is
// the lexicographic optimum (infinity when no smaller matching can win).
double eps_gap_threshold(const WeightedGraph& g);

void write_matching(std::ostream& os, const Matching& m);
Matching read_matching(std::istream& is);

// ---------------------------------------------------------------------------

template <class Visit>
void for_each_matching(const WeightedGraph& g, Visit&& visit) {
  std::vector<char> used(g.n(), 0);
  std::vector<int> chosen;
  chosen.reserve(g.n() / 2 + 1);
  const int m = g.m();
  auto rec = [&](auto&& self, int e) -> void {
    if (e == m) {
      visit(static_cast<const std::vector<int>&>(chosen));
      return;
    }
    const Edge& ed = g.edge(e);
    if (!used[ed.u] && !used[ed.v]) {
      used[ed.u] = used[ed.v] = 1;
      chosen.push_back(e);
      self(self, e + 1);
      chosen.pop_back();
      used[ed.u] = used[ed.v] = 0;
    }
    self(self, e + 1);
  };
  rec(rec, 0);
}

}  // namespace lexmatch
