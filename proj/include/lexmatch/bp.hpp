#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "lexmatch/exact.hpp"
#include "lexmatch/graph.hpp"

namespace lexmatch {

// Two-level message: a macroscopic level in {0..k} (or Bottom, level -1) and
// a scalar refinement. Ordered lexicographically.
struct LexMsg {
  int level = 0;
  double z = 0;

  static LexMsg bottom() { return {-1, -std::numeric_limits<double>::infinity()}; }
  static LexMsg zero() { return {0, 0.0}; }
  static LexMsg top(int k) { return {k, std::numeric_limits<double>::infinity()}; }

  bool is_bottom() const { return level < 0; }

  friend bool operator<(const LexMsg& a, const LexMsg& b) {
    return a.level != b.level ? a.level < b.level : a.z < b.z;
  }
  friend bool operator>(const LexMsg& a, const LexMsg& b) { return b < a; }
  friend bool operator<=(const LexMsg& a, const LexMsg& b) { return !(b < a); }
  friend bool operator==(const LexMsg& a, const LexMsg& b) { return a.level == b.level && a.z == b.z; }
};

inline LexMsg lexmax(const LexMsg& a, const LexMsg& b) { return a < b ? b : a; }
inline LexMsg lexmin(const LexMsg& a, const LexMsg& b) { return b < a ? b : a; }

// (k, w) - m. A Top input (z = +inf) yields Bottom.
LexMsg offer(int k, double w, const LexMsg& m);
// Componentwise sum used by the edge decision rule.
LexMsg sum(const LexMsg& a, const LexMsg& b);

// Messages indexed by directed edge (see WeightedGraph::directed). Entries
// flagged `fixed` were imposed by a boundary condition rather than computed.
struct MessageField {
  int k = 1;
  std::vector<LexMsg> msg;
  std::vector<char> fixed;

  const LexMsg& at(const WeightedGraph& g, VertexId from, VertexId to) const { return msg[g.directed(from, to)]; }
};

// Exact messages on a forest by two passes.
MessageField sweep_tree(const WeightedGraph& forest, int k);

enum class BoundaryKind { Zero, Top, Sampled };

// Messages on a truncated tree whose boundary vertices see the given values
// on their incoming edges; `values` is aligned with ball.boundary().
MessageField sweep_bounded(const WeightedGraph& ball, int k, std::span<const LexMsg> values);
MessageField sweep_bounded(const WeightedGraph& ball, int k, BoundaryKind uniform_kind);

// Number of non-fixed directed edges whose value differs from a fresh
// evaluation of the recursion; zero for every field produced here.
std::size_t recursion_violations(const WeightedGraph& g, const MessageField& field);

// Edge rule: {u,v} matched iff msg(u,v) + msg(v,u) <lex (k, w(u,v)). Throws
// std::logic_error if the result is not a matching or disagrees with the
// vertex rule at a vertex whose incoming messages are all computed.
Matching extract_matching(const WeightedGraph& g, const MessageField& field);
// Vertex rule alone: each vertex picks the neighbour maximising (k,w)-msg if
// that beats (0,0). Returns the partner per vertex or -1.
std::vector<VertexId> vertex_rule_partners(const WeightedGraph& g, const MessageField& field);

// Per-vertex self-loop value; Bottom for isolated vertices.
std::vector<LexMsg> flexibility(const WeightedGraph& g, const MessageField& field);
inline bool flexibility_unmatched(const LexMsg& f) { return !(f > LexMsg::zero()); }

struct SqueezeEntry {
  LexMsg lower;
  LexMsg upper;
  bool certified = false;
};

// Brackets every directed message between the all-Zero and all-Top boundary
// fields; the bracket holds for any boundary condition.
std::vector<SqueezeEntry> squeeze(const WeightedGraph& ball, int k, int H);

enum class LevelBoundary { Zero, One };

// Weightless level recursion i(u,v) = max(0, max(1 - i(v,u'))) with the
// boundary fixed to 0 or 1. Only defined in the single-level regime k = 1.
std::vector<int> macroscopic_sweep(const WeightedGraph& ball, LevelBoundary boundary, int k = 1);

struct LevelSqueeze {
  std::vector<int> lower;
  std::vector<int> upper;
  std::vector<char> certified;
};

LevelSqueeze macroscopic_squeeze(const WeightedGraph& ball, int k = 1);

// Mandatory iff level sum < k, Blocking iff > k, Free iff = k; Unknown when
// either direction is uncertified.
EdgeClass classify_edges_from_levels(const WeightedGraph& ball, const LevelSqueeze& levels, int k = 1);

struct ScalarSweep {
  std::vector<double> msg;  // by directed edge
  Matching matching;
};

// One-dimensional recursion with weights 1 + eps w.
ScalarSweep scalar_sweep_eps(const WeightedGraph& forest, double eps);

// One line per directed edge: `u v level z`, Bottom as level -1.
void write_field(std::ostream& os, const WeightedGraph& g, const MessageField& field);

}  // namespace lexmatch
