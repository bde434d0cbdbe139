#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lexmatch {

using VertexId = std::int32_t;

struct Edge {
  VertexId u;  // u < v
  VertexId v;
  double w;
};

struct Root {
  enum class Kind { Vertex, DirectedEdge };
  Kind kind = Kind::Vertex;
  VertexId a = 0;  // the vertex, or the tail of the directed edge
  VertexId b = 0;  // head of the directed edge

  static Root vertex(VertexId v) { return {Kind::Vertex, v, v}; }
  static Root edge(VertexId from, VertexId to) { return {Kind::DirectedEdge, from, to}; }
  bool operator==(const Root&) const = default;
};

// Finite simple graph with real edge weights and a root. Edges are stored in
// canonical (u, v) order with u < v; edge indices refer to that order. Each
// edge e has two directed versions: 2e is u->v and 2e+1 is v->u.
//
// Truncated graphs (balls, depth-limited trees) also carry a boundary: the
// vertices at the truncation distance, whose outside neighbourhood is unknown.
class WeightedGraph {
 public:
  struct Incidence {
    VertexId to;
    std::int32_t edge;
  };

  WeightedGraph() : WeightedGraph(1, {}, Root::vertex(0)) {}
  WeightedGraph(int n, std::vector<Edge> edges, Root root, std::vector<VertexId> boundary = {});

  int n() const { return n_; }
  int m() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  double weight(int e) const { return edges_[e].w; }

  std::span<const Incidence> neighbors(VertexId v) const {
    return {adj_.data() + offset_[v], adj_.data() + offset_[v + 1]};
  }
  int degree(VertexId v) const { return offset_[v + 1] - offset_[v]; }

  std::optional<int> edge_index(VertexId a, VertexId b) const;

  // Directed edge helpers.
  static int directed(int e, bool reversed) { return 2 * e + (reversed ? 1 : 0); }
  int directed(VertexId from, VertexId to) const;
  VertexId tail(int d) const { return d % 2 ? edges_[d / 2].v : edges_[d / 2].u; }
  VertexId head(int d) const { return d % 2 ? edges_[d / 2].u : edges_[d / 2].v; }

  const Root& root() const { return root_; }
  const std::vector<VertexId>& boundary() const { return boundary_; }
  bool is_boundary(VertexId v) const { return !boundary_flag_.empty() && boundary_flag_[v]; }

  const std::vector<int>& labels() const { return labels_; }
  void set_labels(std::vector<int> labels);

  WeightedGraph with_weights(const std::vector<double>& w) const;
  WeightedGraph with_root(Root r) const;
  WeightedGraph with_boundary(std::vector<VertexId> boundary) const;

  int component_count() const;
  bool is_forest() const { return m() == n() - component_count(); }

  bool operator==(const WeightedGraph& o) const;

 private:
  void build();

  int n_ = 0;
  std::vector<Edge> edges_;
  Root root_;
  std::vector<VertexId> boundary_;
  std::vector<char> boundary_flag_;
  std::vector<int> labels_;
  std::vector<int> offset_;
  std::vector<Incidence> adj_;
};

// Edge-list text format, version 1.
void write_graph(std::ostream& os, const WeightedGraph& g);
WeightedGraph read_graph(std::istream& is);
std::string to_text(const WeightedGraph& g);
WeightedGraph graph_from_text(const std::string& s);

}  // namespace lexmatch
