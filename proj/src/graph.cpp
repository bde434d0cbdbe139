#include "lexmatch/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lexmatch/text.hpp"

namespace lexmatch {

WeightedGraph::WeightedGraph(int n, std::vector<Edge> edges, Root root, std::vector<VertexId> boundary)
    : n_(n), edges_(std::move(edges)), root_(root), boundary_(std::move(boundary)) {
  if (n < 1) throw std::invalid_argument("graph needs at least one vertex");
  for (Edge& e : edges_) {
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.u < 0 || e.v >= n) throw std::invalid_argument("edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("self-loop in simple graph");
    if (!std::isfinite(e.w)) throw std::invalid_argument("non-finite edge weight");
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  for (std::size_t i = 1; i < edges_.size(); ++i)
    if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v)
      throw std::invalid_argument("multi-edge in simple graph");
  std::sort(boundary_.begin(), boundary_.end());
  boundary_.erase(std::unique(boundary_.begin(), boundary_.end()), boundary_.end());
  for (VertexId b : boundary_)
    if (b < 0 || b >= n) throw std::invalid_argument("boundary vertex out of range");
  build();
  if (root_.a < 0 || root_.a >= n) throw std::invalid_argument("root outside the graph");
  if (root_.kind == Root::Kind::DirectedEdge && !edge_index(root_.a, root_.b))
    throw std::invalid_argument("root edge not in the graph");
}

void WeightedGraph::build() {
  offset_.assign(n_ + 1, 0);
  for (const Edge& e : edges_) {
    ++offset_[e.u + 1];
    ++offset_[e.v + 1];
  }
  std::partial_sum(offset_.begin(), offset_.end(), offset_.begin());
  adj_.assign(2 * edges_.size(), {});
  std::vector<int> fill(offset_.begin(), offset_.end() - 1);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    adj_[fill[e.u]++] = {e.v, static_cast<std::int32_t>(i)};
    adj_[fill[e.v]++] = {e.u, static_cast<std::int32_t>(i)};
  }
  for (int v = 0; v < n_; ++v)
    std::sort(adj_.begin() + offset_[v], adj_.begin() + offset_[v + 1],
              [](const Incidence& a, const Incidence& b) { return a.to < b.to; });
  boundary_flag_.assign(boundary_.empty() ? 0 : n_, 0);
  for (VertexId b : boundary_) boundary_flag_[b] = 1;
}

std::optional<int> WeightedGraph::edge_index(VertexId a, VertexId b) const {
  if (a < 0 || a >= n_ || b < 0 || b >= n_) return std::nullopt;
  auto nb = neighbors(a);
  auto it = std::lower_bound(nb.begin(), nb.end(), b,
                             [](const Incidence& x, VertexId y) { return x.to < y; });
  if (it == nb.end() || it->to != b) return std::nullopt;
  return it->edge;
}

int WeightedGraph::directed(VertexId from, VertexId to) const {
  auto e = edge_index(from, to);
  if (!e) throw std::invalid_argument("no such edge");
  return 2 * *e + (from > to ? 1 : 0);
}

void WeightedGraph::set_labels(std::vector<int> labels) {
  if (!labels.empty() && labels.size() != edges_.size())
    throw std::invalid_argument("one label per edge expected");
  labels_ = std::move(labels);
}

WeightedGraph WeightedGraph::with_weights(const std::vector<double>& w) const {
  if (w.size() != edges_.size()) throw std::invalid_argument("one weight per edge expected");
  WeightedGraph g = *this;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i])) throw std::invalid_argument("non-finite edge weight");
    g.edges_[i].w = w[i];
  }
  return g;
}

WeightedGraph WeightedGraph::with_root(Root r) const {
  WeightedGraph g(n_, edges_, r, boundary_);
  g.labels_ = labels_;
  return g;
}

WeightedGraph WeightedGraph::with_boundary(std::vector<VertexId> boundary) const {
  WeightedGraph g(n_, edges_, root_, std::move(boundary));
  g.labels_ = labels_;
  return g;
}

int WeightedGraph::component_count() const {
  std::vector<int> parent(n_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int count = n_;
  for (const Edge& e : edges_) {
    int a = find(e.u), b = find(e.v);
    if (a != b) {
      parent[a] = b;
      --count;
    }
  }
  return count;
}

bool WeightedGraph::operator==(const WeightedGraph& o) const {
  if (n_ != o.n_ || !(root_ == o.root_) || boundary_ != o.boundary_ || labels_ != o.labels_) return false;
  if (edges_.size() != o.edges_.size()) return false;
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge &a = edges_[i], &b = o.edges_[i];
    if (a.u != b.u || a.v != b.v || a.w != b.w) return false;
  }
  return true;
}

void write_graph(std::ostream& os, const WeightedGraph& g) {
  os << "lexmatch-graph v1 n=" << g.n() << " m=" << g.m() << " root=";
  if (g.root().kind == Root::Kind::Vertex)
    os << "vertex:" << g.root().a;
  else
    os << "edge:" << g.root().a << "," << g.root().b;
  os << "\n";
  for (const Edge& e : g.edges()) os << e.u << " " << e.v << " " << text::exact(e.w) << "\n";
}

WeightedGraph read_graph(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("missing graph header");
  std::istringstream hs(header);
  std::string magic, version, field;
  hs >> magic >> version;
  if (magic != "lexmatch-graph" || version != "v1") throw std::runtime_error("not a lexmatch-graph v1 file");
  long long n = -1, m = -1;
  std::optional<Root> root;
  while (hs >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad header field '" + field + "'");
    std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "n") {
      n = text::to_int(value, "n");
    } else if (key == "m") {
      m = text::to_int(value, "m");
    } else if (key == "root") {
      if (value.rfind("vertex:", 0) == 0) {
        root = Root::vertex(static_cast<VertexId>(text::to_int(value.substr(7), "root vertex")));
      } else if (value.rfind("edge:", 0) == 0) {
        auto ends = text::split(value.substr(5), ',');
        if (ends.size() != 2) throw std::runtime_error("bad root edge");
        root = Root::edge(static_cast<VertexId>(text::to_int(ends[0], "root tail")),
                          static_cast<VertexId>(text::to_int(ends[1], "root head")));
      } else {
        throw std::runtime_error("bad root field");
      }
    } else {
      throw std::runtime_error("unknown header field '" + key + "'");
    }
  }
  if (n < 1 || m < 0 || !root) throw std::runtime_error("incomplete graph header");
  std::vector<Edge> edges;
  edges.reserve(m);
  std::string line;
  while (static_cast<long long>(edges.size()) < m && std::getline(is, line)) {
    if (text::trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string a, b, w;
    if (!(ls >> a >> b >> w)) throw std::runtime_error("bad edge line '" + line + "'");
    edges.push_back({static_cast<VertexId>(text::to_int(a, "edge endpoint")),
                     static_cast<VertexId>(text::to_int(b, "edge endpoint")), text::to_double(w, "weight")});
  }
  if (static_cast<long long>(edges.size()) != m) throw std::runtime_error("edge count mismatch");
  return WeightedGraph(static_cast<int>(n), std::move(edges), *root);
}

std::string to_text(const WeightedGraph& g) {
  std::ostringstream os;
  write_graph(os, g);
  return os.str();
}

WeightedGraph graph_from_text(const std::string& s) {
  std::istringstream is(s);
  return read_graph(is);
}

}  // namespace lexmatch
