#include "lexmatch/exact.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lexmatch/text.hpp"

namespace lexmatch {

Matching make_matching(const WeightedGraph& g, std::vector<int> edge_ids) {
  std::sort(edge_ids.begin(), edge_ids.end());
  std::vector<char> used(g.n(), 0);
  Matching m;
  for (int e : edge_ids) {
    if (e < 0 || e >= g.m()) throw std::invalid_argument("edge index out of range");
    const Edge& ed = g.edge(e);
    if (used[ed.u] || used[ed.v]) throw std::invalid_argument("edges share a vertex: not a matching");
    used[ed.u] = used[ed.v] = 1;
    m.edges.emplace_back(ed.u, ed.v);
    m.weight += ed.w;
  }
  m.size = static_cast<int>(m.edges.size());
  return m;
}

std::vector<int> matching_edge_ids(const WeightedGraph& g, const Matching& m) {
  std::vector<int> ids;
  ids.reserve(m.edges.size());
  for (auto [a, b] : m.edges) {
    auto e = g.edge_index(a, b);
    if (!e) throw std::invalid_argument("matching edge not in graph");
    ids.push_back(*e);
  }
  return ids;
}

void validate_matching(const WeightedGraph& g, const Matching& m) {
  Matching rebuilt = make_matching(g, matching_edge_ids(g, m));
  if (rebuilt.size != m.size || static_cast<int>(m.edges.size()) != m.size)
    throw std::invalid_argument("matching size field inconsistent");
  if (std::abs(rebuilt.weight - m.weight) > 1e-12 * std::max(1.0, std::abs(m.weight)))
    throw std::invalid_argument("matching weight field inconsistent");
}

Perf perf_vertex(const WeightedGraph& g, const Matching& m) {
  validate_matching(g, m);
  return {2.0 * m.size / g.n(), 2.0 * m.weight / g.n()};
}

Perf perf_edge(const WeightedGraph& g, const Matching& m) {
  validate_matching(g, m);
  if (g.m() == 0) return {0, 0};
  return {static_cast<double>(m.size) / g.m(), m.weight / g.m()};
}

const char* to_string(EdgeState s) {
  switch (s) {
    case EdgeState::Mandatory:
      return "mandatory";
    case EdgeState::Blocking:
      return "blocking";
    case EdgeState::Free:
      return "free";
    case EdgeState::Unknown:
      return "unknown";
  }
  return "?";
}

Matching brute_force_opt(const WeightedGraph& g) {
  if (g.m() > kBruteForceEdgeLimit)
    throw std::length_error("brute_force_opt limited to " + std::to_string(kBruteForceEdgeLimit) + " edges");
  std::vector<int> best;
  double best_weight = 0;
  for_each_matching(g, [&](const std::vector<int>& ids) {
    if (ids.size() < best.size()) return;
    double w = 0;
    for (int e : ids) w += g.weight(e);
    bool take = ids.size() > best.size() || w > best_weight + 1e-12 ||
                (std::abs(w - best_weight) <= 1e-12 && ids < best);
    if (take) {
      best = ids;
      best_weight = w;
    }
  });
  return make_matching(g, best);
}

namespace {

struct Rooted {
  std::vector<VertexId> order;  // BFS order, components one after another
  std::vector<VertexId> parent;
  std::vector<int> parent_edge;
};

Rooted root_forest(const WeightedGraph& g) {
  if (!g.is_forest()) throw std::invalid_argument("graph has a cycle");
  Rooted r;
  r.parent.assign(g.n(), -2);
  r.parent_edge.assign(g.n(), -1);
  r.order.reserve(g.n());
  for (VertexId s = 0; s < g.n(); ++s) {
    if (r.parent[s] != -2) continue;
    r.parent[s] = -1;
    std::size_t head = r.order.size();
    r.order.push_back(s);
    for (; head < r.order.size(); ++head) {
      VertexId v = r.order[head];
      for (const auto& inc : g.neighbors(v)) {
        if (inc.to == r.parent[v] && inc.edge == r.parent_edge[v]) continue;
        r.parent[inc.to] = v;
        r.parent_edge[inc.to] = inc.edge;
        r.order.push_back(inc.to);
      }
    }
  }
  return r;
}

bool better(const SubtreeValue& a, const SubtreeValue& b, Objective obj) {
  if (obj == Objective::Lexicographic && a.size != b.size) return a.size > b.size;
  return a.weight > b.weight;
}

SubtreeValue plus(SubtreeValue a, const SubtreeValue& b) { return {a.size + b.size, a.weight + b.weight}; }
SubtreeValue minus(SubtreeValue a, const SubtreeValue& b) { return {a.size - b.size, a.weight - b.weight}; }

}  // namespace

TreeOpt tree_opt_dp(const WeightedGraph& forest, Objective objective) {
  Rooted r = root_forest(forest);
  const int n = forest.n();
  TreeOpt out;
  out.free_value.assign(n, {});
  out.best_value.assign(n, {});
  std::vector<VertexId> choice(n, -1);

  for (auto it = r.order.rbegin(); it != r.order.rend(); ++it) {
    VertexId v = *it;
    SubtreeValue free_v;
    for (const auto& inc : forest.neighbors(v))
      if (r.parent[inc.to] == v && r.parent_edge[inc.to] == inc.edge) free_v = plus(free_v, out.best_value[inc.to]);
    SubtreeValue best_v = free_v;
    for (const auto& inc : forest.neighbors(v)) {
      VertexId c = inc.to;
      if (r.parent[c] != v || r.parent_edge[c] != inc.edge) continue;
      SubtreeValue cand = plus(minus(free_v, out.best_value[c]), out.free_value[c]);
      cand = plus(cand, {1, forest.weight(inc.edge)});
      if (better(cand, best_v, objective)) {
        best_v = cand;
        choice[v] = c;
      }
    }
    out.free_value[v] = free_v;
    out.best_value[v] = best_v;
  }

  // Walk down: a vertex is "free" when its parent took it.
  std::vector<char> taken(n, 0);
  std::vector<int> ids;
  for (VertexId v : r.order) {
    if (taken[v] || choice[v] < 0) continue;
    VertexId c = choice[v];
    taken[c] = 1;
    ids.push_back(r.parent_edge[c]);
  }
  out.matching = make_matching(forest, ids);
  return out;
}

double marginal_gain(const WeightedGraph& forest, VertexId u, VertexId v) {
  auto banned = forest.edge_index(u, v);
  if (!banned) throw std::invalid_argument("marginal_gain needs an edge");
  if (!forest.is_forest()) throw std::invalid_argument("graph has a cycle");
  // Rooted weight-only DP on the side of v.
  std::vector<VertexId> order{v}, parent(forest.n(), -1);
  parent[v] = u;
  for (std::size_t head = 0; head < order.size(); ++head) {
    VertexId x = order[head];
    for (const auto& inc : forest.neighbors(x)) {
      if (inc.to == parent[x]) continue;
      parent[inc.to] = x;
      order.push_back(inc.to);
    }
  }
  std::vector<double> free_w(forest.n(), 0), best_w(forest.n(), 0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VertexId x = *it;
    double f = 0;
    for (const auto& inc : forest.neighbors(x))
      if (inc.to != parent[x]) f += best_w[inc.to];
    double b = f;
    for (const auto& inc : forest.neighbors(x))
      if (inc.to != parent[x]) b = std::max(b, f - best_w[inc.to] + free_w[inc.to] + forest.weight(inc.edge));
    free_w[x] = f;
    best_w[x] = b;
  }
  return best_w[v] - free_w[v];
}

LeafRemoval leaf_removal(const WeightedGraph& g, RngSeed seed) {
  const int n = g.n();
  std::vector<int> deg(n);
  std::vector<char> alive(n, 1);
  std::vector<VertexId> leaves;
  for (VertexId v = 0; v < n; ++v) {
    deg[v] = g.degree(v);
    if (deg[v] == 1) leaves.push_back(v);
  }
  std::vector<int> live_edges(g.m());
  for (int e = 0; e < g.m(); ++e) live_edges[e] = e;

  std::vector<int> ids;
  auto kill = [&](VertexId x) {
    alive[x] = 0;
    for (const auto& inc : g.neighbors(x)) {
      if (!alive[inc.to]) continue;
      if (--deg[inc.to] == 1) leaves.push_back(inc.to);
    }
  };
  auto take = [&](int e) {
    ids.push_back(e);
    kill(g.edge(e).u);
    kill(g.edge(e).v);
  };

  LeafRemoval out;
  Rng rng(seed);
  while (true) {
    while (!leaves.empty()) {
      VertexId u = leaves.back();
      leaves.pop_back();
      if (!alive[u] || deg[u] != 1) continue;
      for (const auto& inc : g.neighbors(u)) {
        if (alive[inc.to]) {
          take(inc.edge);
          break;
        }
      }
    }
    // Uniform pick among the remaining edges, discarding dead ones lazily.
    int pick = -1;
    while (!live_edges.empty()) {
      std::size_t i = rng.below(live_edges.size());
      int e = live_edges[i];
      if (alive[g.edge(e).u] && alive[g.edge(e).v]) {
        pick = e;
        break;
      }
      live_edges[i] = live_edges.back();
      live_edges.pop_back();
    }
    if (pick < 0) break;
    if (out.exact) {
      out.exact = false;
      // A core made of disjoint cycles is still solved exactly: matching any
      // cycle edge leaves a path, which the leaf rule finishes optimally.
      for (VertexId v = 0; v < n; ++v) {
        if (!alive[v] || deg[v] == 0) continue;
        ++out.removed_core_size;
        out.certified_maximum = out.certified_maximum && deg[v] == 2;
      }
    } else if (out.certified_maximum) {
      for (VertexId v = 0; v < n && out.certified_maximum; ++v)
        out.certified_maximum = !alive[v] || deg[v] == 0 || deg[v] == 2;
    }
    take(pick);
  }
  out.matching = make_matching(g, ids);
  return out;
}

EdgeClass mandatory_blocking(const WeightedGraph& g) {
  if (g.m() > kEnumerationEdgeLimit)
    throw std::length_error("mandatory_blocking limited to " + std::to_string(kEnumerationEdgeLimit) + " edges");
  std::size_t best = 0;
  long long count = 0;
  std::vector<long long> hits(g.m(), 0);
  for_each_matching(g, [&](const std::vector<int>& ids) {
    if (ids.size() < best) return;
    if (ids.size() > best) {
      best = ids.size();
      count = 0;
      std::fill(hits.begin(), hits.end(), 0);
    }
    ++count;
    for (int e : ids) ++hits[e];
  });
  EdgeClass cls(g.m());
  for (int e = 0; e < g.m(); ++e)
    cls[e] = hits[e] == count ? EdgeState::Mandatory : hits[e] == 0 ? EdgeState::Blocking : EdgeState::Free;
  return cls;
}

Matching uniform_max_matching(const WeightedGraph& g, RngSeed seed) {
  if (g.m() > kEnumerationEdgeLimit)
    throw std::length_error("uniform_max_matching limited to " + std::to_string(kEnumerationEdgeLimit) + " edges");
  Rng rng(seed);
  std::vector<int> pick;
  std::size_t best = 0;
  std::uint64_t count = 0;
  for_each_matching(g, [&](const std::vector<int>& ids) {
    if (ids.size() < best) return;
    if (ids.size() > best) {
      best = ids.size();
      count = 0;
    }
    // Reservoir sampling over the maximum matchings seen so far.
    if (rng.below(++count) == 0) pick = ids;
  });
  return make_matching(g, pick);
}

std::vector<double> best_weight_by_size(const WeightedGraph& g) {
  if (g.m() > kBruteForceEdgeLimit)
    throw std::length_error("best_weight_by_size limited to " + std::to_string(kBruteForceEdgeLimit) + " edges");
  std::vector<double> best(1, 0.0);
  for_each_matching(g, [&](const std::vector<int>& ids) {
    if (ids.size() >= best.size()) best.resize(ids.size() + 1, -std::numeric_limits<double>::infinity());
    double w = 0;
    for (int e : ids) w += g.weight(e);
    best[ids.size()] = std::max(best[ids.size()], w);
  });
  return best;
}

double eps_gap_threshold(const WeightedGraph& g) {
  std::vector<double> best = best_weight_by_size(g);
  const int top = static_cast<int>(best.size()) - 1;
  double threshold = std::numeric_limits<double>::infinity();
  for (int s = 0; s < top; ++s)
    if (best[s] > best[top]) threshold = std::min(threshold, (top - s) / (best[s] - best[top]));
  return threshold;
}

void write_matching(std::ostream& os, const Matching& m) {
  os << "size=" << m.size << " weight=" << text::exact(m.weight) << "\n";
  for (auto [a, b] : m.edges) os << a << " " << b << "\n";
}

Matching read_matching(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("missing matching header");
  std::istringstream hs(header);
  std::string size_field, weight_field;
  hs >> size_field >> weight_field;
  if (size_field.rfind("size=", 0) != 0 || weight_field.rfind("weight=", 0) != 0)
    throw std::runtime_error("bad matching header");
  Matching m;
  m.size = static_cast<int>(text::to_int(size_field.substr(5), "size"));
  m.weight = text::to_double(weight_field.substr(7), "weight");
  std::string line;
  while (std::getline(is, line)) {
    if (text::trim(line).empty()) continue;
    std::istringstream ls(line);
    long long a, b;
    if (!(ls >> a >> b)) throw std::runtime_error("bad matching line '" + line + "'");
    m.edges.emplace_back(static_cast<VertexId>(std::min(a, b)), static_cast<VertexId>(std::max(a, b)));
  }
  std::sort(m.edges.begin(), m.edges.end());
  if (static_cast<int>(m.edges.size()) != m.size) throw std::runtime_error("matching size mismatch");
  return m;
}

}  // namespace lexmatch
