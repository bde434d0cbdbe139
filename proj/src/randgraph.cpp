#include "lexmatch/randgraph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <stdexcept>

#include "lexmatch/text.hpp"

namespace lexmatch {

WeightLaw WeightLaw::uniform(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("uniform needs a < b");
  WeightLaw w;
  w.family_ = Family::Uniform;
  w.a_ = a;
  w.b_ = b;
  return w;
}

WeightLaw WeightLaw::exponential(double rate) {
  if (!(rate > 0) || !std::isfinite(rate)) throw std::invalid_argument("exponential rate must be positive");
  WeightLaw w;
  w.family_ = Family::Exponential;
  w.a_ = rate;
  w.b_ = 0;
  return w;
}

WeightLaw WeightLaw::constant(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("constant weight must be finite");
  WeightLaw w;
  w.family_ = Family::Constant;
  w.a_ = v;
  w.b_ = v;
  return w;
}

WeightLaw WeightLaw::parse(std::string_view spec) {
  auto parts = text::split(spec, ':');
  if (parts[0] == "uniform" && parts.size() == 3)
    return uniform(text::to_double(parts[1], "uniform low"), text::to_double(parts[2], "uniform high"));
  if (parts[0] == "exp" && parts.size() == 2) return exponential(text::to_double(parts[1], "exponential rate"));
  if (parts[0] == "const" && parts.size() == 2) return constant(text::to_double(parts[1], "constant weight"));
  throw std::invalid_argument("unknown weight law '" + std::string(spec) + "'");
}

std::string WeightLaw::spec() const {
  switch (family_) {
    case Family::Uniform:
      return "uniform:" + text::exact(a_) + ":" + text::exact(b_);
    case Family::Exponential:
      return "exp:" + text::exact(a_);
    case Family::Constant:
      return "const:" + text::exact(a_);
  }
  return {};
}

double WeightLaw::mean() const {
  switch (family_) {
    case Family::Uniform:
      return 0.5 * (a_ + b_);
    case Family::Exponential:
      return 1 / a_;
    case Family::Constant:
      return a_;
  }
  return 0;
}

double WeightLaw::cdf(double x) const {
  switch (family_) {
    case Family::Uniform:
      return std::clamp((x - a_) / (b_ - a_), 0.0, 1.0);
    case Family::Exponential:
      return x <= 0 ? 0 : -std::expm1(-a_ * x);
    case Family::Constant:
      return x >= a_ ? 1 : 0;
  }
  return 0;
}

double WeightLaw::sample(Rng& rng) const {
  switch (family_) {
    case Family::Uniform:
      return a_ + (b_ - a_) * rng.uniform();
    case Family::Exponential:
      return -std::log1p(-rng.uniform()) / a_;
    case Family::Constant:
      return a_;
  }
  return 0;
}

double WeightLaw::support_low() const { return family_ == Family::Exponential ? 0 : a_; }

double WeightLaw::support_high() const {
  return family_ == Family::Exponential ? 15 * std::log(10.0) / a_ : b_;
}

WeightedGraph erdos_renyi(int n, double c, RngSeed seed) {
  if (n < 1) throw std::invalid_argument("erdos_renyi needs n >= 1");
  if (!(c > 0) || (n > 1 && !(c < n))) throw std::invalid_argument("erdos_renyi needs 0 < c < n");
  Rng rng(seed);
  std::vector<Edge> edges;
  if (n > 1) {
    // Geometric skipping over the pairs (w, v), w < v.
    double p = c / n;
    double log_q = std::log1p(-p);
    edges.reserve(static_cast<std::size_t>(n * c / 2 * 1.1) + 16);
    long long v = 1, w = -1;
    while (v < n) {
      double r = rng.uniform();
      w += 1 + static_cast<long long>(std::floor(std::log1p(-r) / log_q));
      while (w >= v && v < n) {
        w -= v;
        ++v;
      }
      if (v < n) edges.push_back({static_cast<VertexId>(w), static_cast<VertexId>(v), 1.0});
    }
  }
  VertexId root = static_cast<VertexId>(rng.below(n));
  return WeightedGraph(n, std::move(edges), Root::vertex(root));
}

WeightedGraph configuration_model(std::vector<int> degrees, RngSeed seed) {
  if (degrees.empty()) throw std::invalid_argument("configuration_model needs at least one vertex");
  long long total = 0;
  for (int d : degrees) {
    if (d < 0) throw std::invalid_argument("negative degree");
    total += d;
  }
  if (total % 2) ++degrees.back();
  std::vector<VertexId> half;
  half.reserve(total + 1);
  for (std::size_t v = 0; v < degrees.size(); ++v)
    for (int i = 0; i < degrees[v]; ++i) half.push_back(static_cast<VertexId>(v));
  Rng rng(seed);
  std::shuffle(half.begin(), half.end(), rng.engine());
  std::vector<Edge> edges;
  edges.reserve(half.size() / 2);
  for (std::size_t i = 0; i + 1 < half.size(); i += 2) {
    VertexId a = half[i], b = half[i + 1];
    if (a == b) continue;
    edges.push_back({std::min(a, b), std::max(a, b), 1.0});
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& x, const Edge& y) { return x.u != y.u ? x.u < y.u : x.v < y.v; });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const Edge& x, const Edge& y) { return x.u == y.u && x.v == y.v; }),
              edges.end());
  int n = static_cast<int>(degrees.size());
  VertexId root = static_cast<VertexId>(rng.below(n));
  return WeightedGraph(n, std::move(edges), Root::vertex(root));
}

WeightedGraph ubgw_tree(const OffspringLaw& law, Rooting rooting, int depth, RngSeed seed) {
  if (depth < 0) throw std::invalid_argument("depth must be >= 0");
  constexpr std::size_t kMaxVertices = 50'000'000;
  Rng rng(seed);
  std::vector<int> level;
  std::vector<Edge> edges;
  std::vector<VertexId> boundary;
  std::deque<VertexId> queue;
  level.push_back(0);
  queue.push_back(0);
  if (rooting == Rooting::Edge) {
    level.push_back(0);
    queue.push_back(1);
    edges.push_back({0, 1, 1.0});
  }
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    if (level[v] == depth) {
      boundary.push_back(v);
      continue;
    }
    int children = (rooting == Rooting::Vertex && v == 0) ? law.sample(rng) : law.sample_size_biased(rng);
    for (int i = 0; i < children; ++i) {
      VertexId c = static_cast<VertexId>(level.size());
      level.push_back(level[v] + 1);
      edges.push_back({v, c, 1.0});
      queue.push_back(c);
    }
    if (level.size() > kMaxVertices) throw std::runtime_error("tree exceeds vertex budget");
  }
  Root root = rooting == Rooting::Vertex ? Root::vertex(0) : Root::edge(0, 1);
  return WeightedGraph(static_cast<int>(level.size()), std::move(edges), root, std::move(boundary));
}

WeightedGraph disjoint_union(const std::vector<WeightedGraph>& parts) {
  if (parts.empty()) return WeightedGraph();
  std::vector<Edge> edges;
  std::vector<VertexId> boundary;
  int offset = 0;
  for (const WeightedGraph& g : parts) {
    for (const Edge& e : g.edges()) edges.push_back({e.u + offset, e.v + offset, e.w});
    for (VertexId b : g.boundary()) boundary.push_back(b + offset);
    offset += g.n();
  }
  return WeightedGraph(offset, std::move(edges), parts.front().root(), std::move(boundary));
}

WeightedGraph assign_weights(const WeightedGraph& g, const WeightLaw& law, RngSeed seed) {
  Rng rng(seed);
  std::vector<double> w(g.m());
  for (double& x : w) x = law.sample(rng);
  return g.with_weights(w);
}

std::vector<int> distances(const WeightedGraph& g, const std::vector<VertexId>& sources) {
  std::vector<int> dist(g.n(), -1);
  std::deque<VertexId> queue;
  for (VertexId s : sources) {
    if (dist[s] < 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    for (const auto& inc : g.neighbors(v)) {
      if (dist[inc.to] < 0) {
        dist[inc.to] = dist[v] + 1;
        queue.push_back(inc.to);
      }
    }
  }
  return dist;
}

namespace {

WeightedGraph ball_around(const WeightedGraph& g, const std::vector<VertexId>& sources, int H, Root root) {
  if (H < 0) throw std::invalid_argument("ball radius must be >= 0");
  for (VertexId s : sources)
    if (s < 0 || s >= g.n()) throw std::invalid_argument("ball center outside the graph");
  std::vector<int> dist(g.n(), -1);
  std::vector<VertexId> order;
  for (VertexId s : sources) {
    if (dist[s] < 0) {
      dist[s] = 0;
      order.push_back(s);
    }
  }
  for (std::size_t head = 0; head < order.size(); ++head) {
    VertexId v = order[head];
    if (dist[v] == H) continue;
    for (const auto& inc : g.neighbors(v)) {
      if (dist[inc.to] < 0) {
        dist[inc.to] = dist[v] + 1;
        order.push_back(inc.to);
      }
    }
  }
  std::vector<VertexId> relabel(g.n(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) relabel[order[i]] = static_cast<VertexId>(i);
  std::vector<Edge> edges;
  std::vector<VertexId> boundary;
  for (VertexId v : order) {
    if (dist[v] == H) boundary.push_back(relabel[v]);
    for (const auto& inc : g.neighbors(v))
      if (relabel[inc.to] >= 0 && v < inc.to)
        edges.push_back({relabel[v], relabel[inc.to], g.weight(inc.edge)});
  }
  return WeightedGraph(static_cast<int>(order.size()), std::move(edges), root, std::move(boundary));
}

// Canonical string of a rooted unweighted tree.
std::string tree_code(const WeightedGraph& t, VertexId v, VertexId parent) {
  std::vector<std::string> kids;
  for (const auto& inc : t.neighbors(v))
    if (inc.to != parent) kids.push_back(tree_code(t, inc.to, v));
  std::sort(kids.begin(), kids.end());
  std::string out = "(";
  for (const auto& k : kids) out += k;
  return out + ")";
}

bool backtrack_isomorphic(const WeightedGraph& a, const WeightedGraph& b, bool compare_weights, double tol) {
  std::vector<int> da = distances(a, {0}), db = distances(b, {0});
  std::vector<VertexId> map(a.n(), -1), used(b.n(), 0);
  map[0] = 0;
  used[0] = 1;
  std::function<bool(VertexId)> place = [&](VertexId i) -> bool {
    if (i == a.n()) return true;
    for (VertexId j = 0; j < b.n(); ++j) {
      if (used[j] || db[j] != da[i] || b.degree(j) != a.degree(i)) continue;
      bool ok = true;
      for (const auto& inc : a.neighbors(i)) {
        if (inc.to >= i) continue;
        auto e = b.edge_index(j, map[inc.to]);
        if (!e || (compare_weights && std::abs(b.weight(*e) - a.weight(inc.edge)) > tol)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      map[i] = j;
      used[j] = 1;
      if (place(i + 1)) return true;
      used[j] = 0;
    }
    return false;
  };
  if (a.degree(0) != b.degree(0)) return false;
  return place(1);
}

}  // namespace

WeightedGraph ball(const WeightedGraph& g, VertexId center, int H) {
  return ball_around(g, {center}, H, Root::vertex(0));
}

WeightedGraph edge_ball(const WeightedGraph& g, VertexId tail, VertexId head, int H) {
  if (!g.edge_index(tail, head)) throw std::invalid_argument("edge_ball needs an edge");
  return ball_around(g, {tail, head}, H, Root::edge(0, 1));
}

bool ball_isomorphic(const WeightedGraph& g1, VertexId c1, const WeightedGraph& g2, VertexId c2, int H,
                     bool compare_weights, double weight_tol) {
  WeightedGraph a = ball(g1, c1, H), b = ball(g2, c2, H);
  if (a.n() != b.n() || a.m() != b.m()) return false;
  if (!compare_weights && a.m() == a.n() - 1 && b.m() == b.n() - 1)
    return tree_code(a, 0, -1) == tree_code(b, 0, -1);
  return backtrack_isomorphic(a, b, compare_weights, weight_tol);
}

}  // namespace lexmatch
