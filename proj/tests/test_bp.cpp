#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "lexmatch/bp.hpp"
#include "lexmatch/exact.hpp"
#include "lexmatch/genfn.hpp"
#include "lexmatch/randgraph.hpp"
#include "oracles.hpp"

using namespace lexmatch;

namespace {

WeightedGraph path(std::vector<double> w) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < w.size(); ++i) edges.push_back({static_cast<VertexId>(i), static_cast<VertexId>(i + 1), w[i]});
  return WeightedGraph(static_cast<int>(w.size()) + 1, edges, Root::vertex(0));
}

WeightedGraph weighted_tree(const OffspringLaw& law, Rooting r, int depth, std::uint64_t s) {
  return assign_weights(ubgw_tree(law, r, depth, {s, 0}), WeightLaw::uniform(0, 1), {s, 1});
}

WeightedGraph small_tree(Rng& rng, std::uint64_t s, int max_edges) {
  for (std::uint64_t a = 0;; ++a) {
    auto t = ubgw_tree(OffspringLaw::poisson(2), Rooting::Vertex, 1 + static_cast<int>(rng.below(4)), {s, a});
    if (t.m() <= max_edges) return assign_weights(t, WeightLaw::uniform(0, 1), {s + 1, a});
  }
}

// Breadth-first discovery order, the same labelling the ball builder uses.
std::vector<VertexId> bfs_order(const WeightedGraph& g, VertexId center, int H) {
  std::vector<int> dist(g.n(), -1);
  std::vector<VertexId> order{center};
  dist[center] = 0;
  for (std::size_t h = 0; h < order.size(); ++h) {
    VertexId v = order[h];
    if (dist[v] == H) continue;
    for (const auto& inc : g.neighbors(v))
      if (dist[inc.to] < 0) {
        dist[inc.to] = dist[v] + 1;
        order.push_back(inc.to);
      }
  }
  return order;
}

std::set<std::pair<VertexId, VertexId>> edge_set(const Matching& m) { return {m.edges.begin(), m.edges.end()}; }

bool root_uncertified(const WeightedGraph& t, const std::vector<SqueezeEntry>& sq) {
  if (t.degree(0) == 0) return false;
  for (const auto& inc : t.neighbors(0))
    if (!sq[t.directed(0, inc.to)].certified) return true;
  return false;
}

LexMsg random_msg(Rng& rng, int k) { return {static_cast<int>(rng.below(k + 1)), 2 * rng.uniform()}; }

}  // namespace

TEST_CASE("lexicographic message algebra") {
  CHECK(LexMsg{0, 5} < LexMsg{1, 0});
  CHECK(LexMsg{1, 0.2} < LexMsg{1, 0.3});
  CHECK(LexMsg::bottom() < LexMsg::zero());
  CHECK(LexMsg::zero() < LexMsg::top(1));
  CHECK(offer(1, 0.7, LexMsg::zero()) == LexMsg{1, 0.7});
  CHECK(offer(1, 0.7, LexMsg{1, 0.2}) == LexMsg{0, 0.7 - 0.2});
  CHECK(offer(1, 0.7, LexMsg::top(1)).is_bottom());
  CHECK(sum(LexMsg{1, 0.25}, LexMsg{0, 0.5}) == LexMsg{1, 0.75});
  CHECK(sum(LexMsg::bottom(), LexMsg::zero()).is_bottom());
}

TEST_CASE("tree sweep examples") {
  auto one = path({0.4});
  auto f1 = sweep_tree(one, 1);
  CHECK(f1.at(one, 0, 1) == LexMsg::zero());
  CHECK(f1.at(one, 1, 0) == LexMsg::zero());
  CHECK(extract_matching(one, f1).size == 1);
  CHECK_THROWS(sweep_tree(WeightedGraph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}, Root::vertex(0)), 1));

  const double w_ab = 0.3, w_bc = 0.8;
  auto abc = path({w_ab, w_bc});
  auto f = sweep_tree(abc, 1);
  CHECK(f.at(abc, 0, 1) == LexMsg{1, w_bc});
  CHECK(f.at(abc, 2, 1) == LexMsg{1, w_ab});
  CHECK(f.at(abc, 1, 0) == LexMsg::zero());
  CHECK(f.at(abc, 1, 2) == LexMsg::zero());
  for (auto [a, b] : {std::pair{0.3, 0.8}, std::pair{0.8, 0.3}}) {
    auto p = path({a, b});
    auto m = extract_matching(p, sweep_tree(p, 1));
    REQUIRE(m.size == 1);
    CHECK((m.edges[0].first == 0) == (a > b));
  }
}

TEST_CASE("tree sweep agrees with brute force") {
  Rng rng(21, 0);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    auto t = small_tree(rng, 7000 + 2 * s, kBruteForceEdgeLimit);
    auto field = sweep_tree(t, 1);
    CHECK(recursion_violations(t, field) == 0);
    auto m = extract_matching(t, field);
    auto bf = brute_force_opt(t);
    CHECK(m.size == bf.size);
    CHECK(std::abs(m.weight - bf.weight) < 1e-9);

    auto partners = vertex_rule_partners(t, field);
    auto flex = flexibility(t, field);
    std::vector<VertexId> from_edges(t.n(), -1);
    for (auto [u, v] : m.edges) {
      from_edges[u] = v;
      from_edges[v] = u;
    }
    CHECK(partners == from_edges);
    for (VertexId v = 0; v < t.n(); ++v) CHECK(flexibility_unmatched(flex[v]) == (from_edges[v] < 0));
  }
}

TEST_CASE("flexibility examples") {
  WeightedGraph lone(1, {}, Root::vertex(0));
  auto flex = flexibility(lone, sweep_tree(lone, 1));
  CHECK(flex[0].is_bottom());
  CHECK(flexibility_unmatched(flex[0]));
  auto one = path({0.6});
  auto f = flexibility(one, sweep_tree(one, 1));
  CHECK(f[0] == LexMsg{1, 0.6});
  CHECK(!flexibility_unmatched(f[1]));
}

TEST_CASE("bounded sweep on a star") {
  std::vector<Edge> edges{{0, 1, 0.2}, {0, 2, 0.9}, {0, 3, 0.5}};
  WeightedGraph star(4, edges, Root::vertex(0), {1, 2, 3});
  auto zero = extract_matching(star, sweep_bounded(star, 1, BoundaryKind::Zero));
  CHECK(zero.edges == std::vector<std::pair<VertexId, VertexId>>{{0, 2}});
  auto top = extract_matching(star, sweep_bounded(star, 1, BoundaryKind::Top));
  CHECK(top.size == 0);
  CHECK_THROWS(sweep_bounded(star, 1, BoundaryKind::Sampled));
  std::vector<LexMsg> too_few{LexMsg::zero()};
  CHECK_THROWS(sweep_bounded(star, 1, too_few));
}

TEST_CASE("bounded sweep reconstructs the ambient optimum inside a ball") {
  int done = 0;
  for (std::uint64_t s = 0; done < 100 && s < 10000; ++s) {
    auto g = assign_weights(erdos_renyi(200, 1, {800, s}), WeightLaw::uniform(0, 1), {801, s});
    VertexId o = static_cast<VertexId>(s % 200);
    auto comp = ball(g, o, g.n());
    if (!comp.is_forest() || comp.m() < 3) continue;
    auto opt = tree_opt_dp(comp).matching;
    std::vector<VertexId> partner(comp.n(), -1);
    for (auto [u, v] : opt.edges) {
      partner[u] = v;
      partner[v] = u;
    }
    auto b = ball(comp, 0, 3);
    auto order = bfs_order(comp, 0, 3);
    REQUIRE(order.size() == static_cast<std::size_t>(b.n()));
    std::vector<VertexId> to_ball(comp.n(), -1);
    for (std::size_t i = 0; i < order.size(); ++i) to_ball[order[i]] = static_cast<VertexId>(i);
    for (const Edge& e : b.edges()) REQUIRE(comp.weight(*comp.edge_index(order[e.u], order[e.v])) == e.w);

    std::vector<LexMsg> values;
    for (VertexId bv : b.boundary()) {
      VertexId p = partner[order[bv]];
      values.push_back(p >= 0 && to_ball[p] < 0 ? LexMsg::top(1) : LexMsg::zero());
    }
    auto rebuilt = extract_matching(b, sweep_bounded(b, 1, values));
    std::set<std::pair<VertexId, VertexId>> want;
    for (auto [u, v] : opt.edges)
      if (to_ball[u] >= 0 && to_ball[v] >= 0) want.insert(std::minmax(to_ball[u], to_ball[v]));
    CHECK(edge_set(rebuilt) == want);
    ++done;
  }
  CHECK(done == 100);
}

TEST_CASE("squeeze examples") {
  auto single = WeightedGraph(1, {}, Root::vertex(0), {0});
  CHECK(squeeze(single, 1, 0).empty());
  auto star0 = ball(path({0.5, 0.5}), 1, 0);
  CHECK(star0.n() == 1);

  auto p = path({0.5, 0.7}).with_boundary({2});
  auto sq = squeeze(p, 1, 2);
  CHECK(sq[p.directed(1, 0)].certified);
  CHECK(sq[p.directed(2, 1)].certified);
  CHECK(sq[p.directed(2, 1)].lower == LexMsg{1, 0.5});
  CHECK(!sq[p.directed(0, 1)].certified);

  // At H = 0 from the root edge the only messages come straight from the boundary.
  auto e = path({0.5}).with_boundary({0, 1});
  for (const auto& entry : squeeze(e, 1, 0)) {
    CHECK(!entry.certified);
    CHECK(entry.lower == LexMsg::zero());
    CHECK(entry.upper == LexMsg::top(1));
  }
  CHECK_THROWS(squeeze(e, 1, -1));
}

TEST_CASE("squeeze brackets every boundary and the step map reverses order") {
  Rng rng(22, 0);
  for (std::uint64_t s = 0; s < 300; ++s) {
    const int H = 1 + static_cast<int>(rng.below(5));
    auto t = weighted_tree(OffspringLaw::poisson(1.5), Rooting::Vertex, H, 9000 + s);
    if (t.boundary().empty()) continue;
    auto sq = squeeze(t, 1, H);
    std::vector<LexMsg> low_b, high_b;
    for (std::size_t i = 0; i < t.boundary().size(); ++i) {
      LexMsg a = random_msg(rng, 1), b = random_msg(rng, 1);
      low_b.push_back(lexmin(a, b));
      high_b.push_back(lexmax(a, b));
    }
    auto low = sweep_bounded(t, 1, low_b), high = sweep_bounded(t, 1, high_b);
    auto dist = distances(t, {0});
    for (int d = 0; d < 2 * t.m(); ++d) {
      CHECK(sq[d].lower <= low.msg[d]);
      CHECK(low.msg[d] <= sq[d].upper);
      // Messages flowing toward the root flip order once per level above the boundary.
      VertexId from = t.head(d), to = t.tail(d);
      if (dist[from] != dist[to] + 1) continue;
      if ((H - dist[from]) % 2 == 0)
        CHECK(low.msg[d] <= high.msg[d]);
      else
        CHECK(high.msg[d] <= low.msg[d]);
    }
  }
}

TEST_CASE("root messages are almost always certified for sparse trees") {
  int uncertified = 0;
  const int samples = 10000;
  for (int s = 0; s < samples; ++s) {
    auto t = weighted_tree(OffspringLaw::poisson(0.2), Rooting::Vertex, 4, 11000 + s);
    uncertified += root_uncertified(t, squeeze(t, 1, 4));
  }
  CHECK(static_cast<double>(uncertified) / samples < 0.01);
}

TEST_CASE("uncertified root fraction decreases with depth") {
  const int samples = 4000, max_h = 10;
  std::vector<int> bad(max_h + 1, 0);
  for (int s = 0; s < samples; ++s) {
    auto t = weighted_tree(OffspringLaw::poisson(1), Rooting::Vertex, max_h, 12000 + s);
    for (int H = 2; H <= max_h; ++H) {
      auto b = ball(t, 0, H);
      bad[H] += root_uncertified(b, squeeze(b, 1, H));
    }
  }
  for (int H = 3; H <= max_h; ++H) CHECK(bad[H] <= bad[H - 1]);
  CHECK(bad[max_h] < bad[2] / 4);
}

TEST_CASE("level sweep") {
  auto p = path({1, 1});
  CHECK_THROWS_AS(macroscopic_sweep(p, LevelBoundary::Zero, 2), std::domain_error);
  auto whole = ball(p, 1, 2);
  CHECK(whole.boundary().empty());
  auto lv = macroscopic_squeeze(whole);
  for (char c : lv.certified) CHECK(c);
  // Leaves send level 0; the centre forwards 1 - 0.
  CHECK(lv.lower[whole.directed(0, 1)] == 0);
  CHECK(lv.lower[whole.directed(1, 0)] == 1);

  auto three = path({1, 1, 1});
  auto cls = classify_edges_from_levels(three, macroscopic_squeeze(three));
  CHECK(cls == EdgeClass{EdgeState::Mandatory, EdgeState::Blocking, EdgeState::Mandatory});
  WeightedGraph cherry(3, {{0, 1, 1.0}, {0, 2, 1.0}}, Root::vertex(0));
  CHECK(classify_edges_from_levels(cherry, macroscopic_squeeze(cherry)) == EdgeClass(2, EdgeState::Free));
  auto single = path({1});
  CHECK(classify_edges_from_levels(single, macroscopic_squeeze(single)) == EdgeClass{EdgeState::Mandatory});
  auto cut = path({1, 1}).with_boundary({2});
  auto cut_cls = classify_edges_from_levels(cut, macroscopic_squeeze(cut));
  CHECK(cut_cls[1] == EdgeState::Unknown);
}

TEST_CASE("certified level classification matches the exact oracle") {
  Rng rng(23, 0);
  int certified = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    auto t = small_tree(rng, 20000 + 2 * s, 22);
    auto exact = mandatory_blocking(t);
    auto cls = classify_edges_from_levels(t, macroscopic_squeeze(t));
    for (int e = 0; e < t.m(); ++e) {
      if (cls[e] == EdgeState::Unknown) continue;
      ++certified;
      CHECK(cls[e] == exact[e]);
    }
    // Without a boundary every level is certified.
    auto whole = t.with_boundary({});
    CHECK(classify_edges_from_levels(whole, macroscopic_squeeze(whole)) == exact);
  }
  CHECK(certified > 100);
}

TEST_CASE("certified root levels follow the plateau law") {
  const double gamma = oracle::poisson_gamma(1);
  const int samples = 10000;
  int level0 = 0, certified = 0;
  for (int s = 0; s < samples; ++s) {
    auto t = ubgw_tree(OffspringLaw::poisson(1), Rooting::Edge, 12, {13000, static_cast<std::uint64_t>(s)});
    auto lv = macroscopic_squeeze(t);
    int d = t.directed(0, 1);
    if (!lv.certified[d]) continue;
    ++certified;
    level0 += lv.lower[d] == 0;
  }
  REQUIRE(certified > samples * 0.9);
  CHECK(std::abs(static_cast<double>(level0) / certified - gamma) < 0.02);
}

TEST_CASE("scalar eps recursion") {
  auto one = path({0.3});
  for (double eps : {0.01, 1.0, 100.0}) CHECK(scalar_sweep_eps(one, eps).matching.size == 1);
  CHECK_THROWS(scalar_sweep_eps(one, 0));

  auto p = path({0.1, 0.9, 0.1});
  double threshold = eps_gap_threshold(p);
  CHECK(scalar_sweep_eps(p, 0.9 * threshold).matching.size == 2);
  auto big = scalar_sweep_eps(p, 1.1 * threshold).matching;
  CHECK(big.edges == std::vector<std::pair<VertexId, VertexId>>{{1, 2}});

  Rng rng(24, 0);
  for (std::uint64_t s = 0; s < 500; ++s) {
    auto t = small_tree(rng, 30000 + 2 * s, kBruteForceEdgeLimit);
    double th = eps_gap_threshold(t);
    double eps = std::isinf(th) ? 1.0 : th / 2;
    auto lex = extract_matching(t, sweep_tree(t, 1));
    CHECK(scalar_sweep_eps(t, eps).matching == lex);
  }
}
