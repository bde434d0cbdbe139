#include "lexmatch/bp.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lexmatch/text.hpp"

namespace lexmatch {

LexMsg offer(int k, double w, const LexMsg& m) {
  if (m.is_bottom()) throw std::logic_error("offer applied to Bottom");
  if (m.level > k) throw std::logic_error("message level above k");
  double z = w - m.z;
  if (z == -std::numeric_limits<double>::infinity()) return LexMsg::bottom();
  return {k - m.level, z};
}

LexMsg sum(const LexMsg& a, const LexMsg& b) {
  if (a.is_bottom() || b.is_bottom()) return LexMsg::bottom();
  return {a.level + b.level, a.z + b.z};
}

namespace {

// Shared two-pass engine for recursions of the form
//   msg(u,v) = finish(max over u' ~ v, u' != u of term(edge(v,u'), msg(v,u')))
// on forests. `fixed` optionally pins some directed edges.
template <class Msg, class Term, class Finish>
std::vector<Msg> tree_sweep(const WeightedGraph& g, const std::vector<char>& fixed, std::vector<Msg> msg,
                            Term term, Finish finish, Msg empty) {
  if (!g.is_forest()) throw std::invalid_argument("graph has a cycle");
  const int n = g.n();
  std::vector<VertexId> order, parent(n, -2);
  order.reserve(n);
  for (VertexId s = 0; s < n; ++s) {
    if (parent[s] != -2) continue;
    parent[s] = -1;
    std::size_t head = order.size();
    order.push_back(s);
    for (; head < order.size(); ++head) {
      VertexId v = order[head];
      for (const auto& inc : g.neighbors(v)) {
        if (inc.to == parent[v]) continue;
        parent[inc.to] = v;
        order.push_back(inc.to);
      }
    }
  }
  auto pinned = [&](int d) { return !fixed.empty() && fixed[d]; };

  // Leaves to root: msg(parent, v) from v's children.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VertexId v = *it;
    if (parent[v] < 0) continue;
    int d = g.directed(parent[v], v);
    if (pinned(d)) continue;
    Msg best = empty;
    for (const auto& inc : g.neighbors(v)) {
      if (inc.to == parent[v]) continue;
      Msg t = term(inc.edge, msg[g.directed(v, inc.to)]);
      if (best < t) best = t;
    }
    msg[d] = finish(best);
  }
  // Root to leaves: msg(c, v) for each child c of v, from v's other neighbours.
  for (VertexId v : order) {
    Msg first = empty, second = empty;
    VertexId arg = -1;
    for (const auto& inc : g.neighbors(v)) {
      Msg t = term(inc.edge, msg[g.directed(v, inc.to)]);
      if (first < t) {
        second = first;
        first = t;
        arg = inc.to;
      } else if (second < t) {
        second = t;
      }
    }
    for (const auto& inc : g.neighbors(v)) {
      if (inc.to == parent[v]) continue;
      int d = g.directed(inc.to, v);
      if (pinned(d)) continue;
      msg[d] = finish(inc.to == arg ? second : first);
    }
  }
  return msg;
}

auto lex_term(const WeightedGraph& g, int k) {
  return [&g, k](int e, const LexMsg& m) { return offer(k, g.weight(e), m); };
}

LexMsg lex_finish(const LexMsg& best) { return lexmax(LexMsg::zero(), best); }

MessageField lex_sweep(const WeightedGraph& g, int k, std::vector<char> fixed, std::vector<LexMsg> init) {
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  MessageField f;
  f.k = k;
  f.msg = tree_sweep<LexMsg>(g, fixed, std::move(init), lex_term(g, k), lex_finish, LexMsg::bottom());
  f.fixed = std::move(fixed);
  return f;
}

}  // namespace

MessageField sweep_tree(const WeightedGraph& forest, int k) {
  return lex_sweep(forest, k, {}, std::vector<LexMsg>(2 * forest.m(), LexMsg::zero()));
}

MessageField sweep_bounded(const WeightedGraph& ball, int k, std::span<const LexMsg> values) {
  const auto& boundary = ball.boundary();
  if (values.size() != boundary.size()) throw std::invalid_argument("one boundary value per boundary vertex");
  std::vector<char> fixed(2 * ball.m(), 0);
  std::vector<LexMsg> init(2 * ball.m(), LexMsg::zero());
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const LexMsg& val = values[i];
    if (val.is_bottom() || val.level > k) throw std::invalid_argument("boundary value outside the message range");
    for (const auto& inc : ball.neighbors(boundary[i])) {
      int d = ball.directed(inc.to, boundary[i]);
      fixed[d] = 1;
      init[d] = val;
    }
  }
  return lex_sweep(ball, k, std::move(fixed), std::move(init));
}

MessageField sweep_bounded(const WeightedGraph& ball, int k, BoundaryKind uniform_kind) {
  if (uniform_kind == BoundaryKind::Sampled)
    throw std::invalid_argument("sampled boundaries need explicit values");
  LexMsg v = uniform_kind == BoundaryKind::Zero ? LexMsg::zero() : LexMsg::top(k);
  std::vector<LexMsg> values(ball.boundary().size(), v);
  return sweep_bounded(ball, k, values);
}

std::size_t recursion_violations(const WeightedGraph& g, const MessageField& field) {
  std::size_t bad = 0;
  for (int d = 0; d < 2 * g.m(); ++d) {
    if (!field.fixed.empty() && field.fixed[d]) continue;
    VertexId u = g.tail(d), v = g.head(d);
    LexMsg best = LexMsg::bottom();
    for (const auto& inc : g.neighbors(v)) {
      if (inc.to == u) continue;
      best = lexmax(best, offer(field.k, g.weight(inc.edge), field.msg[g.directed(v, inc.to)]));
    }
    if (!(lex_finish(best) == field.msg[d])) ++bad;
  }
  return bad;
}

std::vector<VertexId> vertex_rule_partners(const WeightedGraph& g, const MessageField& field) {
  std::vector<VertexId> partner(g.n(), -1);
  for (VertexId u = 0; u < g.n(); ++u) {
    LexMsg best = LexMsg::zero();
    for (const auto& inc : g.neighbors(u)) {
      LexMsg t = offer(field.k, g.weight(inc.edge), field.msg[g.directed(u, inc.to)]);
      if (t > best) {
        best = t;
        partner[u] = inc.to;
      }
    }
  }
  return partner;
}

Matching extract_matching(const WeightedGraph& g, const MessageField& field) {
  std::vector<int> ids;
  std::vector<VertexId> partner(g.n(), -1);
  for (int e = 0; e < g.m(); ++e) {
    LexMsg s = sum(field.msg[2 * e], field.msg[2 * e + 1]);
    if (s < LexMsg{field.k, g.weight(e)}) {
      const Edge& ed = g.edge(e);
      if (partner[ed.u] >= 0 || partner[ed.v] >= 0)
        throw std::logic_error("edge rule produced two edges at one vertex");
      partner[ed.u] = ed.v;
      partner[ed.v] = ed.u;
      ids.push_back(e);
    }
  }
  // Vertices receiving a pinned message do not satisfy the recursion there.
  std::vector<char> pinned_target(g.n(), 0);
  for (int d = 0; d < 2 * g.m(); ++d)
    if (!field.fixed.empty() && field.fixed[d]) pinned_target[g.head(d)] = 1;
  std::vector<VertexId> by_vertex = vertex_rule_partners(g, field);
  for (VertexId u = 0; u < g.n(); ++u) {
    if (pinned_target[u]) continue;
    if (by_vertex[u] != partner[u])
      throw std::logic_error("edge rule and vertex rule disagree at vertex " + std::to_string(u));
  }
  return make_matching(g, ids);
}

std::vector<LexMsg> flexibility(const WeightedGraph& g, const MessageField& field) {
  std::vector<LexMsg> out(g.n(), LexMsg::bottom());
  for (VertexId u = 0; u < g.n(); ++u)
    for (const auto& inc : g.neighbors(u))
      out[u] = lexmax(out[u], offer(field.k, g.weight(inc.edge), field.msg[g.directed(u, inc.to)]));
  return out;
}

std::vector<SqueezeEntry> squeeze(const WeightedGraph& ball, int k, int H) {
  if (H < 0) throw std::invalid_argument("H must be >= 0");
  MessageField low = sweep_bounded(ball, k, BoundaryKind::Zero);
  MessageField high = sweep_bounded(ball, k, BoundaryKind::Top);
  std::vector<SqueezeEntry> out(low.msg.size());
  for (std::size_t d = 0; d < out.size(); ++d) {
    out[d].lower = lexmin(low.msg[d], high.msg[d]);
    out[d].upper = lexmax(low.msg[d], high.msg[d]);
    out[d].certified = out[d].lower == out[d].upper;
  }
  return out;
}

std::vector<int> macroscopic_sweep(const WeightedGraph& ball, LevelBoundary boundary, int k) {
  if (k != 1) throw std::domain_error("macroscopic sweep requires the single-level regime k = 1");
  std::vector<char> fixed(2 * ball.m(), 0);
  std::vector<int> init(2 * ball.m(), 0);
  int value = boundary == LevelBoundary::Zero ? 0 : 1;
  for (VertexId b : ball.boundary()) {
    for (const auto& inc : ball.neighbors(b)) {
      int d = ball.directed(inc.to, b);
      fixed[d] = 1;
      init[d] = value;
    }
  }
  constexpr int kEmpty = std::numeric_limits<int>::min();
  return tree_sweep<int>(
      ball, fixed, std::move(init), [](int, int level) { return 1 - level; },
      [](int best) { return std::max(0, best); }, kEmpty);
}

LevelSqueeze macroscopic_squeeze(const WeightedGraph& ball, int k) {
  std::vector<int> low = macroscopic_sweep(ball, LevelBoundary::Zero, k);
  std::vector<int> high = macroscopic_sweep(ball, LevelBoundary::One, k);
  LevelSqueeze out;
  out.lower.resize(low.size());
  out.upper.resize(low.size());
  out.certified.resize(low.size());
  for (std::size_t d = 0; d < low.size(); ++d) {
    out.lower[d] = std::min(low[d], high[d]);
    out.upper[d] = std::max(low[d], high[d]);
    out.certified[d] = low[d] == high[d];
  }
  return out;
}

EdgeClass classify_edges_from_levels(const WeightedGraph& ball, const LevelSqueeze& levels, int k) {
  EdgeClass cls(ball.m(), EdgeState::Unknown);
  for (int e = 0; e < ball.m(); ++e) {
    if (!levels.certified[2 * e] || !levels.certified[2 * e + 1]) continue;
    int total = levels.lower[2 * e] + levels.lower[2 * e + 1];
    cls[e] = total < k ? EdgeState::Mandatory : total > k ? EdgeState::Blocking : EdgeState::Free;
  }
  return cls;
}

ScalarSweep scalar_sweep_eps(const WeightedGraph& forest, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  ScalarSweep out;
  auto w_eps = [&](int e) { return 1 + eps * forest.weight(e); };
  out.msg = tree_sweep<double>(
      forest, {}, std::vector<double>(2 * forest.m(), 0.0), [&](int e, double z) { return w_eps(e) - z; },
      [](double best) { return std::max(0.0, best); }, -std::numeric_limits<double>::infinity());
  std::vector<int> ids;
  for (int e = 0; e < forest.m(); ++e)
    if (w_eps(e) > out.msg[2 * e] + out.msg[2 * e + 1]) ids.push_back(e);
  out.matching = make_matching(forest, ids);
  return out;
}

void write_field(std::ostream& os, const WeightedGraph& g, const MessageField& field) {
  for (int d = 0; d < 2 * g.m(); ++d) {
    const LexMsg& m = field.msg[d];
    os << g.tail(d) << " " << g.head(d) << " " << (m.is_bottom() ? -1 : m.level) << " " << text::exact(m.z)
       << "\n";
  }
}

}  // namespace lexmatch
