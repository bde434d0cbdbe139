#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lexmatch/genfn.hpp"
#include "lexmatch/graph.hpp"
#include "lexmatch/rng.hpp"

namespace lexmatch {

// Edge weight distribution.
class WeightLaw {
 public:
  enum class Family { Uniform, Exponential, Constant };

  static WeightLaw uniform(double a, double b);
  static WeightLaw exponential(double rate);
  static WeightLaw constant(double v);
  // `uniform:0:1`, `exp:1`, `const:1`.
  static WeightLaw parse(std::string_view spec);
  std::string spec() const;

  Family family() const { return family_; }
  bool atomless() const { return family_ != Family::Constant; }
  double mean() const;
  double cdf(double x) const;
  double sample(Rng& rng) const;
  // Smallest interval carrying all the mass (the exponential upper end is
  // the 1 - 1e-15 quantile).
  double support_low() const;
  double support_high() const;

  double first() const { return a_; }
  double second() const { return b_; }

 private:
  Family family_ = Family::Uniform;
  double a_ = 0, b_ = 1;
};

WeightedGraph erdos_renyi(int n, double c, RngSeed seed);
WeightedGraph configuration_model(std::vector<int> degrees, RngSeed seed);

enum class Rooting { Vertex, Edge };

// Unimodular Galton-Watson tree cut at distance `depth` from the root (vertex
// or edge). Vertices at that distance form the boundary and get no children.
// All weights are 1 until assign_weights is applied.
WeightedGraph ubgw_tree(const OffspringLaw& law, Rooting rooting, int depth, RngSeed seed);

// Side-by-side copy of the parts, relabelled consecutively; keeps boundaries
// and the root of the first part.
WeightedGraph disjoint_union(const std::vector<WeightedGraph>& parts);

WeightedGraph assign_weights(const WeightedGraph& g, const WeightLaw& law, RngSeed seed);

// Induced subgraph on vertices within distance H of the center, relabelled in
// breadth-first order with the center as vertex 0 and root.
WeightedGraph ball(const WeightedGraph& g, VertexId center, int H);

// Same around a directed root edge: vertices within distance H of either
// endpoint, the edge becoming (0, 1).
WeightedGraph edge_ball(const WeightedGraph& g, VertexId tail, VertexId head, int H);

bool ball_isomorphic(const WeightedGraph& g1, VertexId c1, const WeightedGraph& g2, VertexId c2, int H,
                     bool compare_weights, double weight_tol);

// Breadth-first distances from a set of sources; -1 for unreachable.
std::vector<int> distances(const WeightedGraph& g, const std::vector<VertexId>& sources);

}  // namespace lexmatch
