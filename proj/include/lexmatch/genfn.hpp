#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lexmatch/rng.hpp"

namespace lexmatch {

// Offspring distribution of a unimodular Galton-Watson tree, with its
// generating function and the size-biased (one-less-than-degree) law.
class OffspringLaw {
 public:
  enum class Family { Poisson, Geometric, Binomial, FiniteSupport };

  static constexpr int kMaxSupport = 64;

  static OffspringLaw poisson(double c);
  // Parameterised by the size-biased law, which is geometric on {1,2,...}:
  // its generating function is px/(1-(1-p)x). The base law puts no mass on
  // degrees 0 and 1.
  static OffspringLaw geometric(double p);
  static OffspringLaw binomial(int n, double q);
  static OffspringLaw finite(std::vector<double> pmf);

  // `poisson:1.0`, `geom:0.5`, `binom:3:0.5`, `pmf:0.2,0.5,0.3`.
  static OffspringLaw parse(std::string_view spec);
  std::string spec() const;

  Family family() const { return family_; }
  double mean() const { return mean_; }
  bool has_size_bias() const { return mean_ > 0; }

  // Derivatives of the generating function, order 0..2. x must lie in [0,1].
  double pgf(double x, int order = 0) const;
  // Size-biased generating function phi'(x)/phi'(1) and its derivative.
  double size_biased(double x, int order = 0) const;
  // Generalised inverse of the size-biased generating function on [0,1].
  double size_biased_inverse(double u) const;

  double pmf(int k) const;
  double size_biased_pmf(int k) const;

  int sample(Rng& rng) const;
  int sample_size_biased(Rng& rng) const;

  double param() const { return a_; }
  int trials() const { return n_; }
  const std::vector<double>& probabilities() const { return pmf_; }

 private:
  OffspringLaw() = default;
  void require_size_bias() const;

  Family family_ = Family::Poisson;
  double a_ = 0;  // c, p or q depending on the family
  int n_ = 0;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  std::vector<double> biased_cdf_;
  double mean_ = 0;
};

// Spec-named entry points.
double pgf_eval(const OffspringLaw& law, double x, int order);
double size_biased_pgf(const OffspringLaw& law, double x, int order);

struct FixedPoints {
  std::vector<double> points;  // sorted, empty when degenerate
  bool degenerate = false;     // the double map is the identity
};

// Fixed points of t -> phi^(1 - phi^(1 - t)) on [0,1].
FixedPoints double_fixed_points(const OffspringLaw& law, double tol = 1e-12);

// phi(1-x) + phi(1-phi^(1-x)) + phi'(1) x phi^(1-x); its maximum gives the
// asymptotic matching size.
double matching_functional(const OffspringLaw& law, double x);

// Asymptotic fraction of matched vertices, 2 - max of the functional.
double matching_vertex_density(const OffspringLaw& law);

struct KarpSipser {
  double gamma_low = 0;
  double gamma_high = 0;
  double beta = 0;
  double edge_density = 0;
  double vertex_density = 0;
};

KarpSipser karp_sipser_poisson(double c);

// sup over laws of X on [0,1] of E[phi^'(1-X)] * phi^'(1 - E[phi^(1-X)]),
// searched over two-point laws. `grid` is the number of support values tried.
double subcriticality_coefficient(const OffspringLaw& law, int grid = 200);

struct RegimeReport {
  int k = 0;
  std::vector<double> atoms;
  std::vector<double> fixed_points;
  double rho = 0;
  bool unique_double_fp = false;
  bool subcritical = false;
  bool degenerate_family = false;
};

RegimeReport macroscopic_law(const OffspringLaw& law);

}  // namespace lexmatch
