#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "lexmatch/bp.hpp"
#include "lexmatch/genfn.hpp"
#include "lexmatch/randgraph.hpp"
#include "lexmatch/rng.hpp"

namespace lexmatch {

// Uniform nodes t_i = -T + i * delta, i = 0..points-1, delta = 2T / points.
// `points` must be even so that t = 0 is the node points / 2.
struct GridSpec {
  double T = 12;
  int points = 4096;
};

GridSpec default_grid(const WeightLaw& w);
// h^eps lives on [0, 1 + eps * max W]; the step resolves the weight spread eps * W.
GridSpec default_grid_eps(const WeightLaw& w, double eps);

// Monotone function sampled on the grid, piecewise linear in between and
// constant beyond the ends. With `jump_at_zero` it vanishes for t < 0 and is
// right-continuous at 0, the jump being `atom0`.
struct GridCdf {
  double T = 0;
  double delta = 0;
  std::vector<double> values;
  bool jump_at_zero = false;
  double atom0 = 0;
  double left_limit = 0;
  double right_limit = 0;

  int points() const { return static_cast<int>(values.size()); }
  int zero_index() const { return points() / 2; }
  double node(int i) const { return -T + i * delta; }
  double operator()(double t) const;
  // Smallest t with h(t) >= u.
  double inverse(double u) const;
};

struct CdfSystem {
  int k = 0;
  std::vector<GridCdf> levels;  // h_0 .. h_k
  std::vector<double> plateau;  // l_1 .. l_k
  double beta = 0;              // atom of h_0 at 0
  // Trees without leaves: h_0 has no jump, runs from 0 and h_k ends at 1.
  bool leafless = false;
};

struct SolveOptions {
  GridSpec grid;
  double tol = 1e-10;
  int max_iter = 5000;
  double damping = 0.5;  // weight of the new iterate
};

struct SolveStats {
  int iterations = 0;
  std::vector<double> residuals;  // sup-norm |F(h) - h| per iteration
  std::string warning;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// h(t) = 1{t >= 0} phi^(1 - E[h(1 + eps W - t)]).
GridCdf solve_h_eps(const OffspringLaw& law, const WeightLaw& wlaw, double eps, const SolveOptions& opt,
                    SolveStats* stats = nullptr);

// h_0(t) = 1{t >= 0} phi^(1 - E[h_k(W - t)]), h_j(t) = phi^(1 - E[h_{k-j}(W - t)]).
// When phi^(0) = 0 and the outer levels 0 and 1 carry no mass, the two
// empty levels are dropped and the leafless variant (no indicator on h_0)
// is solved with k - 2 levels instead; stats->warning says so.
CdfSystem solve_system(const OffspringLaw& law, const WeightLaw& wlaw, int k, const SolveOptions& opt,
                       SolveStats* stats = nullptr);

struct ConservationResidual {
  double atom_identity = 0;
  std::vector<double> balance;  // j = 1 .. k-1
  double max_abs = 0;
};

ConservationResidual conservation_check(const CdfSystem& sys, const OffspringLaw& law);

// Edge density from the atom: beta (1 - inv(beta)) + int_beta^1 (1 - inv(u)) du.
double size_from_system(const CdfSystem& sys, const OffspringLaw& law);
// Same quantity from the plateau: (2 - functional(l_1)) / mean.
double size_from_plateau(const CdfSystem& sys, const OffspringLaw& law);

class ZetaSampler {
 public:
  static ZetaSampler from_system(const CdfSystem& sys);
  static ZetaSampler from_pool(int k, std::vector<LexMsg> pool);

  LexMsg sample(Rng& rng) const;
  int k() const { return k_; }
  std::vector<double> level_masses() const;
  bool is_pool() const { return !pool_.empty(); }
  const std::vector<LexMsg>& pool() const { return pool_; }

 private:
  int k_ = 0;
  CdfSystem sys_;
  std::vector<double> cumulative_;
  std::vector<LexMsg> pool_;
};

ZetaSampler zeta_prime(const CdfSystem& sys);

// maxlex((0,0), maxlex over N ~ size-biased children of (k, W) - draw).
LexMsg recursion_step(const OffspringLaw& law, const WeightLaw& wlaw, int k, const ZetaSampler& source, Rng& rng);

ZetaSampler population_dynamics(const OffspringLaw& law, const WeightLaw& wlaw, int k, int pool_size,
                                long long iters, RngSeed seed);

// sup_t |F_n(t) - G(t)| between the empirical law of `samples` and the
// normalised increment of h.
double kolmogorov_distance(const GridCdf& h, std::vector<double> samples);

void write_csv(std::ostream& os, const CdfSystem& sys);
CdfSystem read_csv(std::istream& is);

}  // namespace lexmatch
