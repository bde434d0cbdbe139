#include "lexmatch/rde.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "lexmatch/text.hpp"

namespace lexmatch {

GridSpec default_grid(const WeightLaw& w) { return {8 * (w.mean() + 1), 4096}; }

GridSpec default_grid_eps(const WeightLaw& w, double eps) {
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  double T = 2 * (1 + eps * std::max(std::abs(w.support_low()), std::abs(w.support_high())));
  double spread = eps * std::max(w.support_high() - w.support_low(), 1e-3);
  int points = 4096;
  while (points < (1 << 20) && 2 * T / points > spread / 64) points *= 2;
  return {T, points};
}

double GridCdf::operator()(double t) const {
  const int n = points();
  if (jump_at_zero && t < 0) return 0;
  double x = (t + T) / delta;
  if (x <= 0) return values.front();
  if (x >= n - 1) return values.back();
  int i = static_cast<int>(std::floor(x));
  double a = x - i;
  if (jump_at_zero && i + 1 == zero_index()) return 0;  // cell just left of the jump
  return (1 - a) * values[i] + a * values[i + 1];
}

double GridCdf::inverse(double u) const {
  int start = jump_at_zero ? zero_index() : 0;
  if (jump_at_zero && u <= values[start]) return 0;
  auto it = std::lower_bound(values.begin() + start, values.end(), u);
  if (it == values.end()) return node(points() - 1);
  int i = static_cast<int>(it - values.begin());
  if (i == start) return node(i);
  double lo = values[i - 1], hi = values[i];
  double a = hi > lo ? (u - lo) / (hi - lo) : 1;
  return node(i - 1) + a * delta;
}

namespace {

void check_grid(const GridSpec& g) {
  if (!(g.T > 0) || g.points < 4 || g.points % 2) throw std::invalid_argument("grid needs T > 0 and an even point count");
}

// Trapezoid weights on the lattice m * delta for a weight law given by its
// CDF. Node m receives half of the mass of each adjacent cell: `left` from
// the cell below, `right` from the cell above. The split matters only for the
// node sitting on a jump of the integrand.
struct Kernel {
  long long m_lo = 0;
  std::vector<double> left, right, total, prefix;  // prefix[i] = sum total[0..i)

  long long m_hi() const { return m_lo + static_cast<long long>(total.size()) - 1; }
  double range_sum(long long a, long long b) const {  // lattice indices, inclusive
    a = std::max(a, m_lo);
    b = std::min(b, m_hi());
    if (a > b) return 0;
    return prefix[b - m_lo + 1] - prefix[a - m_lo];
  }
};

Kernel make_kernel(const std::function<double(double)>& cdf, double lo, double hi, std::optional<double> atom,
                   double delta) {
  Kernel k;
  k.m_lo = static_cast<long long>(std::floor(lo / delta)) - 1;
  long long m_hi = static_cast<long long>(std::ceil(hi / delta)) + 1;
  std::size_t size = static_cast<std::size_t>(m_hi - k.m_lo + 1);
  k.left.assign(size, 0);
  k.right.assign(size, 0);
  if (atom) {
    double x = *atom / delta;
    long long m = static_cast<long long>(std::floor(x));
    double a = x - m;
    if (a < 1e-12) {
      k.right[m - k.m_lo] = 1;
    } else {
      k.right[m - k.m_lo] += 1 - a;
      k.left[m + 1 - k.m_lo] += a;
    }
  } else {
    for (long long m = k.m_lo; m < m_hi; ++m) {
      double mass = cdf((m + 1) * delta) - cdf(m * delta);
      k.right[m - k.m_lo] += mass / 2;
      k.left[m + 1 - k.m_lo] += mass / 2;
    }
  }
  double sum = 0;
  for (std::size_t i = 0; i < size; ++i) sum += k.left[i] + k.right[i];
  k.total.resize(size);
  k.prefix.assign(size + 1, 0);
  for (std::size_t i = 0; i < size; ++i) {
    k.left[i] /= sum;
    k.right[i] /= sum;
    k.total[i] = k.left[i] + k.right[i];
    k.prefix[i + 1] = k.prefix[i] + k.total[i];
  }
  return k;
}

// out[i] = E[h(W - t_i)] for the grid function h (values on nodes).
void expect(const std::vector<double>& h, bool jump, const Kernel& ker, std::vector<double>& out) {
  const long long n = static_cast<long long>(h.size());
  const long long half = n / 2;
  out.assign(n, 0);
  for (long long i = 0; i < n; ++i) {
    // Lattice node m lands on grid index j = m - i + n.
    long long shift = n - i;
    double acc = 0;
    long long first_inside = jump ? half - shift : -shift;  // m giving j = half (jump) or j = 0
    long long last_inside = n - 1 - shift;
    if (!jump) acc += h.front() * ker.range_sum(ker.m_lo, first_inside - 1);
    acc += h.back() * ker.range_sum(last_inside + 1, ker.m_hi());
    long long a = std::max(first_inside, ker.m_lo), b = std::min(last_inside, ker.m_hi());
    for (long long m = a; m <= b; ++m) {
      long long j = m + shift;
      double wgt = (jump && j == half) ? ker.right[m - ker.m_lo] : ker.total[m - ker.m_lo];
      acc += wgt * h[j];
    }
    out[i] = acc;
  }
}

void assert_monotone(std::vector<double>& v, std::size_t from) {
  for (std::size_t i = from + 1; i < v.size(); ++i) {
    if (v[i] < v[i - 1] - 1e-12) throw std::logic_error("iterate lost monotonicity");
    v[i] = std::max(v[i], v[i - 1]);
  }
}

GridCdf make_level(const GridSpec& g, std::vector<double> values, bool jump) {
  GridCdf h;
  h.T = g.T;
  h.delta = 2 * g.T / g.points;
  h.values = std::move(values);
  h.jump_at_zero = jump;
  h.atom0 = jump ? h.values[h.zero_index()] : 0;
  h.left_limit = jump ? 0 : h.values.front();
  h.right_limit = h.values.back();
  return h;
}

double ramp(double t, double width) { return std::clamp(t / width, 0.0, 1.0); }

// Runs damped Jacobi iteration of `apply` on the level functions.
void iterate(std::vector<std::vector<double>>& h, const std::vector<char>& jump,
             const std::function<void(const std::vector<std::vector<double>>&, std::vector<std::vector<double>>&)>& apply,
             const SolveOptions& opt, SolveStats* stats) {
  std::vector<std::vector<double>> next(h.size());
  double residual = std::numeric_limits<double>::infinity();
  const std::size_t half = h[0].size() / 2;
  for (int it = 1; it <= opt.max_iter; ++it) {
    apply(h, next);
    residual = 0;
    for (std::size_t j = 0; j < h.size(); ++j)
      for (std::size_t i = 0; i < h[j].size(); ++i) residual = std::max(residual, std::abs(next[j][i] - h[j][i]));
    for (std::size_t j = 0; j < h.size(); ++j) {
      for (std::size_t i = 0; i < h[j].size(); ++i)
        h[j][i] = opt.damping * next[j][i] + (1 - opt.damping) * h[j][i];
      assert_monotone(h[j], jump[j] ? half : 0);
    }
    if (stats) {
      stats->iterations = it;
      stats->residuals.push_back(residual);
    }
    if (residual < opt.tol) return;
  }
  throw NonConvergence("fixed-point iteration did not converge; last residual " + text::exact(residual), residual);
}

}  // namespace

GridCdf solve_h_eps(const OffspringLaw& law, const WeightLaw& wlaw, double eps, const SolveOptions& opt,
                    SolveStats* stats) {
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  check_grid(opt.grid);
  const double delta = 2 * opt.grid.T / opt.grid.points;
  std::optional<double> atom;
  if (!wlaw.atomless()) atom = 1 + eps * wlaw.first();
  Kernel ker = make_kernel([&](double x) { return wlaw.cdf((x - 1) / eps); }, 1 + eps * wlaw.support_low(),
                           1 + eps * wlaw.support_high(), atom, delta);

  const int n = opt.grid.points, half = n / 2;
  std::vector<std::vector<double>> h(1, std::vector<double>(n, 0));
  for (int i = half; i < n; ++i) h[0][i] = 0.5 + 0.5 * ramp((i - half) * delta, 2.0);
  std::vector<double> e;
  auto apply = [&](const std::vector<std::vector<double>>& cur, std::vector<std::vector<double>>& out) {
    expect(cur[0], true, ker, e);
    out.assign(1, std::vector<double>(n, 0));
    for (int i = half; i < n; ++i) out[0][i] = law.size_biased(std::clamp(1 - e[i], 0.0, 1.0));
  };
  iterate(h, {1}, apply, opt, stats);
  return make_level(opt.grid, std::move(h[0]), true);
}

CdfSystem solve_system(const OffspringLaw& law, const WeightLaw& wlaw, int k, const SolveOptions& opt,
                       SolveStats* stats) {
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  check_grid(opt.grid);
  const double delta = 2 * opt.grid.T / opt.grid.points;
  std::optional<double> atom;
  if (!wlaw.atomless()) atom = wlaw.first();
  Kernel ker = make_kernel([&](double x) { return wlaw.cdf(x); }, wlaw.support_low(), wlaw.support_high(), atom,
                           delta);

  // Starting plateaus from the regime analysis when it matches k, otherwise
  // evenly spaced.
  RegimeReport regime = macroscopic_law(law);
  std::string warning;
  if (regime.rho >= 1)
    warning = "subcriticality coefficient " + text::exact(regime.rho) + " >= 1: convergence not guaranteed";
  std::vector<double> atoms = regime.atoms;
  bool regime_matches = regime.k == k && !regime.degenerate_family;
  const bool leafless = regime_matches && k >= 2 && law.size_biased(0) == 0 && atoms.front() == 0 && atoms.back() == 0;
  if (leafless) {
    k -= 2;
    atoms = std::vector<double>(atoms.begin() + 1, atoms.end() - 1);
    warning += std::string(warning.empty() ? "" : "; ") + "leafless tree: solving the system without the empty outer levels, k = " +
               std::to_string(k);
  }
  if (stats) stats->warning = warning;
  std::vector<double> plateau(k + 2);
  plateau[0] = 0;
  plateau[k + 1] = 1;
  if (regime_matches) {
    for (int j = 1; j <= k; ++j) plateau[j] = plateau[j - 1] + atoms[j - 1];
  } else {
    for (int j = 1; j <= k; ++j) plateau[j] = static_cast<double>(j) / (k + 1);
  }

  const int n = opt.grid.points, half = n / 2;
  const double width = wlaw.mean() + 1;
  std::vector<std::vector<double>> h(k + 1, std::vector<double>(n, 0));
  std::vector<char> jump(k + 1, 0);
  jump[0] = !leafless;
  if (leafless) {
    for (int i = 0; i < n; ++i) h[0][i] = plateau[1] * ramp((i - half) * delta + width, 2 * width);
  } else {
    for (int i = half; i < n; ++i) h[0][i] = plateau[1] * (0.5 + 0.5 * ramp((i - half) * delta, width));
  }
  for (int j = 1; j <= k; ++j)
    for (int i = 0; i < n; ++i)
      h[j][i] = plateau[j] + (plateau[j + 1] - plateau[j]) * ramp((i - half) * delta + width, 2 * width);

  std::vector<double> e;
  auto apply = [&](const std::vector<std::vector<double>>& cur, std::vector<std::vector<double>>& out) {
    out.assign(k + 1, std::vector<double>(n, 0));
    for (int j = 0; j <= k; ++j) {
      int src = k - j;
      expect(cur[src], jump[src], ker, e);
      for (int i = (jump[j] ? half : 0); i < n; ++i) out[j][i] = law.size_biased(std::clamp(1 - e[i], 0.0, 1.0));
    }
  };
  iterate(h, jump, apply, opt, stats);

  CdfSystem sys;
  sys.k = k;
  sys.leafless = leafless;
  for (int j = 0; j <= k; ++j) sys.levels.push_back(make_level(opt.grid, std::move(h[j]), jump[j]));
  for (int j = 1; j <= k; ++j) sys.plateau.push_back(sys.levels[j].left_limit);
  sys.beta = sys.levels[0].atom0;
  return sys;
}

namespace {

// int (1 - inv(u)) du along the values of a level function, by Simpson's
// rule on each grid increment (the change of variables u = h(t)).
double integral_along(const GridCdf& h, const OffspringLaw& law) {
  int start = h.jump_at_zero ? h.zero_index() : 0;
  auto g = [&](double u) { return 1 - law.size_biased_inverse(u); };
  double acc = 0;
  double prev = h.values[start], g_prev = g(prev);
  for (int i = start + 1; i < h.points(); ++i) {
    double cur = h.values[i];
    if (cur <= prev) continue;
    double g_cur = g(cur);
    acc += (cur - prev) * (g_prev + 4 * g(0.5 * (prev + cur)) + g_cur) / 6;
    prev = cur;
    g_prev = g_cur;
  }
  return acc;
}

double level_value(const CdfSystem& sys, int j) {  // l_j with l_0 = 0, l_{k+1} = 1
  if (j <= 0) return 0;
  if (j > sys.k) return 1;
  return sys.plateau[j - 1];
}

}  // namespace

ConservationResidual conservation_check(const CdfSystem& sys, const OffspringLaw& law) {
  ConservationResidual r;
  const int k = sys.k;
  if (k == 0) return r;
  if (!sys.leafless) {
    double beta = sys.beta;
    double lhs = beta * (1 - law.size_biased_inverse(beta)) + integral_along(sys.levels[0], law);
    double rhs = level_value(sys, k) * level_value(sys, 1) + integral_along(sys.levels[k], law);
    r.atom_identity = lhs - rhs;
    r.max_abs = std::abs(r.atom_identity);
  }
  for (int j = 1; j < k; ++j) {
    double left = level_value(sys, j) * level_value(sys, k - j + 1) + integral_along(sys.levels[j], law);
    double right = level_value(sys, j + 1) * level_value(sys, k - j) + integral_along(sys.levels[k - j], law);
    r.balance.push_back(left - right);
    r.max_abs = std::max(r.max_abs, std::abs(left - right));
  }
  return r;
}

double size_from_system(const CdfSystem& sys, const OffspringLaw& law) {
  double beta = sys.beta;
  double acc = beta * (1 - law.size_biased_inverse(beta));
  for (const GridCdf& h : sys.levels) acc += integral_along(h, law);
  return acc;
}

double size_from_plateau(const CdfSystem& sys, const OffspringLaw& law) {
  // Without leaves the lowest fixed point is 0, below every solved level.
  return (2 - matching_functional(law, sys.leafless ? 0.0 : level_value(sys, 1))) / law.mean();
}

ZetaSampler ZetaSampler::from_system(const CdfSystem& sys) {
  ZetaSampler s;
  s.k_ = sys.k;
  s.sys_ = sys;
  double acc = 0;
  for (const GridCdf& h : sys.levels) {
    acc += h.right_limit - h.left_limit;
    s.cumulative_.push_back(acc);
  }
  for (double& c : s.cumulative_) c /= acc;
  s.cumulative_.back() = 1;
  return s;
}

ZetaSampler ZetaSampler::from_pool(int k, std::vector<LexMsg> pool) {
  if (pool.empty()) throw std::invalid_argument("empty pool");
  ZetaSampler s;
  s.k_ = k;
  s.pool_ = std::move(pool);
  return s;
}

LexMsg ZetaSampler::sample(Rng& rng) const {
  if (!pool_.empty()) return pool_[rng.below(pool_.size())];
  double u = rng.uniform();
  int j = static_cast<int>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin());
  j = std::min(j, k_);
  const GridCdf& h = sys_.levels[j];
  double v = h.left_limit + rng.uniform() * (h.right_limit - h.left_limit);
  return {j, h.inverse(v)};
}

std::vector<double> ZetaSampler::level_masses() const {
  std::vector<double> m(k_ + 1, 0);
  if (!pool_.empty()) {
    for (const LexMsg& x : pool_) m[x.level] += 1.0 / pool_.size();
    return m;
  }
  for (int j = 0; j <= k_; ++j) m[j] = cumulative_[j] - (j ? cumulative_[j - 1] : 0);
  return m;
}

ZetaSampler zeta_prime(const CdfSystem& sys) { return ZetaSampler::from_system(sys); }

LexMsg recursion_step(const OffspringLaw& law, const WeightLaw& wlaw, int k, const ZetaSampler& source, Rng& rng) {
  int children = law.sample_size_biased(rng);
  LexMsg best = LexMsg::bottom();
  for (int c = 0; c < children; ++c) {
    LexMsg m = source.sample(rng);
    best = lexmax(best, offer(k, wlaw.sample(rng), m));
  }
  return lexmax(LexMsg::zero(), best);
}

ZetaSampler population_dynamics(const OffspringLaw& law, const WeightLaw& wlaw, int k, int pool_size,
                                long long iters, RngSeed seed) {
  if (pool_size < 1) throw std::invalid_argument("pool size must be positive");
  Rng rng(seed);
  std::vector<LexMsg> pool(pool_size, LexMsg::zero());
  for (long long it = 0; it < iters; ++it) {
    std::size_t slot = rng.below(pool.size());
    int children = law.sample_size_biased(rng);
    LexMsg best = LexMsg::bottom();
    for (int c = 0; c < children; ++c)
      best = lexmax(best, offer(k, wlaw.sample(rng), pool[rng.below(pool.size())]));
    pool[slot] = lexmax(LexMsg::zero(), best);
  }
  return ZetaSampler::from_pool(k, std::move(pool));
}

double kolmogorov_distance(const GridCdf& h, std::vector<double> samples) {
  if (samples.empty()) return 0;
  std::sort(samples.begin(), samples.end());
  const double span = h.right_limit - h.left_limit;
  auto G = [&](double t) { return (h(t) - h.left_limit) / span; };
  auto G_before = [&](double t) {
    if (h.jump_at_zero && t == 0) return 0.0;
    return G(t);
  };
  const double n = static_cast<double>(samples.size());
  double d = 0;
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    while (j < samples.size() && samples[j] == samples[i]) ++j;
    double t = samples[i];
    d = std::max(d, std::abs(i / n - G_before(t)));
    d = std::max(d, std::abs(j / n - G(t)));
    i = j;
  }
  return d;
}

void write_csv(std::ostream& os, const CdfSystem& sys) {
  const GridCdf& h0 = sys.levels.front();
  os << "# lexmatch-cdf v1 k=" << sys.k << " T=" << text::exact(h0.T) << " delta=" << text::exact(h0.delta)
     << " points=" << h0.points() << " beta=" << text::exact(sys.beta) << " leafless=" << sys.leafless
     << " plateau=";
  for (std::size_t j = 0; j < sys.plateau.size(); ++j) os << (j ? "," : "") << text::exact(sys.plateau[j]);
  os << "\nlevel,t,h\n";
  for (std::size_t j = 0; j < sys.levels.size(); ++j) {
    const GridCdf& h = sys.levels[j];
    for (int i = 0; i < h.points(); ++i) os << j << "," << text::exact(h.node(i)) << "," << text::exact(h.values[i]) << "\n";
  }
}

CdfSystem read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# lexmatch-cdf v1", 0) != 0) throw std::runtime_error("not a lexmatch-cdf v1 file");
  std::istringstream hs(line.substr(17));
  std::string field;
  CdfSystem sys;
  GridSpec grid;
  while (hs >> field) {
    auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "k") sys.k = static_cast<int>(text::to_int(value, "k"));
    if (key == "T") grid.T = text::to_double(value, "T");
    if (key == "points") grid.points = static_cast<int>(text::to_int(value, "points"));
    if (key == "leafless") sys.leafless = text::to_int(value, "leafless") != 0;
  }
  if (!std::getline(is, line) || text::trim(line) != "level,t,h") throw std::runtime_error("missing CSV column header");
  std::vector<std::vector<double>> values(sys.k + 1);
  while (std::getline(is, line)) {
    if (text::trim(line).empty()) continue;
    auto cols = text::split(line, ',');
    if (cols.size() != 3) throw std::runtime_error("bad CSV row '" + line + "'");
    long long j = text::to_int(cols[0], "level");
    if (j < 0 || j > sys.k) throw std::runtime_error("level out of range");
    values[j].push_back(text::to_double(cols[2], "h"));
  }
  for (int j = 0; j <= sys.k; ++j) {
    if (static_cast<int>(values[j].size()) != grid.points) throw std::runtime_error("row count mismatch");
    sys.levels.push_back(make_level(grid, std::move(values[j]), j == 0 && !sys.leafless));
  }
  for (int j = 1; j <= sys.k; ++j) sys.plateau.push_back(sys.levels[j].left_limit);
  sys.beta = sys.levels[0].atom0;
  return sys;
}

}  // namespace lexmatch
