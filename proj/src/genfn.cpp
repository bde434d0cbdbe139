#include "lexmatch/genfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "lexmatch/text.hpp"

namespace lexmatch {

namespace {

double clamp_unit(double x) {
  if (!(x >= -1e-12 && x <= 1 + 1e-12))
    throw std::domain_error("generating function argument outside [0,1]: " + text::exact(x));
  return std::clamp(x, 0.0, 1.0);
}

// k! / (k - r)!
double falling(int k, int r) {
  double out = 1;
  for (int i = 0; i < r; ++i) out *= k - i;
  return out;
}

double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  std::partial_sum(p.begin(), p.end(), c.begin());
  if (!c.empty()) c.back() = 1.0;
  return c;
}

int sample_cdf(const std::vector<double>& cdf, Rng& rng) {
  double u = rng.uniform();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
}

}  // namespace

OffspringLaw OffspringLaw::poisson(double c) {
  if (!(c > 0) || !std::isfinite(c)) throw std::invalid_argument("poisson rate must be positive");
  OffspringLaw law;
  law.family_ = Family::Poisson;
  law.a_ = c;
  law.mean_ = c;
  return law;
}

OffspringLaw OffspringLaw::geometric(double p) {
  if (!(p > 0 && p < 1)) throw std::invalid_argument("geometric parameter must lie in (0,1)");
  OffspringLaw law;
  law.family_ = Family::Geometric;
  law.a_ = p;
  double q = 1 - p;
  // pi(0)=0 fixes the mean: sum_{k>=2} m p q^{k-2} / k = 1.
  law.mean_ = q * q / (p * (-std::log(p) - q));
  return law;
}

OffspringLaw OffspringLaw::binomial(int n, double q) {
  if (n < 1) throw std::invalid_argument("binomial needs at least one trial");
  if (!(q > 0 && q <= 1)) throw std::invalid_argument("binomial probability must lie in (0,1]");
  OffspringLaw law;
  law.family_ = Family::Binomial;
  law.a_ = q;
  law.n_ = n;
  law.mean_ = n * q;
  return law;
}

OffspringLaw OffspringLaw::finite(std::vector<double> pmf) {
  if (pmf.empty()) throw std::invalid_argument("empty pmf");
  if (pmf.size() > static_cast<std::size_t>(kMaxSupport))
    throw std::invalid_argument("pmf support larger than 64");
  double total = 0;
  for (double p : pmf) {
    if (!(p >= 0) || !std::isfinite(p)) throw std::invalid_argument("pmf entries must be >= 0");
    total += p;
  }
  if (std::abs(total - 1) > 1e-12) throw std::invalid_argument("pmf must sum to 1");
  for (double& p : pmf) p /= total;
  while (pmf.size() > 1 && pmf.back() == 0) pmf.pop_back();

  OffspringLaw law;
  law.family_ = Family::FiniteSupport;
  law.mean_ = 0;
  for (std::size_t k = 0; k < pmf.size(); ++k) law.mean_ += k * pmf[k];
  law.pmf_ = std::move(pmf);
  law.cdf_ = cumulative(law.pmf_);
  if (law.mean_ > 0) {
    std::vector<double> biased(law.pmf_.size() - 1);
    for (std::size_t j = 0; j + 1 < law.pmf_.size(); ++j)
      biased[j] = (j + 1) * law.pmf_[j + 1] / law.mean_;
    law.biased_cdf_ = cumulative(biased);
  }
  return law;
}

OffspringLaw OffspringLaw::parse(std::string_view spec) {
  auto parts = text::split(spec, ':');
  const std::string& name = parts[0];
  auto arity = [&](std::size_t n) {
    if (parts.size() != n) throw std::invalid_argument("malformed law spec '" + std::string(spec) + "'");
  };
  if (name == "poisson") {
    arity(2);
    return poisson(text::to_double(parts[1], "poisson rate"));
  }
  if (name == "geom") {
    arity(2);
    return geometric(text::to_double(parts[1], "geometric parameter"));
  }
  if (name == "binom") {
    arity(3);
    return binomial(static_cast<int>(text::to_int(parts[1], "binomial trials")),
                    text::to_double(parts[2], "binomial probability"));
  }
  if (name == "pmf") {
    arity(2);
    std::vector<double> p;
    for (const auto& s : text::split(parts[1], ',')) p.push_back(text::to_double(s, "pmf entry"));
    return finite(std::move(p));
  }
  throw std::invalid_argument("unknown law family '" + name + "'");
}

std::string OffspringLaw::spec() const {
  switch (family_) {
    case Family::Poisson:
      return "poisson:" + text::exact(a_);
    case Family::Geometric:
      return "geom:" + text::exact(a_);
    case Family::Binomial:
      return "binom:" + std::to_string(n_) + ":" + text::exact(a_);
    case Family::FiniteSupport: {
      std::string s = "pmf:";
      for (std::size_t i = 0; i < pmf_.size(); ++i) s += (i ? "," : "") + text::exact(pmf_[i]);
      return s;
    }
  }
  return {};
}

double OffspringLaw::pgf(double x, int order) const {
  x = clamp_unit(x);
  if (order < 0 || order > 2) throw std::invalid_argument("pgf order must be 0, 1 or 2");
  switch (family_) {
    case Family::Poisson:
      return std::pow(a_, order) * std::exp(a_ * (x - 1));
    case Family::Geometric: {
      double p = a_, q = 1 - p;
      double s = 1 - q * x;
      if (order == 0) return mean_ * p / (q * q) * (-std::log1p(-q * x) - q * x);
      if (order == 1) return mean_ * p * x / s;
      return mean_ * p / (s * s);
    }
    case Family::Binomial: {
      if (order > n_) return 0;
      return falling(n_, order) * std::pow(a_, order) * std::pow(1 - a_ + a_ * x, n_ - order);
    }
    case Family::FiniteSupport: {
      double acc = 0;
      for (int k = static_cast<int>(pmf_.size()) - 1; k >= order; --k)
        acc = acc * x + pmf_[k] * falling(k, order);
      return acc;
    }
  }
  return 0;
}

void OffspringLaw::require_size_bias() const {
  if (!has_size_bias()) throw std::domain_error("size-biased law undefined for a law with mean 0");
}

double OffspringLaw::size_biased(double x, int order) const {
  require_size_bias();
  if (order < 0 || order > 1) throw std::invalid_argument("size-biased order must be 0 or 1");
  if (family_ == Family::Poisson) return pgf(x, order);
  return pgf(x, order + 1) / mean_;
}

double OffspringLaw::size_biased_inverse(double u) const {
  require_size_bias();
  if (u >= 1) return 1;
  if (u <= size_biased(0)) return 0;
  double lo = 0, hi = 1;
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    (size_biased(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double OffspringLaw::pmf(int k) const {
  if (k < 0) return 0;
  switch (family_) {
    case Family::Poisson:
      return std::exp(-a_ + k * std::log(a_) - std::lgamma(k + 1.0));
    case Family::Geometric: {
      if (k < 2) return 0;
      double q = 1 - a_;
      return mean_ * a_ / (q * q) * std::pow(q, k) / k;
    }
    case Family::Binomial:
      if (k > n_) return 0;
      if (a_ == 1) return k == n_ ? 1 : 0;
      return std::exp(log_choose(n_, k) + k * std::log(a_) + (n_ - k) * std::log1p(-a_));
    case Family::FiniteSupport:
      return k < static_cast<int>(pmf_.size()) ? pmf_[k] : 0;
  }
  return 0;
}

double OffspringLaw::size_biased_pmf(int k) const {
  require_size_bias();
  if (k < 0) return 0;
  switch (family_) {
    case Family::Poisson:
      return pmf(k);
    case Family::Geometric:
      return k >= 1 ? a_ * std::pow(1 - a_, k - 1) : 0;
    default:
      return (k + 1) * pmf(k + 1) / mean_;
  }
}

int OffspringLaw::sample(Rng& rng) const {
  switch (family_) {
    case Family::Poisson:
      return std::poisson_distribution<int>(a_)(rng.engine());
    case Family::Geometric: {
      double u = rng.uniform();
      int k = 2;
      double acc = pmf(2);
      while (u >= acc) {
        double term = pmf(++k);
        if (term < 1e-300) break;
        acc += term;
      }
      return k;
    }
    case Family::Binomial:
      return std::binomial_distribution<int>(n_, a_)(rng.engine());
    case Family::FiniteSupport:
      return sample_cdf(cdf_, rng);
  }
  return 0;
}

int OffspringLaw::sample_size_biased(Rng& rng) const {
  require_size_bias();
  switch (family_) {
    case Family::Poisson:
      return std::poisson_distribution<int>(a_)(rng.engine());
    case Family::Geometric:
      return 1 + std::geometric_distribution<int>(a_)(rng.engine());
    case Family::Binomial:
      return n_ == 1 ? 0 : std::binomial_distribution<int>(n_ - 1, a_)(rng.engine());
    case Family::FiniteSupport:
      return sample_cdf(biased_cdf_, rng);
  }
  return 0;
}

double pgf_eval(const OffspringLaw& law, double x, int order) {
  if (order != 0 && order != 1) throw std::invalid_argument("order must be 0 or 1");
  if (!(x >= 0 && x <= 1)) throw std::domain_error("x outside [0,1]");
  return law.pgf(x, order);
}

double size_biased_pgf(const OffspringLaw& law, double x, int order) {
  if (!(x >= 0 && x <= 1)) throw std::domain_error("x outside [0,1]");
  return law.size_biased(x, order);
}

FixedPoints double_fixed_points(const OffspringLaw& law, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("tolerance must be positive");
  auto gap = [&](double t) { return law.size_biased(1 - law.size_biased(1 - t)) - t; };

  FixedPoints out;
  bool identity = true;
  for (int i = 1; i <= 10; ++i) {
    if (std::abs(gap(i / 11.0)) >= 10 * tol) {
      identity = false;
      break;
    }
  }
  if (identity) {
    out.degenerate = true;
    return out;
  }

  constexpr int kGrid = 10000;
  std::vector<double> g(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) g[i] = gap(static_cast<double>(i) / kGrid);

  auto add = [&](double t) {
    if (out.points.empty() || t - out.points.back() > 1e-9) out.points.push_back(t);
  };
  for (int i = 0; i <= kGrid; ++i) {
    double t = static_cast<double>(i) / kGrid;
    if (g[i] == 0 || ((i == 0 || i == kGrid) && std::abs(g[i]) < tol)) {
      add(t);
      continue;
    }
    if (i < kGrid && g[i + 1] != 0 && (g[i] < 0) != (g[i + 1] < 0)) {
      double lo = t, hi = static_cast<double>(i + 1) / kGrid;
      double glo = g[i];
      for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        double mid = 0.5 * (lo + hi);
        double gm = gap(mid);
        if (gm == 0) {
          lo = hi = mid;
          break;
        }
        if ((gm < 0) == (glo < 0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      add(0.5 * (lo + hi));
    }
  }
  return out;
}

double matching_functional(const OffspringLaw& law, double x) {
  double s = law.size_biased(1 - x);
  return law.pgf(1 - x) + law.pgf(1 - s) + law.mean() * x * s;
}

double matching_vertex_density(const OffspringLaw& law) {
  if (!law.has_size_bias()) return 0;
  FixedPoints fp = double_fixed_points(law);
  if (fp.degenerate) return 1;

  double best = std::max(matching_functional(law, 0), matching_functional(law, 1));
  for (double t : fp.points) best = std::max(best, matching_functional(law, t));

  // Safety scan; the maximum sits at a fixed point, so this only matters if
  // a tangential fixed point escaped the sign-change search.
  constexpr int kScan = 2000;
  int arg = 0;
  double scan = -1;
  for (int i = 0; i <= kScan; ++i) {
    double v = matching_functional(law, static_cast<double>(i) / kScan);
    if (v > scan) {
      scan = v;
      arg = i;
    }
  }
  if (scan > best + 1e-12) {
    double lo = std::max(0, arg - 1) / double(kScan), hi = std::min(kScan, arg + 1) / double(kScan);
    const double r = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 100; ++it) {
      double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
      if (matching_functional(law, a) < matching_functional(law, b))
        lo = a;
      else
        hi = b;
    }
    best = std::max(scan, matching_functional(law, 0.5 * (lo + hi)));
  }
  return 2 - best;
}

KarpSipser karp_sipser_poisson(double c) {
  OffspringLaw law = OffspringLaw::poisson(c);
  FixedPoints fp = double_fixed_points(law);
  KarpSipser ks;
  ks.gamma_low = fp.points.front();
  ks.gamma_high = fp.points.back();
  double lo = ks.gamma_low, hi = ks.gamma_high;
  ks.beta = c * lo * hi + lo + hi - 1;
  ks.edge_density = (2 - hi - lo - c * lo * hi) / c;
  ks.vertex_density = c * ks.edge_density;
  return ks;
}

namespace {

using Point3 = std::array<double, 3>;

// Maximises f by Nelder-Mead from `start` with initial simplex size `step`.
template <class F>
Point3 nelder_mead_max(F f, Point3 start, double step, int iters) {
  std::array<Point3, 4> s;
  std::array<double, 4> v;
  s[0] = start;
  for (int i = 0; i < 3; ++i) {
    s[i + 1] = start;
    s[i + 1][i] += (start[i] + step <= 1 ? step : -step);
  }
  for (int i = 0; i < 4; ++i) v[i] = f(s[i]);

  auto affine = [](const Point3& a, const Point3& b, double t) {
    Point3 r;
    for (int i = 0; i < 3; ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
  };
  for (int it = 0; it < iters; ++it) {
    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] > v[b]; });
    int best = order[0], worst = order[3], second = order[2];
    if (std::abs(v[best] - v[worst]) < 1e-15) break;
    Point3 centroid{0, 0, 0};
    for (int i = 0; i < 3; ++i)
      for (int d = 0; d < 3; ++d) centroid[d] += s[order[i]][d] / 3;

    Point3 refl = affine(centroid, s[worst], -1);
    double fr = f(refl);
    if (fr > v[best]) {
      Point3 exp = affine(centroid, s[worst], -2);
      double fe = f(exp);
      if (fe > fr) {
        s[worst] = exp;
        v[worst] = fe;
      } else {
        s[worst] = refl;
        v[worst] = fr;
      }
    } else if (fr > v[second]) {
      s[worst] = refl;
      v[worst] = fr;
    } else {
      Point3 con = affine(centroid, s[worst], 0.5);
      double fc = f(con);
      if (fc > v[worst]) {
        s[worst] = con;
        v[worst] = fc;
      } else {
        for (int i = 0; i < 4; ++i) {
          if (i == best) continue;
          s[i] = affine(s[best], s[i], 0.5);
          v[i] = f(s[i]);
        }
      }
    }
  }
  int arg = static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
  return s[arg];
}

}  // namespace

double subcriticality_coefficient(const OffspringLaw& law, int grid) {
  if (grid < 100) throw std::invalid_argument("grid must be at least 100");
  law.size_biased(0);  // throws for laws without a size-biased version

  auto objective = [&](double x1, double x2, double lambda) {
    double a = lambda * law.size_biased(1 - x1, 1) + (1 - lambda) * law.size_biased(1 - x2, 1);
    double b = lambda * law.size_biased(1 - x1) + (1 - lambda) * law.size_biased(1 - x2);
    return a * law.size_biased(std::clamp(1 - b, 0.0, 1.0), 1);
  };

  std::vector<double> xs(grid), da(grid), db(grid);
  for (int i = 0; i < grid; ++i) {
    xs[i] = static_cast<double>(i) / (grid - 1);
    da[i] = law.size_biased(1 - xs[i], 1);
    db[i] = law.size_biased(1 - xs[i]);
  }
  constexpr int kLambda = 50;

  struct Candidate {
    double value;
    Point3 at;
  };
  std::vector<Candidate> top;
  auto offer = [&](double value, Point3 at) {
    constexpr std::size_t kKeep = 6;
    if (top.size() == kKeep && value <= top.back().value) return;
    top.push_back({value, at});
    std::sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.value > b.value; });
    if (top.size() > kKeep) top.pop_back();
  };

  for (int i = 0; i < grid; ++i) {
    for (int j = i; j < grid; ++j) {
      double best = -1;
      double best_lambda = 0;
      for (int l = 0; l < kLambda; ++l) {
        double lambda = static_cast<double>(l) / (kLambda - 1);
        double a = lambda * da[i] + (1 - lambda) * da[j];
        double b = lambda * db[i] + (1 - lambda) * db[j];
        double v = a * law.size_biased(std::clamp(1 - b, 0.0, 1.0), 1);
        if (v > best) {
          best = v;
          best_lambda = lambda;
        }
      }
      if (top.size() < 6 || best > top.back().value) offer(best, {xs[i], xs[j], best_lambda});
    }
  }

  auto clamped = [&](const Point3& p) {
    return objective(std::clamp(p[0], 0.0, 1.0), std::clamp(p[1], 0.0, 1.0), std::clamp(p[2], 0.0, 1.0));
  };
  double best = top.front().value;
  for (const auto& c : top) {
    Point3 p = c.at;
    double step = 1.0 / grid;
    for (int round = 0; round < 4; ++round) {
      p = nelder_mead_max(clamped, p, step, 400);
      step *= 0.1;
    }
    best = std::max(best, clamped(p));
  }
  return best;
}

RegimeReport macroscopic_law(const OffspringLaw& law) {
  RegimeReport r;
  FixedPoints fp = double_fixed_points(law);
  r.rho = subcriticality_coefficient(law);
  if (fp.degenerate) {
    r.degenerate_family = true;
    r.k = 0;
    r.atoms = {1.0};
    r.subcritical = false;
    return r;
  }
  r.fixed_points = fp.points;
  r.unique_double_fp = fp.points.size() == 1;
  r.subcritical = r.rho < 1 && r.unique_double_fp;

  double best = -std::numeric_limits<double>::infinity();
  for (double t : fp.points) best = std::max(best, matching_functional(law, t));
  std::vector<double> argmax;
  for (double t : fp.points)
    if (matching_functional(law, t) > best - 1e-9) argmax.push_back(t);

  if (argmax.size() == 1) {
    r.k = 1;
    r.atoms = {argmax[0], 1 - argmax[0]};
  } else if (argmax.size() == 2) {
    r.k = 2;
    r.atoms = {argmax[0], argmax[1] - argmax[0], 1 - argmax[1]};
  } else {
    r.k = 0;
    r.atoms = {1.0};
  }
  return r;
}

}  // namespace lexmatch
