#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library.

#include <cmath>
#include <functional>

namespace oracle {

inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi), fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Fixed point of t = exp(-c t).
inline double poisson_gamma(double c) {
  return bisect([c](double t) { return t - std::exp(-c * t); }, 0, 1);
}

// Extreme solutions of the pair low = exp(-c high), high = exp(-c low).
struct Pair {
  double low, high;
};
inline Pair poisson_extremes(double c) {
  auto g = [c](double t) { return std::exp(-c * std::exp(-c * t)) - t; };
  // Smallest root: scan up from 0; largest: scan down from 1.
  const int steps = 100000;
  double low = poisson_gamma(c), high = low;
  for (int i = 0; i < steps; ++i) {
    double a = static_cast<double>(i) / steps, b = static_cast<double>(i + 1) / steps;
    if ((g(a) < 0) != (g(b) < 0) || g(a) == 0) {
      low = bisect(g, a, b);
      break;
    }
  }
  for (int i = steps; i > 0; --i) {
    double a = static_cast<double>(i - 1) / steps, b = static_cast<double>(i) / steps;
    if ((g(a) < 0) != (g(b) < 0) || g(b) == 0) {
      high = bisect(g, a, b);
      break;
    }
  }
  return {low, high};
}

// max over y in [exp(-c), 1] of c^2 y exp(-c y), by dense scan plus
// golden-section refinement.
inline double poisson_rho(double c) {
  auto f = [c](double y) { return c * c * y * std::exp(-c * y); };
  double lo = std::exp(-c), hi = 1;
  const int steps = 20000;
  double best_y = lo;
  for (int i = 0; i <= steps; ++i) {
    double y = lo + (hi - lo) * i / steps;
    if (f(y) > f(best_y)) best_y = y;
  }
  double a = std::max(lo, best_y - (hi - lo) / steps), b = std::min(hi, best_y + (hi - lo) / steps);
  const double r = (std::sqrt(5.0) - 1) / 2;
  for (int i = 0; i < 200; ++i) {
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    if (f(x1) < f(x2))
      a = x1;
    else
      b = x2;
  }
  return std::max(f(best_y), f(0.5 * (a + b)));
}

}  // namespace oracle
