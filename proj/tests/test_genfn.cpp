#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "lexmatch/genfn.hpp"
#include "lexmatch/rng.hpp"
#include "oracles.hpp"

using namespace lexmatch;

namespace {

const double kGamma1 = oracle::poisson_gamma(1.0);

OffspringLaw random_law(Rng& rng) {
  switch (rng.below(4)) {
    case 0: return OffspringLaw::poisson(0.1 + 4 * rng.uniform());
    case 1: return OffspringLaw::geometric(0.05 + 0.9 * rng.uniform());
    case 2: return OffspringLaw::binomial(1 + static_cast<int>(rng.below(8)), 0.05 + 0.9 * rng.uniform());
    default: {
      std::vector<double> pmf(2 + rng.below(10));
      double sum = 0;
      for (double& p : pmf) sum += p = rng.uniform();
      pmf[1] += 0.1;  // keep the mean positive
      sum += 0.1;
      for (double& p : pmf) p /= sum;
      return OffspringLaw::finite(pmf);
    }
  }
}

}  // namespace

TEST_CASE("pgf values") {
  auto p1 = OffspringLaw::poisson(1);
  CHECK(pgf_eval(p1, 1, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pgf_eval(p1, 0.5, 0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(pgf_eval(p1, 1, 1) == doctest::Approx(1.0));
  auto two = OffspringLaw::finite({0, 0, 1});
  CHECK(pgf_eval(two, 0.3, 0) == doctest::Approx(0.09).epsilon(1e-15));
  CHECK_THROWS_AS(pgf_eval(p1, 1.5, 0), std::domain_error);
  CHECK_THROWS_AS(pgf_eval(p1, -0.1, 0), std::domain_error);
}

TEST_CASE("size-biased pgf") {
  auto p = OffspringLaw::poisson(2.5);
  for (double x : {0.0, 0.2, 0.7, 1.0}) CHECK(size_biased_pgf(p, x, 0) == doctest::Approx(pgf_eval(p, x, 0)).epsilon(1e-14));
  CHECK(size_biased_pgf(OffspringLaw::finite({0, 0, 1}), 0.3, 0) == doctest::Approx(0.3));
  // phi'(0)/phi'(1) for Binomial(3, 1/2): 3 * 0.5 * 0.25 / 1.5.
  CHECK(size_biased_pgf(OffspringLaw::binomial(3, 0.5), 0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(size_biased_pgf(p, 1.01, 0), std::domain_error);
}

TEST_CASE("geometric family has the stated size-biased generating function") {
  for (double p : {0.2, 0.5, 0.8}) {
    auto law = OffspringLaw::geometric(p);
    for (double x : {0.0, 0.3, 0.9}) CHECK(law.size_biased(x) == doctest::Approx(p * x / (1 - (1 - p) * x)).epsilon(1e-10));
    CHECK(law.mean() == doctest::Approx((1 - p) * (1 - p) / (p * (-std::log(p) - (1 - p)))).epsilon(1e-10));
  }
}

TEST_CASE("law specs round-trip") {
  for (const char* s : {"poisson:1.5", "geom:0.5", "binom:3:0.5", "pmf:0.2,0.5,0.3"}) {
    auto law = OffspringLaw::parse(s);
    auto again = OffspringLaw::parse(law.spec());
    CHECK(again.mean() == law.mean());
    CHECK(again.pgf(0.4) == law.pgf(0.4));
  }
  CHECK_THROWS(OffspringLaw::parse("poisson"));
  CHECK_THROWS(OffspringLaw::parse("pmf:0.5,0.4"));
  CHECK_THROWS(OffspringLaw::parse("pmf:-0.5,1.5"));
  CHECK_THROWS(OffspringLaw::parse("cauchy:1"));
}

TEST_CASE("normalisation holds for random laws") {
  Rng rng(11, 0);
  for (int i = 0; i < 200; ++i) {
    auto law = random_law(rng);
    CHECK(std::abs(law.pgf(1) - 1) < 1e-12);
    CHECK(std::abs(law.size_biased(1) - 1) < 1e-12);
    CHECK(law.pgf(1, 1) == doctest::Approx(law.mean()).epsilon(1e-10));
  }
}

TEST_CASE("size-biased inverse") {
  Rng rng(12, 0);
  for (int i = 0; i < 100; ++i) {
    auto law = random_law(rng);
    if (law.size_biased(0) == 1) continue;  // constant: no inverse to check
    double x = rng.uniform();
    CHECK(law.size_biased_inverse(law.size_biased(x)) == doctest::Approx(x).epsilon(1e-9));
  }
}

TEST_CASE("double fixed points") {
  SUBCASE("Poisson(1) has one") {
    auto fp = double_fixed_points(OffspringLaw::poisson(1));
    REQUIRE(fp.points.size() == 1);
    CHECK(!fp.degenerate);
    CHECK(fp.points[0] == doctest::Approx(kGamma1).epsilon(1e-11));
  }
  SUBCASE("Poisson(3) has three, conjugate at the ends") {
    auto law = OffspringLaw::poisson(3);
    auto fp = double_fixed_points(law);
    REQUIRE(fp.points.size() == 3);
    auto ref = oracle::poisson_extremes(3);
    CHECK(fp.points.front() == doctest::Approx(ref.low).epsilon(1e-10));
    CHECK(fp.points.back() == doctest::Approx(ref.high).epsilon(1e-10));
    CHECK(std::abs(fp.points.back() - std::exp(-3 * fp.points.front())) < 1e-9);
    CHECK(fp.points[1] == doctest::Approx(oracle::poisson_gamma(3)).epsilon(1e-10));
  }
  SUBCASE("geometric laws are degenerate") {
    for (double p : {0.3, 0.5, 0.7}) CHECK(double_fixed_points(OffspringLaw::geometric(p)).degenerate);
  }
  SUBCASE("deterministic binary is degenerate") { CHECK(double_fixed_points(OffspringLaw::finite({0, 0, 1})).degenerate); }
}

TEST_CASE("fixed points satisfy the map and are symmetric under t -> phi^(1-t)") {
  Rng rng(13, 0);
  for (int i = 0; i < 100; ++i) {
    auto law = random_law(rng);
    auto fp = double_fixed_points(law);
    if (fp.degenerate) continue;
    const auto& pts = fp.points;
    REQUIRE(!pts.empty());
    for (double t : pts) CHECK(std::abs(t - law.size_biased(1 - law.size_biased(1 - t))) < 1e-9);
    for (std::size_t j = 0; j < pts.size(); ++j)
      CHECK(std::abs(law.size_biased(1 - pts[j]) - pts[pts.size() - 1 - j]) < 1e-9);
  }
}

TEST_CASE("matching functional") {
  Rng rng(14, 0);
  for (int i = 0; i < 20; ++i) {
    auto law = random_law(rng);
    CHECK(matching_functional(law, 0) == doctest::Approx(1 + law.pgf(0)).epsilon(1e-12));
  }
  CHECK(matching_functional(OffspringLaw::poisson(1), kGamma1) ==
        doctest::Approx(2 * kGamma1 + kGamma1 * kGamma1).epsilon(1e-12));
  auto p3 = OffspringLaw::poisson(3);
  auto ends = oracle::poisson_extremes(3);
  CHECK(std::abs(matching_functional(p3, ends.low) - matching_functional(p3, ends.high)) < 1e-9);
}

TEST_CASE("matching vertex density") {
  CHECK(matching_vertex_density(OffspringLaw::poisson(1)) ==
        doctest::Approx(2 - 2 * kGamma1 - kGamma1 * kGamma1).epsilon(1e-10));
  CHECK(matching_vertex_density(OffspringLaw::finite({1})) == 0);
  CHECK(matching_vertex_density(OffspringLaw::geometric(0.4)) == 1);
  CHECK(matching_vertex_density(OffspringLaw::finite({0, 1})) == doctest::Approx(1.0));
}

TEST_CASE("Karp-Sipser formulas") {
  auto ks1 = karp_sipser_poisson(1);
  CHECK(ks1.gamma_low == doctest::Approx(kGamma1).epsilon(1e-10));
  CHECK(ks1.gamma_high == doctest::Approx(kGamma1).epsilon(1e-10));
  CHECK(ks1.vertex_density == doctest::Approx(matching_vertex_density(OffspringLaw::poisson(1))).epsilon(1e-10));
  for (double c : {0.5, 2.0, 3.0, 5.0}) {
    auto ks = karp_sipser_poisson(c);
    CHECK(std::abs(ks.gamma_high - std::exp(-c * ks.gamma_low)) < 1e-10);
    CHECK(std::abs(ks.gamma_low - std::exp(-c * ks.gamma_high)) < 1e-10);
    CHECK(std::abs(ks.beta - (c * ks.gamma_low * ks.gamma_high + ks.gamma_low + ks.gamma_high - 1)) < 1e-12);
    CHECK(ks.vertex_density == c * ks.edge_density);
    auto ref = oracle::poisson_extremes(c);
    CHECK(ks.gamma_low == doctest::Approx(ref.low).epsilon(1e-9));
    CHECK(ks.vertex_density == doctest::Approx(matching_vertex_density(OffspringLaw::poisson(c))).epsilon(1e-8));
  }
}

TEST_CASE("subcriticality coefficient for Poisson laws") {
  CHECK(std::abs(subcriticality_coefficient(OffspringLaw::poisson(1)) - std::exp(-1.0)) < 1e-6);
  CHECK(std::abs(subcriticality_coefficient(OffspringLaw::poisson(2)) - 2 / std::exp(1.0)) < 1e-6);
  CHECK(std::abs(subcriticality_coefficient(OffspringLaw::poisson(std::exp(1.0))) - 1) < 1e-3);
  for (double c : {0.3, 0.8, 1.5, 2.4, 4.0})
    CHECK(std::abs(subcriticality_coefficient(OffspringLaw::poisson(c)) - oracle::poisson_rho(c)) < 1e-6);
}

TEST_CASE("subcriticality coefficient dominates constant laws of X") {
  Rng rng(15, 0);
  for (int l = 0; l < 5; ++l) {
    auto law = random_law(rng);
    double rho = subcriticality_coefficient(law);
    for (int i = 0; i < 100; ++i) {
      double x = rng.uniform();
      double at_const = law.size_biased(1 - x, 1) * law.size_biased(1 - law.size_biased(1 - x), 1);
      CHECK(rho >= at_const - 1e-12);
    }
  }
}

TEST_CASE("macroscopic law") {
  auto r1 = macroscopic_law(OffspringLaw::poisson(1));
  CHECK(r1.k == 1);
  REQUIRE(r1.atoms.size() == 2);
  CHECK(r1.atoms[0] == doctest::Approx(kGamma1).epsilon(1e-10));
  CHECK(r1.atoms[1] == doctest::Approx(1 - kGamma1).epsilon(1e-10));
  CHECK(r1.unique_double_fp);
  CHECK(r1.subcritical);

  auto r3 = macroscopic_law(OffspringLaw::poisson(3));
  CHECK(r3.k == 2);
  REQUIRE(r3.atoms.size() == 3);
  CHECK(std::abs(r3.atoms[0] + r3.atoms[1] + r3.atoms[2] - 1) < 1e-10);
  auto ends = oracle::poisson_extremes(3);
  CHECK(r3.atoms[0] == doctest::Approx(ends.low).epsilon(1e-9));
  CHECK(r3.atoms[1] == doctest::Approx(ends.high - ends.low).epsilon(1e-9));
  CHECK(!r3.unique_double_fp);
  CHECK(!r3.subcritical);

  auto deg = macroscopic_law(OffspringLaw::finite({0, 0, 1}));
  CHECK(deg.degenerate_family);

  Rng rng(16, 0);
  for (int i = 0; i < 30; ++i) {
    auto r = macroscopic_law(random_law(rng));
    double sum = 0;
    for (double a : r.atoms) sum += a;
    CHECK(std::abs(sum - 1) < 1e-10);
    if (r.subcritical) CHECK(r.unique_double_fp);
  }
}
