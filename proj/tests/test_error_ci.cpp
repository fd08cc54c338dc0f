#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "nsmc/error_ci.hpp"
#include "nsmc/fields.hpp"
#include "nsmc/heat.hpp"
#include "nsmc/rng.hpp"

using namespace nsmc;

TEST_CASE("tail template") {
  const TailModel m = make_tail_model(1.0, 1.0, 1.0);
  CHECK(tail_probability(3.0, m) == doctest::Approx(std::exp(-4.5)).epsilon(1e-12));
  CHECK(tail_probability(3.0, m) == doctest::Approx(0.011109).epsilon(1e-4));

  // decreasing beyond 3 sigma
  double prev = tail_probability(3.0, m);
  for (double v = 3.1; v < 10.0; v += 0.1) {
    const double q = tail_probability(v, m);
    CHECK(q < prev);
    prev = q;
  }
  CHECK(tail_probability(40.0, m) < 1e-200);

  CHECK_THROWS_AS(make_tail_model(1.0, 11.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(make_tail_model(0.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("quantile inversion") {
  const TailModel m = make_tail_model(1.0, 1.0, 1.0);

  SUBCASE("closed form at kappa = 1") {
    const double v = solve_quantile(0.01, m);
    CHECK(v == doctest::Approx(std::sqrt(-2.0 * std::log(0.01))).epsilon(1e-10));
    CHECK(v == doctest::Approx(3.03485).epsilon(1e-5));
  }

  SUBCASE("round trip at 4 sigma") {
    const double delta = tail_probability(4.0, m);
    CHECK(solve_quantile(delta, m) == doctest::Approx(4.0).epsilon(1e-10));
  }

  SUBCASE("round trips across the valid range") {
    const TailModel m2 = make_tail_model(0.7, 2.0, 1.4);
    for (double v = 3.0 * m2.sigma; v <= 8.0 * m2.sigma; v += 0.25) {
      const double delta = tail_probability(v, m2);
      if (!(delta < tail_probability(3.0 * m2.sigma, m2))) continue;
      CHECK(solve_quantile(delta, m2) == doctest::Approx(v).epsilon(1e-10));
    }
  }

  SUBCASE("monotene in delta") {
    CHECK(solve_quantile(0.001, m) > solve_quantile(0.01, m));
  }

  SUBCASE("no root above 3 sigma rejected with advice") {
    CHECK_THROWS_AS(solve_quantile(0.5, m), std::invalid_argument);
  }
}

TEST_CASE("radius arithmetic") {
  CHECK(confidence_radius(3.0, 9) == doctest::Approx(1.0));
  CHECK(confidence_radius(3.0, 36) == doctest::Approx(0.5));
  CHECK(confidence_radius(0.0, 5) == doctest::Approx(0.0));
}

TEST_CASE("empirical tail fit") {
  SUBCASE("scaled half-normal replicates recover the scale") {
    RandomStream s(11);
    std::vector<double> norms(200);
    for (std::size_t i = 0; i < norms.size(); ++i) {
      RandomStream sub = s.child(i);
      norms[i] = 2.0 * std::fabs(sub.normal());
    }
    const TailModel m = empirical_tail_fit(norms);
    CHECK(m.sigma > 1.6);
    CHECK(m.sigma < 2.4);
  }

  SUBCASE("scale equivariance") {
    RandomStream s(12);
    std::vector<double> norms(100), doubled(100);
    for (std::size_t i = 0; i < norms.size(); ++i) {
      RandomStream sub = s.child(i);
      norms[i] = std::fabs(sub.normal());
      doubled[i] = 2.0 * norms[i];
    }
    CHECK(empirical_tail_fit(doubled).sigma ==
          doctest::Approx(2.0 * empirical_tail_fit(norms).sigma).epsilon(1e-12));
  }

  SUBCASE("degenerate and undersized samples rejected") {
    std::vector<double> constant(50, 1.0);
    CHECK_THROWS_AS(empirical_tail_fit(constant), std::invalid_argument);
    std::vector<double> few{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(empirical_tail_fit(few), std::invalid_argument);
  }
}

TEST_CASE("combined error and depth choice") {
  SUBCASE("closed arithmetic") {
    CHECK(combined_error(0.5, 2, 1000000, 1.0, 3) == doctest::Approx(1.151).epsilon(1e-12));
    // large budgets leave only the deterministic part
    CHECK(combined_error(0.5, 2, 4LL << 40, 1.0, 3) ==
          doctest::Approx(0.25).epsilon(1e-3));
    // vanishing contraction leaves only the stochastic part
    CHECK(combined_error(1e-12, 2, 1000000, 1.0, 3) ==
          doctest::Approx(901.0 / 1000.0).epsilon(1e-9));
  }

  SUBCASE("brute force agreement on a grid of regimes") {
    for (double q : {0.2, 0.35, 0.5, 0.65, 0.8}) {
      for (long long N : {10000LL, 100000LL, 1000000LL, 100000000LL, 10000000000LL}) {
        int best = 0;
        double best_err = 1e300;
        for (int n = 1; n <= 8; ++n) {
          const BigInt dn = d_sequence(n, 3);
          if (dn * dn > N) continue;
          const double err = combined_error(q, n, N, 1.0, 3);
          if (err < best_err) {
            best_err = err;
            best = n;
          }
        }
        if (best == 0) {
          CHECK_THROWS_AS(optimal_n(q, N, 1.0, 3, 8), std::invalid_argument);
        } else {
          CHECK(optimal_n(q, N, 1.0, 3, 8) == best);
        }
      }
    }
  }

  SUBCASE("reference regime picks depth one") {
    CHECK(optimal_n(0.5, 1000000, 1.0, 3, 8) == 1);
    CHECK(combined_error(0.5, 1, 1000000, 1.0, 3) == doctest::Approx(0.51).epsilon(1e-12));
  }

  SUBCASE("infeasible when the budget is below the first count") {
    CHECK_THROWS_AS(optimal_n(0.5, 99, 1.0, 3, 8), std::invalid_argument);
  }

  SUBCASE("minimizer is non-decreasing in the budget") {
    int prev = 1;
    for (long long N : {100LL, 10000LL, 1000000LL, 100000000LL,
                        10000000000LL, 1000000000000LL}) {
      if (N < 100) continue;
      const int n_star = optimal_n(0.3, N, 1.0, 3, 8);
      CHECK(n_star >= prev);
      prev = n_star;
    }
  }
}

TEST_CASE("confidence report for replicate runs") {
  SUBCASE("heat benchmark coverage") {
    const TestField bump(FieldKind::gaussian_bump, {1.0, 1.0}, 1);
    SpaceTimeGrid grid;
    grid.points = {{{0.0}, 1.0}, {{0.6}, 1.0}, {{-1.1}, 1.0}};
    const long long N = 2000;

    const auto replicate_norm = [&](std::uint64_t seed) {
      double sup = 0.0;
      for (const auto& pt : grid.points) {
        const EstimateWithError e = semigroup_mc(bump, pt.x, pt.t, N, RandomStream(seed));
        sup = std::max(sup, std::fabs(e.value - heat_exact(bump, pt.x, pt.t)));
      }
      return sup;
    };

    std::vector<double> fit_norms;
    for (int r = 0; r < 200; ++r)
      fit_norms.push_back(std::sqrt(static_cast<double>(N)) * replicate_norm(1000 + r));
    const ConfidenceReport report = ci_for_run(fit_norms, N, 0.05);
    CHECK(report.radius > 0.0);

    int covered = 0;
    for (int r = 0; r < 200; ++r)
      if (replicate_norm(50000 + r) <= report.radius) ++covered;
    CHECK(covered >= 180);  // 90% of 200
  }

  SUBCASE("radius scales with the square root of the budget") {
    RandomStream s(3);
    std::vector<double> norms(100);
    for (std::size_t i = 0; i < norms.size(); ++i) {
      RandomStream sub = s.child(i);
      norms[i] = std::fabs(sub.normal());
    }
    const ConfidenceReport r1 = ci_for_run(norms, 1000, 0.05);
    const ConfidenceReport r2 = ci_for_run(norms, 10000, 0.05);
    CHECK(r1.radius == doctest::Approx(std::sqrt(10.0) * r2.radius).epsilon(1e-12));
  }

  SUBCASE("degenerate zero-field replicates are rejected as a fit") {
    std::vector<double> zeros(60, 0.0);
    CHECK_THROWS_AS(ci_for_run(zeros, 100, 0.05), std::invalid_argument);
  }
}
