#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "nsmc/heat.hpp"
#include "nsmc/iteration.hpp"
#include "nsmc/quadrature.hpp"

using namespace nsmc;

namespace {

std::vector<TestField> bump_initial(int d, double amp = 1.0) {
  std::vector<TestField> a;
  for (int i = 0; i < d; ++i)
    a.emplace_back(FieldKind::gaussian_bump, std::vector<double>{amp, 1.0}, d);
  return a;
}

}  // namespace

TEST_CASE("expansion structure") {
  SUBCASE("first iterate: the source leaf plus one transported product") {
    const ExpansionPlan plan = expand_terms(1, 3);
    CHECK(plan.terms.size() == 2);
    CHECK(plan.counts.at(1) == 1);
    CHECK(plan.counts.at(2) == 1);
    CHECK(term_to_string(*plan.terms[1]) == "C(P(u0,du0))");
  }

  SUBCASE("second iterate reproduces the four operator terms") {
    const ExpansionPlan plan = expand_terms(2, 3);
    CHECK(plan.terms.size() == 5);
    std::multiset<std::string> shapes;
    for (const auto& t : plan.terms) shapes.insert(term_to_string(*t));
    CHECK(shapes.count("u0") == 1);
    CHECK(shapes.count("C(P(u0,du0))") == 1);
    CHECK(shapes.count("C(P(u0,G(P(u0,du0))))") == 1);
    CHECK(shapes.count("C(P(C(P(u0,du0)),du0))") == 1);
    CHECK(shapes.count("C(P(C(P(u0,du0)),G(P(u0,du0))))") == 1);
  }

  SUBCASE("group sizes equal the polynomial coefficients up to n=4") {
    for (int n = 1; n <= 4; ++n) {
      const ExpansionPlan plan = expand_terms(n, 1);
      for (const auto& [deg, count] : plan.counts) CHECK(count == coeff_A(deg, n));
      // and the groups cover every coefficient
      BigInt total = 0;
      for (const auto& [deg, count] : plan.counts) total += count;
      CHECK(total == picard_poly(n).eval_at_one());
    }
  }

  SUBCASE("scalar summand counts match the integer recursion") {
    CHECK(expand_terms(1, 3).scalar_summands == d_sequence(1, 3));
    CHECK(expand_terms(2, 3).scalar_summands == d_sequence(2, 3));
    CHECK(expand_terms(1, 5).scalar_summands == d_sequence(1, 5));
    CHECK(expand_terms(2, 2).scalar_summands == d_sequence(2, 2));
  }

  SUBCASE("low-degree groups stabilize across depths") {
    for (int n = 2; n <= 4; ++n) {
      const ExpansionPlan a = expand_terms(n, 1);
      const ExpansionPlan b = expand_terms(n + 1, 1);
      for (int k = 1; k <= n - 1; ++k) {
        std::multiset<std::string> ga, gb;
        for (const auto& t : a.group(k)) ga.insert(term_to_string(*t));
        for (const auto& t : b.group(k)) gb.insert(term_to_string(*t));
        CHECK(ga == gb);
      }
    }
  }

  SUBCASE("memory guard refuses oversized expansions") {
    CHECK_THROWS_AS(expand_terms(4, 3), std::runtime_error);  // 4.8e14 templates
    CHECK_NOTHROW(expand_terms(4, 3, BigInt("1000000000000000")));
  }
}

TEST_CASE("term signatures") {
  const ExpansionPlan plan = expand_terms(2, 3);
  for (const auto& t : plan.terms) {
    const TermSignature sig = term_signature(*t);
    CHECK(sig.l1 + sig.l2 == sig.degree - 1);
  }
  // the bare leaf
  const TermSignature leaf = term_signature(*plan.terms[0]);
  CHECK(leaf.l1 == 0);
  CHECK(leaf.l2 == 0);
  CHECK(leaf.degree == 1);
  // w (.) v
  const TermSignature wv = term_signature(*expand_terms(1, 3).terms[1]);
  CHECK(wv.l1 == 1);
  CHECK(wv.l2 == 0);
  CHECK(wv.degree == 2);
  // the depth-3 chain C(P(u0,G(P(u0,du0)))) has signature (1,1,3)
  for (const auto& t : plan.terms) {
    if (term_to_string(*t) == "C(P(u0,G(P(u0,du0))))") {
      const TermSignature sig = term_signature(*t);
      CHECK(sig.l1 == 1);
      CHECK(sig.l2 == 1);
      CHECK(sig.degree == 3);
    }
  }
}

TEST_CASE("term evaluation") {
  SUBCASE("zero source annihilates every term") {
    std::vector<TestField> zero{TestField(FieldKind::constant, {0.0}, 1)};
    const ExactU0 u0(zero);
    const ExpansionPlan plan = expand_terms(2, 1);
    const std::vector<double> x{0.2};
    for (const auto& t : plan.terms) {
      const EstimateWithError e = evaluate_term_mc(*t, u0, x, 1.0, 0, 50, RandomStream(3));
      CHECK(e.value == 0.0);
    }
  }

  SUBCASE("the first product term matches a 2-d quadrature oracle (d=1)") {
    const std::vector<TestField> a = bump_initial(1);
    const ExactU0 u0(a);
    const TermPtr term = expand_terms(1, 1).terms[1];
    const std::vector<double> x{0.3};
    const double t = 0.8;

    const PathIntegrand h = [&](const PathPoint& p) {
      const auto y = p.y_last();
      const double s = p.s.back();
      const RandomStream dummy(0);
      return u0.value(y, s, 0, dummy) * u0.gradient(y, s, 0, 0, dummy);
    };
    const OracleResult oracle = quadrature_oracle(h, TermKernelSpec::pure_plain(1), x, t, 1);
    CHECK(oracle.error_estimate < 1e-8);

    const int runs = 50;
    double mean = 0.0, pooled = 0.0;
    for (int r = 0; r < runs; ++r) {
      const EstimateWithError e = evaluate_term_mc(*term, u0, x, t, 0, 4000, RandomStream(40 + r));
      mean += e.value;
      pooled += e.stderr_ * e.stderr_;
    }
    mean /= runs;
    CHECK(std::fabs(mean - oracle.value) < 4.0 * std::sqrt(pooled) / runs);
  }

  SUBCASE("degree-k homogeneity is exact on fixed streams") {
    const double lambda = 1.7;
    const ExactU0 u0(bump_initial(2));
    const ExactU0 u0_scaled(bump_initial(2, lambda));
    const ExpansionPlan plan = expand_terms(2, 2);
    const std::vector<double> x{0.1, -0.3};
    for (const auto& t : plan.terms) {
      const int deg = term_signature(*t).degree;
      const EstimateWithError base = evaluate_term_mc(*t, u0, x, 0.9, 0, 64, RandomStream(9));
      const EstimateWithError scaled =
          evaluate_term_mc(*t, u0_scaled, x, 0.9, 0, 64, RandomStream(9));
      CHECK(scaled.value ==
            doctest::Approx(std::pow(lambda, deg) * base.value).epsilon(1e-12));
    }
  }

  SUBCASE("sampled leaves bias products by the shared-sample covariance over n0") {
    // E[u_hat * du_hat] = u du + Cov(a, a')/n0 at a fixed anchor; the
    // covariance has a closed form because the square of a Gaussian bump
    // is again a Gaussian bump.
    const double amp = 1.0, sigma = 0.7;
    const std::vector<double> y{0.5};
    const double s = 0.4;
    const std::vector<TestField> a{TestField(FieldKind::gaussian_bump, {amp, sigma}, 1)};
    const TestField bump_sq(FieldKind::gaussian_bump, {amp * amp, sigma / std::sqrt(2.0)}, 1);

    const double u = a[0].exact_heat(y, s);
    const double du = a[0].exact_heat_gradient(y, s, 0);
    const double cov = 0.5 * bump_sq.exact_heat_gradient(y, s, 0) - u * du;

    const RandomStream root(424242);
    for (long long n0 : {1LL, 4LL}) {
      const McU0 mc(a, std::nullopt, n0);
      const long long reps = 200000;
      double sum = 0.0, sumsq = 0.0;
      for (long long r = 0; r < reps; ++r) {
        const RandomStream leaf = root.child(static_cast<std::uint64_t>(r));
        const double v = mc.value(y, s, 0, leaf) * mc.gradient(y, s, 0, 0, leaf);
        sum += v;
        sumsq += v * v;
      }
      const double mean = sum / static_cast<double>(reps);
      const double se =
          std::sqrt((sumsq / static_cast<double>(reps) - mean * mean) / static_cast<double>(reps));
      // the product is biased by cov/n0, measurably so
      CHECK(std::fabs(mean - (u * du + cov / static_cast<double>(n0))) < 4.0 * se);
      CHECK(std::fabs(cov / static_cast<double>(n0)) > 10.0 * se);
    }
  }

  SUBCASE("value and gradient mirrors share their samples") {
    const ExactU0 u0(bump_initial(1));
    const TermPtr term = expand_terms(1, 1).terms[1];
    const std::vector<double> x{0.0};
    const TermValueAndGrads a =
        evaluate_term_with_grads(*term, u0, x, 1.0, 0, 500, RandomStream(77));
    const TermValueAndGrads b =
        evaluate_term_with_grads(*term, u0, x, 1.0, 0, 500, RandomStream(77));
    CHECK(a.value.value == b.value.value);
    CHECK(a.grads[0].value == b.grads[0].value);
  }
}

TEST_CASE("solution assembly") {
  SpaceTimeGrid grid;
  grid.points = {{{0.0}, 1.0}, {{0.5}, 1.0}, {{-0.7}, 1.0}};

  SUBCASE("first iterate within four stderr of the oracle at three points (d=1)") {
    const std::vector<TestField> a = bump_initial(1);
    const ExactU0 u0(a);
    Allocation alloc;
    alloc.n = 1;
    alloc.counts = {1, 20000};
    IterateOptions opts;
    opts.n = 1;
    opts.seed = 123;
    const SolutionEstimate sol = iterate_solution(a, std::nullopt, grid, alloc, opts);

    for (std::size_t p = 0; p < grid.points.size(); ++p) {
      const std::vector<double>& x = grid.points[p].x;
      const double t = grid.points[p].t;
      const PathIntegrand h = [&](const PathPoint& pp) {
        const RandomStream dummy(0);
        return u0.value(pp.y_last(), pp.s.back(), 0, dummy) *
               u0.gradient(pp.y_last(), pp.s.back(), 0, 0, dummy);
      };
      const OracleResult oracle = quadrature_oracle(h, TermKernelSpec::pure_plain(1), x, t, 1);
      const double expected = u0.value(x, t, 0, RandomStream(0)) + oracle.value;
      CHECK(std::fabs(sol.values[p][0].value - expected) < 4.0 * sol.values[p][0].stderr_);
      CHECK(std::isfinite(sol.values[p][0].stderr_));
      CHECK(std::isfinite(sol.grads[p][0][0].stderr_));
    }
  }

  SUBCASE("zero data yields the zero solution with zero stderr") {
    std::vector<TestField> zero{TestField(FieldKind::constant, {0.0}, 1)};
    Allocation alloc;
    alloc.n = 1;
    alloc.counts = {1, 50};
    IterateOptions opts;
    opts.n = 1;
    opts.seed = 4;
    const SolutionEstimate sol = iterate_solution(zero, std::nullopt, grid, alloc, opts);
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
      CHECK(sol.values[p][0].value == 0.0);
      CHECK(sol.values[p][0].stderr_ == 0.0);
      CHECK(sol.grads[p][0][0].value == 0.0);
    }
  }

  SUBCASE("worker count does not change the solution") {
    const std::vector<TestField> a = bump_initial(1);
    Allocation alloc;
    alloc.n = 1;
    alloc.counts = {1, 500};
    IterateOptions opts;
    opts.n = 1;
    opts.seed = 5;
    const SolutionEstimate seq = iterate_solution(a, std::nullopt, grid, alloc, opts);
    opts.threads = 3;
    const SolutionEstimate par = iterate_solution(a, std::nullopt, grid, alloc, opts);
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
      CHECK(seq.values[p][0].value == par.values[p][0].value);
      CHECK(seq.grads[p][0][0].value == par.grads[p][0][0].value);
    }
  }

  SUBCASE("budget accounting") {
    Allocation alloc;
    alloc.n = 1;
    alloc.counts = {100, 100};
    // A(1,1) 100 * 3 * 2 + A(2,1) 100 * 3 * 3 = 600 + 900
    CHECK(budget_total(alloc, 1, 3) == 1500);

    Allocation ones;
    ones.n = 2;
    ones.counts = {1, 1, 1, 1};
    CHECK(budget_total(ones, 2, 3) == 54);

    Allocation bad;
    bad.n = 1;
    bad.counts = {0, 1};
    CHECK_THROWS_AS(budget_total(bad, 1, 3), std::domain_error);
  }

  SUBCASE("aggregate variance bound arithmetic") {
    Allocation alloc;
    alloc.n = 1;
    alloc.counts = {100, 100};
    CHECK(variance_aggregate(alloc, 1.0, 0.0, 1, 3) == doctest::Approx(0.0));
    // B=1, t=1: W(1)^2 A(1,1)/100 + W(2)^2 A(2,1)/100
    const double expected = 4.0 / 100.0 +
                            (std::numbers::pi * std::numbers::pi) / 100.0;
    CHECK(variance_aggregate(alloc, 1.0, 1.0, 1, 3) == doctest::Approx(expected).epsilon(1e-12));

    Allocation doubled = alloc;
    for (auto& c : doubled.counts) c *= 2;
    CHECK(variance_aggregate(doubled, 1.0, 1.0, 1, 3) ==
          doctest::Approx(0.5 * variance_aggregate(alloc, 1.0, 1.0, 1, 3)).epsilon(1e-12));
  }
}

TEST_CASE("nested baseline") {
  SpaceTimeGrid grid;
  grid.points = {{{0.1, -0.2, 0.4}, 0.7}};

  SUBCASE("zero data gives zero") {
    std::vector<TestField> zero(3, TestField(FieldKind::constant, {0.0}, 3));
    const SolutionEstimate sol = iterate_nested(zero, std::nullopt, grid, {50, 10}, 3);
    for (int i = 0; i < 3; ++i) CHECK(sol.values[0][static_cast<std::size_t>(i)].value == 0.0);
  }

  SUBCASE("zero levels reduce to the plain linear estimator") {
    const std::vector<TestField> a = bump_initial(3);
    const SolutionEstimate sol = iterate_nested(a, std::nullopt, grid, {4000}, 99);
    const RandomStream root(99);
    const EstimateWithError direct =
        semigroup_mc(a[0], grid.points[0].x, grid.points[0].t, 4000, root.child(0).child(0).child(0));
    CHECK(sol.values[0][0].value == direct.value);
    CHECK(sol.values[0][0].stderr_ == direct.stderr_);
  }

  SUBCASE("spend accounting") {
    const std::vector<TestField> a = bump_initial(3);
    const SolutionEstimate sol = iterate_nested(a, std::nullopt, grid, {10, 10, 10}, 1);
    CHECK(sol.budget_used == 2 * 10 + 2 * 10 + 3 * 10);  // 70
  }
}

TEST_CASE("weighted sup estimate") {
  SpaceTimeGrid grid;
  grid.points = {{{0.5}, 1.0}, {{1.0}, 1.0}, {{2.0}, 1.0}};

  SUBCASE("reciprocal profile keeps the product at one") {
    std::vector<std::vector<double>> values(3);
    std::vector<std::vector<std::vector<double>>> grads(3);
    for (std::size_t p = 0; p < 3; ++p) {
      const double xa = std::max(std::fabs(grid.points[p].x[0]), 1.0);
      values[p] = {1.0 / xa};
      grads[p] = {{0.5 / xa}};
    }
    CHECK(triple_norm_estimate(grid, values, grads) == doctest::Approx(1.0));
  }

  SUBCASE("zero field") {
    std::vector<std::vector<double>> values(3, std::vector<double>{0.0});
    std::vector<std::vector<std::vector<double>>> grads(3, {{0.0}});
    CHECK(triple_norm_estimate(grid, values, grads) == doctest::Approx(0.0));
  }

  SUBCASE("grid refinement stabilizes the estimate") {
    const TestField bump(FieldKind::gaussian_bump, {1.0, 1.0}, 1);
    const auto estimate_on = [&](int n_pts) {
      SpaceTimeGrid g;
      std::vector<std::vector<double>> values;
      std::vector<std::vector<std::vector<double>>> grads;
      for (int i = 0; i < n_pts; ++i) {
        const double x = -3.0 + 6.0 * i / (n_pts - 1);
        g.points.push_back({{x}, 1.0});
        const std::vector<double> xv{x};
        values.push_back({bump.exact_heat(xv, 1.0)});
        grads.push_back({{bump.exact_heat_gradient(xv, 1.0, 0)}});
      }
      return triple_norm_estimate(g, values, grads);
    };
    const double coarse = estimate_on(41);
    const double fine = estimate_on(401);
    CHECK(std::fabs(coarse - fine) / fine < 0.05);
  }
}
