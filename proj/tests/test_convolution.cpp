#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nsmc/convolution.hpp"
#include "nsmc/heat.hpp"
#include "nsmc/quadrature.hpp"

using namespace nsmc;

namespace {

const PathIntegrand kOne = [](const PathPoint&) { return 1.0; };

PathIntegrand first_excursion(int coord) {
  return [coord](const PathPoint& p) { return p.y_at(0, coord) - p.x0[static_cast<std::size_t>(coord)]; };
}

PathIntegrand last_excursion(int coord) {
  return [coord](const PathPoint& p) {
    return p.y_at(p.steps() - 1, coord) - p.x0[static_cast<std::size_t>(coord)];
  };
}

}  // namespace

TEST_CASE("change of variables") {
  RandomStream s(3);
  const std::vector<double> x{0.5, -1.0};

  SUBCASE("zero increments keep the path at x") {
    GaussianBlock z;
    z.m = 3;
    z.d = 2;
    z.z.assign(6, 0.0);
    SimplexPoint tau;
    tau.coords = {0.7, 0.4, 0.1};
    const PathPoint p = change_of_variables(x, 2.0, z, tau);
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < 2; ++c) CHECK(p.y_at(j, c) == doctest::Approx(x[static_cast<std::size_t>(c)]));
    CHECK(p.s[0] == doctest::Approx(1.4));
  }

  SUBCASE("single step lands at x + sqrt(t) e_1 when tau ~ 0") {
    GaussianBlock z;
    z.m = 1;
    z.d = 2;
    z.z = {1.0, 0.0};
    SimplexPoint tau;
    tau.coords = {1e-14};
    const PathPoint p = change_of_variables(x, 4.0, z, tau);
    CHECK(p.y_at(0, 0) == doctest::Approx(x[0] + 2.0).epsilon(1e-7));
    CHECK(p.s[0] == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("increments are recovered exactly") {
    for (int rep = 0; rep < 50; ++rep) {
      RandomStream sub = s.child(rep);
      SimplexPoint tau = uniform_simplex_sample(3, sub);
      GaussianBlock z = gaussian_block_sample(3, 2, sub);
      const GaussianBlock z_in = z;
      const PathPoint p = change_of_variables(x, 1.7, std::move(z), std::move(tau));
      const GaussianBlock z_back = path_increments(p);
      for (std::size_t i = 0; i < z_in.z.size(); ++i)
        CHECK(std::fabs(z_back.z[i] - z_in.z[i]) < 1e-12);
    }
  }
}

TEST_CASE("plain iterated convolution") {
  const std::vector<double> x{0.2};
  const double t = 1.3;

  SUBCASE("unit integrand gives t and t^2/2 exactly") {
    const EstimateWithError e1 = estimate_I(kOne, 1, x, t, 64, RandomStream(1), 1);
    CHECK(e1.value == doctest::Approx(t).epsilon(1e-14));
    CHECK(e1.stderr_ == doctest::Approx(0.0));
    const EstimateWithError e2 = estimate_I(kOne, 2, x, t, 64, RandomStream(2), 1);
    CHECK(e2.value == doctest::Approx(0.5 * t * t).epsilon(1e-14));
  }

  SUBCASE("first time coordinate integrates to t^2/2") {
    const PathIntegrand h = [](const PathPoint& p) { return p.s[0]; };
    const EstimateWithError e = estimate_I(h, 1, x, t, 60000, RandomStream(3), 1);
    CHECK(std::fabs(e.value - 0.5 * t * t) < 4.0 * e.stderr_);

    const OracleResult oracle = quadrature_oracle(h, TermKernelSpec::pure_plain(1), x, t, 1);
    CHECK(oracle.value == doctest::Approx(0.5 * t * t).epsilon(1e-10));
    CHECK(oracle.error_estimate < 1e-8);
  }
}

TEST_CASE("gradient iterated convolution carries the exact kernel sign") {
  const std::vector<double> x{0.4};
  const double t = 0.9;
  const TermKernelSpec j1 = TermKernelSpec::pure_grad(1, {0});

  SUBCASE("odd symmetry for even integrands") {
    const EstimateWithError e = estimate_J(kOne, j1, x, t, 30000, RandomStream(4), 1);
    CHECK(std::fabs(e.value) < 4.0 * e.stderr_);

    const PathIntegrand sq = [](const PathPoint& p) {
      const double d0 = p.y_at(0, 0) - p.x0[0];
      return d0 * d0;
    };
    const EstimateWithError e2 = estimate_J(sq, j1, x, t, 30000, RandomStream(5), 1);
    CHECK(std::fabs(e2.value) < 4.0 * e2.stderr_);
  }

  SUBCASE("first excursion integrates to -t, fixed by two independent routes") {
    // route 1: substituted-representation tensor quadrature
    const OracleResult oracle = quadrature_oracle(first_excursion(0), j1, x, t, 1);
    CHECK(oracle.value == doctest::Approx(-t).epsilon(1e-8));

    // route 2: direct (y,s)-coordinates quadrature of the kernel integral
    using boost::math::quadrature::gauss_kronrod;
    const double direct = gauss_kronrod<double, 61>::integrate(
        [&](double s) {
          return gauss_kronrod<double, 61>::integrate(
              [&](double y) {
                const double v[] = {x[0] - y};
                const double kernel = (x[0] - y) / (t - s) * heat_kernel(v, t - s);
                return kernel * (y - x[0]);
              },
              -30.0, 30.0, 10, 1e-10);
        },
        0.0, t, 10, 1e-9);
    CHECK(direct == doctest::Approx(-t).epsilon(1e-6));

    const EstimateWithError e = estimate_J(first_excursion(0), j1, x, t, 60000, RandomStream(6), 1);
    CHECK(std::fabs(e.value - (-t)) < 4.0 * e.stderr_);
  }
}

TEST_CASE("mixed convolution") {
  const std::vector<double> x{0.1};
  const double t = 0.7;

  SUBCASE("reductions are bit-identical to the pure estimators") {
    TermKernelSpec plain2;
    plain2.m1 = 2;
    const EstimateWithError ei = estimate_I(kOne, 2, x, t, 500, RandomStream(7), 1);
    const EstimateWithError ek = estimate_K(kOne, plain2, x, t, 500, RandomStream(7), 1);
    CHECK(ei.value == ek.value);
    CHECK(ei.stderr_ == ek.stderr_);

    const TermKernelSpec grad1 = TermKernelSpec::pure_grad(1, {0});
    const EstimateWithError ej = estimate_J(last_excursion(0), grad1, x, t, 500, RandomStream(8), 1);
    const EstimateWithError ek2 = estimate_K(last_excursion(0), grad1, x, t, 500, RandomStream(8), 1);
    CHECK(ej.value == ek2.value);
    CHECK(ej.stderr_ == ek2.stderr_);
  }

  SUBCASE("unit integrand vanishes by odd symmetry") {
    TermKernelSpec mixed;
    mixed.m1 = 1;
    mixed.m2 = 1;
    mixed.deriv_indices = {0};
    const EstimateWithError e = estimate_K(kOne, mixed, x, t, 30000, RandomStream(9), 1);
    CHECK(std::fabs(e.value) < 4.0 * e.stderr_);
  }

  SUBCASE("closed form -t^2/2 for the last excursion, both step orders") {
    for (bool grad_first : {false, true}) {
      TermKernelSpec mixed;
      mixed.m1 = 1;
      mixed.m2 = 1;
      mixed.deriv_indices = {0};
      mixed.order = grad_first ? std::vector<StepKind>{StepKind::grad, StepKind::plain}
                               : std::vector<StepKind>{StepKind::plain, StepKind::grad};

      const OracleResult oracle = quadrature_oracle(last_excursion(0), mixed, x, t, 1);
      CHECK(oracle.value == doctest::Approx(-0.5 * t * t).epsilon(1e-8));

      const EstimateWithError e =
          estimate_K(last_excursion(0), mixed, x, t, 80000, RandomStream(10 + grad_first), 1);
      CHECK(std::fabs(e.value - (-0.5 * t * t)) < 4.0 * e.stderr_);
    }
  }

  SUBCASE("smooth compact integrand matches the 4-d tensor oracle") {
    TermKernelSpec mixed;
    mixed.m1 = 1;
    mixed.m2 = 1;
    mixed.deriv_indices = {0};
    const TestField bump(FieldKind::gaussian_bump, {1.0, 1.0}, 1);
    const PathIntegrand h = integrand_at_endpoint(bump);

    const OracleResult oracle = quadrature_oracle(h, mixed, x, t, 1);
    CHECK(oracle.error_estimate < 1e-7);

    // pooled mean over independent runs against the oracle
    const int runs = 60;
    double mean = 0.0, pooled_var = 0.0;
    for (int r = 0; r < runs; ++r) {
      const EstimateWithError e = estimate_K(h, mixed, x, t, 4000, RandomStream(3000 + r), 1);
      mean += e.value;
      pooled_var += e.stderr_ * e.stderr_;
    }
    mean /= runs;
    const double pooled_stderr = std::sqrt(pooled_var) / runs;
    CHECK(std::fabs(mean - oracle.value) < 4.0 * pooled_stderr);
  }
}

TEST_CASE("variance bounds") {
  SUBCASE("zero integrand, plain arithmetic") {
    TermKernelSpec plain1;
    plain1.m1 = 1;
    const VarianceBound b0 = variance_bound(plain1, 1.0, 0.0, 100);
    CHECK(b0.tight == doctest::Approx(0.0));
    const VarianceBound b = variance_bound(plain1, 1.0, 1.0, 100);
    CHECK(b.tight == doctest::Approx(0.01));
    CHECK(b.rough == doctest::Approx(0.04));  // W(1)^2 = 4
  }

  SUBCASE("empirical variance dominated by the bound") {
    const std::vector<double> x{0.0};
    const double t = 0.8;
    const TestField bump(FieldKind::gaussian_bump, {1.0, 1.0}, 1);
    const PathIntegrand h = integrand_at_endpoint(bump);
    const double h_sup = 1.0;

    std::vector<TermKernelSpec> specs;
    specs.push_back(TermKernelSpec::pure_plain(1));
    specs.push_back(TermKernelSpec::pure_plain(2));
    specs.push_back(TermKernelSpec::pure_grad(1, {0}));
    specs.push_back(TermKernelSpec::pure_grad(2, {0, 0}));
    TermKernelSpec mixed;
    mixed.m1 = 1;
    mixed.m2 = 1;
    mixed.deriv_indices = {0};
    specs.push_back(mixed);

    for (const auto& spec : specs) {
      const long long n = 400;
      const VarianceBound bound = variance_bound(spec, t, h_sup, n);
      double sum = 0.0, sumsq = 0.0;
      const int runs = 100;
      for (int r = 0; r < runs; ++r) {
        const EstimateWithError e =
            estimate_K(h, spec, x, t, n, RandomStream(6000 + 100 * spec.m1 + spec.m2 + r), 1);
        sum += e.value;
        sumsq += e.value * e.value;
      }
      const double emp_var = (sumsq - sum * sum / runs) / (runs - 1);
      CHECK(emp_var <= bound.tight);
      CHECK(emp_var <= bound.rough);
    }
  }
}

TEST_CASE("non-finite integrands fail loudly with the sample index") {
  const PathIntegrand bad = [](const PathPoint& p) {
    return p.s[0] < 0.5 ? 1.0 : std::numeric_limits<double>::infinity();
  };
  CHECK_THROWS_AS(estimate_I(bad, 1, std::vector<double>{0.0}, 1.0, 200, RandomStream(1), 1),
                  std::runtime_error);
}

TEST_CASE("oracle exactness on unit integrands") {
  const std::vector<double> x{0.0};
  const double t = 1.3;
  CHECK(quadrature_oracle(kOne, TermKernelSpec::pure_plain(1), x, t, 1).value ==
        doctest::Approx(t).epsilon(1e-8));
  CHECK(quadrature_oracle(kOne, TermKernelSpec::pure_plain(2), x, t, 1).value ==
        doctest::Approx(0.5 * t * t).epsilon(1e-8));
}

TEST_CASE("oracle bounds its own support") {
  TermKernelSpec big;
  big.m1 = 3;
  CHECK_THROWS_AS(quadrature_oracle(kOne, big, std::vector<double>{0.0}, 1.0, 1),
                  std::invalid_argument);
  TermKernelSpec ok;
  ok.m1 = 1;
  CHECK_THROWS_AS(quadrature_oracle(kOne, ok, std::vector<double>{0.0, 0.0, 0.0}, 1.0, 3),
                  std::invalid_argument);
}
