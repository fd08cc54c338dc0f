#include "nsmc/heat.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsmc/parallel.hpp"

namespace nsmc {

double heat_kernel(std::span<const double> x, double t) {
  if (!(t > 0.0)) throw std::domain_error("heat_kernel: t must be positive");
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  const double d = static_cast<double>(x.size());
  return std::pow(2.0 * std::numbers::pi * t, -0.5 * d) * std::exp(-r2 / (2.0 * t));
}

namespace {

void check_finite(double v, std::size_t sample_index) {
  if (!std::isfinite(v))
    throw std::runtime_error("estimator failure: non-finite field value at sample " +
                             std::to_string(sample_index));
}

}  // namespace

EstimateWithError semigroup_mc(const TestField& a, std::span<const double> x, double t,
                               long long n_samples, const RandomStream& stream, int threads) {
  if (!(t > 0.0)) throw std::domain_error("semigroup_mc: t must be positive");
  if (n_samples < 1) throw std::domain_error("semigroup_mc: need at least one sample");
  const int d = static_cast<int>(x.size());
  const double root_t = std::sqrt(t);

  std::vector<double> values(static_cast<std::size_t>(n_samples));
  parallel_for(values.size(), threads, [&](std::size_t i) {
    RandomStream sub = stream.child(i);
    std::vector<double> y(x.begin(), x.end());
    for (int j = 0; j < d; ++j) y[j] += sub.normal() * root_t;
    values[i] = a.value(y, 0.0);
    check_finite(values[i], i);
  });
  return finalize_samples(values);
}

EstimateWithError forced_mc(const TestField& f, std::span<const double> x, double t,
                            long long n_samples, const RandomStream& stream, int threads) {
  if (!(t > 0.0)) throw std::domain_error("forced_mc: t must be positive");
  if (n_samples < 1) throw std::domain_error("forced_mc: need at least one sample");
  const int d = static_cast<int>(x.size());

  std::vector<double> values(static_cast<std::size_t>(n_samples));
  parallel_for(values.size(), threads, [&](std::size_t i) {
    RandomStream sub = stream.child(i);
    const double tau = sub.u01();
    const double scale = std::sqrt(t) * std::sqrt(1.0 - tau);
    std::vector<double> y(x.begin(), x.end());
    for (int j = 0; j < d; ++j) y[j] += sub.normal() * scale;
    values[i] = t * f.value(y, t * tau);
    check_finite(values[i], i);
  });
  return finalize_samples(values);
}

double heat_exact(const TestField& a, std::span<const double> x, double t) {
  return a.exact_heat(x, t);
}

}  // namespace nsmc
