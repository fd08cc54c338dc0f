#include "nsmc/error_ci.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace nsmc {

TailModel make_tail_model(double C, double kappa, double sigma) {
  if (!(C > 0.0)) throw std::domain_error("TailModel: C must be positive");
  if (!(sigma > 0.0)) throw std::domain_error("TailModel: sigma must be positive");
  // Q'(v)/Q(v) = (kappa-1)/v - v/sigma^2 must be <= 0 from v = 3 sigma on
  if (kappa - 1.0 > 9.0)
    throw std::domain_error("TailModel: not decreasing beyond 3 sigma (kappa too large)");
  return TailModel{C, kappa, sigma};
}

double tail_probability(double v, const TailModel& model) {
  if (!(v > 0.0)) throw std::domain_error("tail_probability: v must be positive");
  return model.C * std::pow(v, model.kappa - 1.0) *
         std::exp(-v * v / (2.0 * model.sigma * model.sigma));
}

double solve_quantile(double delta, const TailModel& model) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("solve_quantile: delta in (0,1)");
  double lo = 3.0 * model.sigma;
  if (!(tail_probability(lo, model) > delta))
    throw std::invalid_argument(
        "solve_quantile: no root above 3 sigma; increase delta or decrease sigma");
  double hi = lo * 2.0;
  while (tail_probability(hi, model) > delta) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::runtime_error("solve_quantile: no finite root");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (tail_probability(mid, model) > delta)
      lo = mid;
    else
      hi = mid;
    if ((hi - lo) <= 1e-12 * hi) break;
  }
  return 0.5 * (lo + hi);
}

double confidence_radius(double v_delta, long long n_samples) {
  if (n_samples < 1) throw std::domain_error("confidence_radius: need n >= 1");
  return v_delta / std::sqrt(static_cast<double>(n_samples));
}

TailModel empirical_tail_fit(std::span<const double> replicate_norms, double kappa) {
  if (replicate_norms.size() < 30)
    throw std::invalid_argument("empirical_tail_fit: need at least 30 replicates");
  double sumsq = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double v : replicate_norms) {
    if (!(v >= 0.0)) throw std::domain_error("empirical_tail_fit: norms must be >= 0");
    sumsq += v * v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo))
    throw std::invalid_argument("empirical_tail_fit: degenerate (constant) replicates");
  const double sigma = std::sqrt(sumsq / static_cast<double>(replicate_norms.size()));
  if (!(sigma > 0.0)) throw std::invalid_argument("empirical_tail_fit: zero scale");

  // calibrate C at the empirical 90th percentile
  std::vector<double> sorted(replicate_norms.begin(), replicate_norms.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t idx = static_cast<std::size_t>(0.9 * static_cast<double>(sorted.size() - 1));
  const double q90 = sorted[idx];
  const double c = 0.10 / (std::pow(q90, kappa - 1.0) *
                           std::exp(-q90 * q90 / (2.0 * sigma * sigma)));
  return make_tail_model(c, kappa, sigma);
}

double combined_error(double q, int n, long long N, double C, int d) {
  if (!(q > 0.0 && q < 1.0)) throw std::domain_error("combined_error: q in (0,1)");
  if (n < 1 || N < 1 || !(C > 0.0)) throw std::domain_error("combined_error: bad arguments");
  const BigInt dn = d_sequence(n, d);
  const double ratio = dn.convert_to<double>() / std::sqrt(static_cast<double>(N));
  return C * (std::pow(q, n) + ratio);
}

int optimal_n(double q, long long N, double C, int d, int n_max) {
  if (n_max < 1) throw std::domain_error("optimal_n: n_max must be >= 1");
  int best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_max; ++n) {
    const BigInt dn = d_sequence(n, d);
    if (dn * dn > N) continue;  // D(n) <= sqrt(N), exactly
    const double err = combined_error(q, n, N, C, d);
    if (err < best_err) {
      best_err = err;
      best = n;
    }
  }
  if (best == 0)
    throw std::invalid_argument("optimal_n: no depth satisfies D(n) <= sqrt(N)");
  return best;
}

ConfidenceReport ci_for_run(std::span<const double> replicate_norms, long long n_samples,
                            double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("ci_for_run: delta in (0,1)");
  ConfidenceReport report;
  report.delta = delta;
  report.n_samples = n_samples;
  report.model = empirical_tail_fit(replicate_norms);
  if (tail_probability(3.0 * report.model.sigma, report.model) > delta) {
    report.v_delta = solve_quantile(delta, report.model);
  } else {
    // the fitted tail is below delta already at 3 sigma; report the
    // conservative boundary value
    report.v_delta = 3.0 * report.model.sigma;
    report.quantile_clamped = true;
  }
  report.radius = confidence_radius(report.v_delta, n_samples);
  return report;
}

}  // namespace nsmc
