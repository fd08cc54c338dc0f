#pragma once

#include <span>

#include "nsmc/combinatorics.hpp"

namespace nsmc {

/// Tail template Q(v) = C v^{kappa-1} exp(-v^2 / (2 sigma^2)), required
/// to be decreasing on v >= 3 sigma (checked at construction).
struct TailModel {
  double C = 1.0;
  double kappa = 1.0;
  double sigma = 1.0;
};

TailModel make_tail_model(double C, double kappa, double sigma);

double tail_probability(double v, const TailModel& model);

/// Solves Q(v) = delta for v >= 3 sigma by bisection (1e-12 relative).
/// Throws when Q(3 sigma) <= delta: no root exists in the valid regime,
/// so a larger delta or smaller sigma is needed.
double solve_quantile(double delta, const TailModel& model);

double confidence_radius(double v_delta, long long n_samples);

/// Fits sigma as the root mean square of the replicate statistics, keeps
/// kappa fixed, and calibrates C so the model matches the empirical 90th
/// percentile. Needs at least 30 replicates; a degenerate (constant)
/// sample is rejected.
TailModel empirical_tail_fit(std::span<const double> replicate_norms, double kappa = 1.0);

/// Combined deterministic + stochastic error C (q^n + D(n)/sqrt(N)),
/// saturating to +infinity when D(n) leaves the double range.
double combined_error(double q, int n, long long N, double C, int d);

/// Smallest-error depth among n = 1..n_max with the feasibility filter
/// D(n) <= sqrt(N) (exact integer check); ties break toward smaller n.
int optimal_n(double q, long long N, double C, int d, int n_max);

struct ConfidenceReport {
  double delta = 0.0;
  double v_delta = 0.0;
  double radius = 0.0;
  long long n_samples = 0;
  TailModel model;
  bool quantile_clamped = false;  // no root above 3 sigma; radius uses 3 sigma
};

/// Confidence radius for a run from replicate norm errors (the statistic
/// per replicate is sqrt(N) * ||error||). When the fitted tail is already
/// below delta at 3 sigma the radius falls back to the conservative
/// 3 sigma / sqrt(N) and says so.
ConfidenceReport ci_for_run(std::span<const double> replicate_norms, long long n_samples,
                            double delta);

}  // namespace nsmc
