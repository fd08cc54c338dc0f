#pragma once

#include <optional>
#include <span>

namespace nsmc {

/// A Monte-Carlo estimate with its sampling error. stderr is the unbiased
/// sample standard deviation divided by sqrt(n); a single sample reports
/// the +infinity sentinel. variance_bound, when present, is an a-priori
/// bound on the estimator variance.
struct EstimateWithError {
  double value = 0.0;
  long long n_samples = 0;
  double stderr_ = 0.0;
  std::optional<double> variance_bound;
};

/// Deterministic indexed-tree (pairwise) summation. The reduction order
/// depends only on the element count, never on the thread schedule that
/// filled the buffer.
double pairwise_sum(std::span<const double> values);

/// Mean / stderr over per-sample values via pairwise reduction.
EstimateWithError finalize_samples(std::span<const double> per_sample);

}  // namespace nsmc
