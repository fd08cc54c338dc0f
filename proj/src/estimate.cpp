#include "nsmc/estimate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace nsmc {

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

EstimateWithError finalize_samples(std::span<const double> per_sample) {
  if (per_sample.empty()) throw std::invalid_argument("finalize_samples: no samples");
  EstimateWithError est;
  est.n_samples = static_cast<long long>(per_sample.size());
  est.value = pairwise_sum(per_sample) / static_cast<double>(per_sample.size());
  if (per_sample.size() == 1) {
    est.stderr_ = std::numeric_limits<double>::infinity();
    return est;
  }
  std::vector<double> sq(per_sample.size());
  for (std::size_t i = 0; i < per_sample.size(); ++i) {
    const double d = per_sample[i] - est.value;
    sq[i] = d * d;
  }
  const double n = static_cast<double>(per_sample.size());
  const double var = pairwise_sum(sq) / (n - 1.0);
  est.stderr_ = std::sqrt(var / n);
  return est;
}

}  // namespace nsmc
