#pragma once

#include <span>
#include <vector>

#include "nsmc/convolution.hpp"

namespace nsmc {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule transplanted to [0,1] (weights sum to 1).
QuadRule gauss_legendre_unit(int n);

/// Gauss-Hermite rule for expectations against the standard normal
/// density (weights sum to 1).
QuadRule gauss_hermite_unit(int n);

struct OracleResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Deterministic tensor-quadrature evaluation of the iterated convolution
/// described by `spec`, for cross-checking the Monte-Carlo estimators.
/// Supported for m1+m2 <= 2 and d <= 2; otherwise throws
/// std::invalid_argument. Gap singularities of gradient steps are removed
/// analytically, so the integrand seen by the rule is smooth.
OracleResult quadrature_oracle(const PathIntegrand& h, const TermKernelSpec& spec,
                               std::span<const double> x, double t, int d);

}  // namespace nsmc
