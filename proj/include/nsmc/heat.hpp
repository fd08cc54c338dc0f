#pragma once

#include <span>

#include "nsmc/estimate.hpp"
#include "nsmc/fields.hpp"
#include "nsmc/rng.hpp"

namespace nsmc {

/// Heat kernel (2 pi t)^{-d/2} exp(-|x|^2 / (2t)) for the 0.5-Laplacian
/// normalization. Throws std::domain_error for t <= 0.
double heat_kernel(std::span<const double> x, double t);

/// Unbiased estimate of [e^{0.5 t Laplacian} a](x) as the expectation of
/// a(x + xi sqrt(t)) over a standard Gaussian xi, one substream per sample.
EstimateWithError semigroup_mc(const TestField& a, std::span<const double> x, double t,
                               long long n_samples, const RandomStream& stream,
                               int threads = 1);

/// Unbiased estimate of the zero-initial-data forced problem: expectation
/// of t * f(x + eta sqrt(t) sqrt(1-tau), t tau), eta Gaussian, tau uniform.
EstimateWithError forced_mc(const TestField& f, std::span<const double> x, double t,
                            long long n_samples, const RandomStream& stream,
                            int threads = 1);

/// Closed-form heat evolution for field kinds that have one.
double heat_exact(const TestField& a, std::span<const double> x, double t);

}  // namespace nsmc
