#pragma once

#include <span>

namespace nsmc {

/// Volume of the unit ball in R^m: pi^{m/2} / Gamma(1 + m/2).
double unit_ball_volume(int m);

/// Integral over the ordered unit simplex of the product of gap powers
/// gap_k^{-alpha_k}: prod Gamma(1-alpha_k) / Gamma(1 + sum (1-alpha_k)).
/// Requires every alpha_k in [0,1).
double dirichlet_simplex_integral(std::span<const double> alphas);

/// Partial sum of sum_{n=0}^{terms-1} z^n / Gamma(1 + n*beta).
/// Throws std::overflow_error if the sum leaves the double range.
double mittag_leffler_partial(double beta, double z, int terms);

/// Surface area of the unit sphere S^{d-1}.
double sphere_area(int d);

}  // namespace nsmc
