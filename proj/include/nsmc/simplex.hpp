#pragma once

#include <vector>

#include "nsmc/rng.hpp"

namespace nsmc {

/// Ordered point of the open unit simplex: 1 > tau_1 > ... > tau_m > 0.
/// The gap representation (1-tau_1, tau_1-tau_2, ..., tau_{m-1}-tau_m)
/// together with the remainder tau_m partitions the unit interval.
struct SimplexPoint {
  std::vector<double> coords;  // decreasing, strictly inside (0,1)

  int m() const { return static_cast<int>(coords.size()); }
  std::vector<double> gaps() const;
  double remainder() const { return coords.back(); }

  /// Throws std::domain_error unless ordering, openness and the gap
  /// partition identity (within 1e-12) all hold.
  void validate() const;
};

/// Block of m x d independent standard normal variates, row-major by step.
struct GaussianBlock {
  int m = 0;
  int d = 0;
  std::vector<double> z;

  double at(int step, int coord) const { return z[static_cast<std::size_t>(step) * d + coord]; }
};

GaussianBlock gaussian_block_sample(int m, int d, RandomStream& stream);

/// Uniform law on the ordered simplex, realized as descending order
/// statistics of m unit-interval variates.
SimplexPoint uniform_simplex_sample(int m, RandomStream& stream);

/// Gap-singular law with density H_m(s) = prod gap^{-1/2} / W_m on the
/// ordered simplex. Sampled by stick-breaking over the gap representation:
/// the gaps follow Dirichlet(1/2,...,1/2,1), each stick ratio is a Beta
/// quantile of one fresh uniform, so a draw consumes exactly m uniforms.
SimplexPoint pb_half_sample(int m, RandomStream& stream);

/// Density H_m at an interior point. Throws std::domain_error on
/// degenerate gaps (below 1e-300).
double pb_density(const SimplexPoint& point);

}  // namespace nsmc
