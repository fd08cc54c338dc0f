#pragma once

#include <vector>

#include "nsmc/combinatorics.hpp"

namespace nsmc {

/// Per-degree-group sample counts N(k), k = 1..2^n.
struct Allocation {
  int n = 0;
  std::vector<long long> counts;  // counts[k-1] = N(k)

  long long at(int k) const { return counts[static_cast<std::size_t>(k - 1)]; }
  void validate() const;
};

struct ObjectiveParams {
  int n = 1;
  int d = 3;
  double B = 1.0;       // source-field triple-norm value
  double t = 1.0;       // only used when with_t_weights is set
  long long N_budget = 0;
  bool with_t_weights = false;
};

/// Spend of an allocation: sum_k A(k,n) N(k) d (k+1), exact.
long long budget_total(const Allocation& alloc, int n, int d);

/// Variance objective sum_k W(k)^2 A(k,n) B^{2k} / N(k); with the t flag
/// each term also carries max(t^k, t^{2k}).
double objective_Z(const Allocation& alloc, const ObjectiveParams& p);

/// The budget constraint value (shared implementation with budget_total).
long long constraint_Y(const Allocation& alloc, const ObjectiveParams& p);

/// Continuous Lagrange optimum N(k) ~ sqrt(c_k / a_k) scaled to the
/// budget, floored with minimum 1, remainder redistributed greedily by
/// marginal objective decrease per unit cost (ties toward smaller k).
/// Throws with the minimal feasible budget named when infeasible.
Allocation allocate_exact(const ObjectiveParams& p);

/// The closed proportional rule N(k) ~ N d^{-3/2} W(k) B^k / sum_r W(r) B^r,
/// rounded to nearest with minimum 1. Kept verbatim for comparison; it
/// drops the A(k,n) and (k+1) dependence the exact solution carries.
Allocation allocate_paper(const ObjectiveParams& p);

/// Equal N(k) filling the budget.
Allocation allocate_uniform(const ObjectiveParams& p);

/// Pre-rounding continuous optimum (for KKT diagnostics): c_k/(a_k N(k)^2)
/// is constant across k at the optimum.
std::vector<double> continuous_optimum(const ObjectiveParams& p);

struct MinVarianceReport {
  double z_at_optimum = 0.0;   // objective at the rounded exact optimum
  double product_form = 0.0;   // (d^{3/2}/N) sum_m W A B^m * sum_r sqrt(r+1) W A B^r
};

MinVarianceReport min_variance_report(const ObjectiveParams& p);

}  // namespace nsmc
