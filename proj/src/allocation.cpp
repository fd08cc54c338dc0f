#include "nsmc/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "nsmc/special.hpp"

namespace nsmc {

namespace {

long long group_count(int n) {
  if (n < 1 || n > 20) throw std::domain_error("allocation: n must be in 1..20");
  return 1LL << n;
}

// c_k = W(k)^2 A(k,n) B^{2k} (optionally t-weighted), a_k = A(k,n) d (k+1)
struct Coefficients {
  std::vector<double> c;
  std::vector<long long> a;
};

Coefficients coefficients(const ObjectiveParams& p) {
  const long long kmax = group_count(p.n);
  Coefficients co;
  co.c.resize(static_cast<std::size_t>(kmax));
  co.a.resize(static_cast<std::size_t>(kmax));
  for (long long k = 1; k <= kmax; ++k) {
    const double A = static_cast<double>(coeff_A(static_cast<int>(k), p.n));
    const double W = unit_ball_volume(static_cast<int>(k));
    double c = W * W * A * std::pow(p.B, 2.0 * static_cast<double>(k));
    if (p.with_t_weights)
      c *= std::max(std::pow(p.t, static_cast<double>(k)), std::pow(p.t, 2.0 * static_cast<double>(k)));
    co.c[static_cast<std::size_t>(k - 1)] = c;
    const BigInt cost = coeff_A(static_cast<int>(k), p.n) * p.d * (k + 1);
    if (cost > std::numeric_limits<long long>::max())
      throw std::overflow_error("allocation: group cost exceeds 64-bit range");
    co.a[static_cast<std::size_t>(k - 1)] = static_cast<long long>(cost);
  }
  return co;
}

long long minimal_budget(const ObjectiveParams& p) {
  Allocation ones;
  ones.n = p.n;
  ones.counts.assign(static_cast<std::size_t>(group_count(p.n)), 1);
  return budget_total(ones, p.n, p.d);
}

}  // namespace

void Allocation::validate() const {
  if (counts.size() != static_cast<std::size_t>(1LL << n))
    throw std::domain_error("Allocation: counts must cover k = 1..2^n");
  for (long long c : counts)
    if (c < 1) throw std::domain_error("Allocation: every N(k) must be >= 1");
}

long long budget_total(const Allocation& alloc, int n, int d) {
  alloc.validate();
  if (alloc.n != n) throw std::domain_error("budget_total: depth mismatch");
  BigInt total = 0;
  for (long long k = 1; k <= static_cast<long long>(alloc.counts.size()); ++k)
    total += coeff_A(static_cast<int>(k), n) * alloc.at(static_cast<int>(k)) * d * (k + 1);
  if (total > std::numeric_limits<long long>::max())
    throw std::overflow_error("budget_total: spend exceeds 64-bit range");
  return static_cast<long long>(total);
}

double objective_Z(const Allocation& alloc, const ObjectiveParams& p) {
  alloc.validate();
  const Coefficients co = coefficients(p);
  double z = 0.0;
  for (std::size_t k = 0; k < co.c.size(); ++k)
    z += co.c[k] / static_cast<double>(alloc.counts[k]);
  return z;
}

long long constraint_Y(const Allocation& alloc, const ObjectiveParams& p) {
  return budget_total(alloc, p.n, p.d);
}

std::vector<double> continuous_optimum(const ObjectiveParams& p) {
  const Coefficients co = coefficients(p);
  std::vector<double> shape(co.c.size(), 0.0);
  double denom = 0.0;
  for (std::size_t k = 0; k < co.c.size(); ++k) {
    shape[k] = co.a[k] > 0 && co.c[k] > 0.0
                   ? std::sqrt(co.c[k] / static_cast<double>(co.a[k]))
                   : 0.0;
    denom += static_cast<double>(co.a[k]) * shape[k];
  }
  if (denom <= 0.0) {
    // degenerate objective (B = 0): spread the budget evenly
    std::vector<double> flat(co.c.size(), 0.0);
    double spend = 0.0;
    for (long long a : co.a) spend += static_cast<double>(a);
    for (std::size_t k = 0; k < co.c.size(); ++k)
      flat[k] = static_cast<double>(p.N_budget) / spend;
    return flat;
  }
  std::vector<double> opt(co.c.size(), 0.0);
  for (std::size_t k = 0; k < co.c.size(); ++k)
    opt[k] = static_cast<double>(p.N_budget) * shape[k] / denom;
  return opt;
}

Allocation allocate_exact(const ObjectiveParams& p) {
  const long long min_budget = minimal_budget(p);
  if (p.N_budget < min_budget)
    throw std::invalid_argument("allocate_exact: budget " + std::to_string(p.N_budget) +
                                " below minimal feasible spend " + std::to_string(min_budget));
  const Coefficients co = coefficients(p);
  const std::vector<double> cont = continuous_optimum(p);

  Allocation alloc;
  alloc.n = p.n;
  alloc.counts.resize(cont.size());
  for (std::size_t k = 0; k < cont.size(); ++k)
    alloc.counts[k] = std::max(1LL, static_cast<long long>(std::floor(cont[k])));

  long long spent = budget_total(alloc, p.n, p.d);
  if (spent > p.N_budget) {
    // flooring can still overshoot when many groups were clamped to 1;
    // walk the largest groups back down to their floors
    for (std::size_t k = cont.size(); k-- > 0 && spent > p.N_budget;) {
      while (alloc.counts[k] > 1 && spent > p.N_budget) {
        alloc.counts[k]--;
        spent -= co.a[k];
      }
    }
  }

  // greedy redistribution of the remainder by marginal decrease of the
  // objective per unit of budget; ties toward smaller k
  while (true) {
    long long remaining = p.N_budget - spent;
    std::size_t best = cont.size();
    double best_gain = -1.0;
    for (std::size_t k = 0; k < cont.size(); ++k) {
      const long long cost = co.a[k];
      if (cost <= 0 || cost > remaining) continue;
      const double nk = static_cast<double>(alloc.counts[k]);
      const double gain = co.c[k] / (nk * (nk + 1.0)) / static_cast<double>(cost);
      if (gain > best_gain + 1e-18) {
        best_gain = gain;
        best = k;
      }
    }
    if (best == cont.size()) break;
    alloc.counts[best]++;
    spent += co.a[best];
  }
  return alloc;
}

Allocation allocate_paper(const ObjectiveParams& p) {
  const long long min_budget = minimal_budget(p);
  if (p.N_budget < min_budget)
    throw std::invalid_argument("allocate_paper: budget " + std::to_string(p.N_budget) +
                                " below minimal feasible spend " + std::to_string(min_budget));
  const long long kmax = group_count(p.n);
  double denom = 0.0;
  for (long long r = 1; r <= kmax; ++r)
    denom += unit_ball_volume(static_cast<int>(r)) * std::pow(p.B, static_cast<double>(r));

  Allocation alloc;
  alloc.n = p.n;
  alloc.counts.resize(static_cast<std::size_t>(kmax));
  for (long long k = 1; k <= kmax; ++k) {
    double nk = 1.0;
    if (denom > 0.0) {
      nk = static_cast<double>(p.N_budget) * std::pow(static_cast<double>(p.d), -1.5) *
           unit_ball_volume(static_cast<int>(k)) * std::pow(p.B, static_cast<double>(k)) / denom;
    }
    alloc.counts[static_cast<std::size_t>(k - 1)] = std::max(1LL, std::llround(nk));
  }
  return alloc;
}

Allocation allocate_uniform(const ObjectiveParams& p) {
  const long long min_budget = minimal_budget(p);
  if (p.N_budget < min_budget)
    throw std::invalid_argument("allocate_uniform: budget " + std::to_string(p.N_budget) +
                                " below minimal feasible spend " + std::to_string(min_budget));
  Allocation alloc;
  alloc.n = p.n;
  alloc.counts.assign(static_cast<std::size_t>(group_count(p.n)),
                      std::max(1LL, p.N_budget / min_budget));
  return alloc;
}

MinVarianceReport min_variance_report(const ObjectiveParams& p) {
  MinVarianceReport report;
  if (p.N_budget > 0) report.z_at_optimum = objective_Z(allocate_exact(p), p);

  const long long kmax = group_count(p.n);
  double sum_m = 0.0, sum_r = 0.0;
  for (long long k = 1; k <= kmax; ++k) {
    const double A = static_cast<double>(coeff_A(static_cast<int>(k), p.n));
    const double W = unit_ball_volume(static_cast<int>(k));
    const double Bk = std::pow(p.B, static_cast<double>(k));
    sum_m += W * A * Bk;
    sum_r += std::sqrt(static_cast<double>(k + 1)) * W * A * Bk;
  }
  report.product_form = std::pow(static_cast<double>(p.d), 1.5) /
                        static_cast<double>(p.N_budget) * sum_m * sum_r;
  return report;
}

}  // namespace nsmc
