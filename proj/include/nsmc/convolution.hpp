#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nsmc/estimate.hpp"
#include "nsmc/fields.hpp"
#include "nsmc/rng.hpp"
#include "nsmc/simplex.hpp"

namespace nsmc {

enum class StepKind { plain, grad };

/// Shape of one iterated space-time convolution: m1 plain heat-kernel
/// steps and m2 gradient-kernel steps. `order` lists the steps outermost
/// first; when empty, plain steps precede gradient steps. deriv_indices
/// holds the 0-based gradient coordinate of each gradient step, in order
/// of appearance.
struct TermKernelSpec {
  int m1 = 0;
  int m2 = 0;
  std::vector<int> deriv_indices;
  std::vector<StepKind> order;

  int total() const { return m1 + m2; }
  std::vector<StepKind> effective_order() const;
  void validate(int d) const;

  static TermKernelSpec pure_plain(int m);
  static TermKernelSpec pure_grad(int m, std::vector<int> deriv);
};

/// One sampled convolution path: step times s (decreasing in (0,t)) and
/// step locations y, obtained from Gaussian increments z and the
/// normalized times tau via y_j = y_{j-1} + z_j sqrt(s_{j-1} - s_j).
struct PathPoint {
  std::vector<double> x0;
  double t = 0.0;
  GaussianBlock z;
  SimplexPoint tau;
  std::vector<double> y;  // m x d, row-major
  std::vector<double> s;  // m entries

  int steps() const { return z.m; }
  int dim() const { return z.d; }
  double y_at(int step, int coord) const {
    return y[static_cast<std::size_t>(step) * z.d + coord];
  }
  std::span<const double> y_last() const {
    return {y.data() + static_cast<std::size_t>(z.m - 1) * z.d, static_cast<std::size_t>(z.d)};
  }
};

PathPoint change_of_variables(std::span<const double> x, double t, GaussianBlock z,
                              SimplexPoint tau);

/// Recover the Gaussian increments from path locations (inverse of the
/// substitution); used by round-trip checks.
GaussianBlock path_increments(const PathPoint& path);

using PathIntegrand = std::function<double(const PathPoint&)>;

/// Adapts a scalar field to a path integrand evaluated at the innermost
/// path point (y_m, s_m).
PathIntegrand integrand_at_endpoint(const TestField& field);

/// Iterated plain convolution, sampled with a uniform simplex time and a
/// Gaussian block; per-sample value t^m/m! h(path).
EstimateWithError estimate_I(const PathIntegrand& h, int m, std::span<const double> x, double t,
                             long long n_samples, const RandomStream& stream, int d,
                             int threads = 1);

/// Iterated gradient convolution; times follow the gap-singular simplex
/// law, and each step carries the exact kernel factor (-z_{j,k_j}), which
/// fixes the sign (a single step applied to (y_1 - x_1) yields -t).
EstimateWithError estimate_J(const PathIntegrand& h, const TermKernelSpec& spec,
                             std::span<const double> x, double t, long long n_samples,
                             const RandomStream& stream, int d, int threads = 1);

/// Mixed convolution. Pure cases dispatch to estimate_I / estimate_J with
/// the identical stream plan. Genuinely mixed cases draw the two simplex
/// variates independently (gap-singular for gradient steps, uniform for
/// plain steps), compose one decreasing time sequence by consuming each
/// variate's stick ratios in step order, and carry the per-sample ratio
/// weight that keeps the estimator unbiased for the nested operator.
EstimateWithError estimate_K(const PathIntegrand& h, const TermKernelSpec& spec,
                             std::span<const double> x, double t, long long n_samples,
                             const RandomStream& stream, int d, int threads = 1);

struct VarianceBound {
  double tight = 0.0;  // per-shape bound (pure plain / pure gradient / mixed)
  double rough = 0.0;  // max(t^m, t^{2m}) W(m)^2 sup^2 / N
};

VarianceBound variance_bound(const TermKernelSpec& spec, double t, double h_sup,
                             long long n_samples);

}  // namespace nsmc
