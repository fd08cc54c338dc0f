#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsmc/allocation.hpp"
#include "nsmc/combinatorics.hpp"
#include "nsmc/convolution.hpp"
#include "nsmc/estimate.hpp"
#include "nsmc/fields.hpp"
#include "nsmc/rng.hpp"

namespace nsmc {

/// Symbolic term of the quadratic iteration u <- u0 + w (.) (u . grad u).
/// A product contracts a value factor against a derivative factor over
/// one shared coordinate; the derivative factor's root (gradient leaf or
/// gradient convolution) receives the contraction coordinate when the
/// term is evaluated, so no vector-valued kernel product is ever formed.
struct TermTree {
  enum class Kind { leaf_u0, leaf_du0, product, conv_plain, conv_grad };
  Kind kind;
  std::shared_ptr<const TermTree> left;   // conv child / product value factor
  std::shared_ptr<const TermTree> right;  // product derivative factor
};
using TermPtr = std::shared_ptr<const TermTree>;

struct TermSignature {
  int l1 = 0;      // plain convolutions in the term
  int l2 = 0;      // gradient convolutions in the term
  int degree = 0;  // source-field leaves; l1 + l2 = degree - 1
};

TermSignature term_signature(const TermTree& term);

/// Canonical serialization, usable as a structural identity for tests.
std::string term_to_string(const TermTree& term);

/// Template-level scalar summand count: every product fans out over d^2
/// index choices. Matches the quadratic integer recursion level by level.
BigInt term_scalar_count(const TermTree& term, int d);

struct ExpansionPlan {
  int n = 0;
  int d = 0;
  std::vector<TermPtr> terms;    // all terms of the n-th iterate, the bare leaf included
  std::map<int, BigInt> counts;  // degree -> group size (equals the recursion coefficients)
  BigInt scalar_summands;        // sum of template counts; equals d_sequence(n, d)

  std::vector<TermPtr> group(int degree) const;
};

/// Full symbolic expansion of the n-th iterate with products distributed
/// over sums. Refuses expansions whose projected scalar template count
/// exceeds the cap, naming the required resource.
ExpansionPlan expand_terms(int n, int d, const BigInt& scalar_cap = BigInt(10'000'000));

/// Source of the linear-part leaves (the value and gradient of the heat
/// solution with initial data a and forcing f).
class U0Source {
 public:
  virtual ~U0Source() = default;
  virtual int dimension() const = 0;
  virtual bool is_exact() const = 0;
  virtual double value(std::span<const double> x, double t, int comp,
                       const RandomStream& leaf_stream) const = 0;
  virtual double gradient(std::span<const double> x, double t, int comp, int j,
                          const RandomStream& leaf_stream) const = 0;
};

/// Closed-form leaves; supports field kinds with exact heat evolution and
/// forcings whose time integral is elementary (constant, linear,
/// product_time). The stream argument is ignored.
class ExactU0 : public U0Source {
 public:
  ExactU0(std::vector<TestField> a, std::optional<std::vector<TestField>> f = std::nullopt);
  int dimension() const override { return d_; }
  bool is_exact() const override { return true; }
  double value(std::span<const double> x, double t, int comp,
               const RandomStream&) const override;
  double gradient(std::span<const double> x, double t, int comp, int j,
                  const RandomStream&) const override;

 private:
  std::vector<TestField> a_;
  std::optional<std::vector<TestField>> f_;
  int d_;
};

/// Monte-Carlo leaves with their own sub-budget. Value and gradient at
/// one anchor share the leaf stream (the same variates), which biases
/// products of two estimated leaves by O(1/n0); kept for comparison runs,
/// exact leaves are the default elsewhere.
class McU0 : public U0Source {
 public:
  McU0(std::vector<TestField> a, std::optional<std::vector<TestField>> f, long long n0);
  int dimension() const override { return d_; }
  bool is_exact() const override { return false; }
  double value(std::span<const double> x, double t, int comp,
               const RandomStream& leaf_stream) const override;
  double gradient(std::span<const double> x, double t, int comp, int j,
                  const RandomStream& leaf_stream) const override;

 private:
  std::vector<TestField> a_;
  std::optional<std::vector<TestField>> f_;
  long long n0_;
  int d_;
};

/// One term estimated at (x, t) for one output component, n_samples
/// top-level samples. Convolution steps are sampled one nesting level at
/// a time with the step laws of the convolution module; every node of the
/// term owns a fixed substream slot, so the value and the d derivative
/// mirrors of the term reuse identical variates.
EstimateWithError evaluate_term_mc(const TermTree& term, const U0Source& u0,
                                   std::span<const double> x, double t, int component,
                                   long long n_samples, const RandomStream& stream);

struct TermValueAndGrads {
  EstimateWithError value;
  std::vector<EstimateWithError> grads;  // one per output gradient coordinate
};

/// Value and all d output-gradient mirrors from the same sample paths.
TermValueAndGrads evaluate_term_with_grads(const TermTree& term, const U0Source& u0,
                                           std::span<const double> x, double t, int component,
                                           long long n_samples, const RandomStream& stream);

struct SolutionEstimate {
  SpaceTimeGrid grid;
  std::vector<std::vector<EstimateWithError>> values;              // [point][comp]
  std::vector<std::vector<std::vector<EstimateWithError>>> grads;  // [point][comp][j]
  long long budget_used = 0;
};

struct IterateOptions {
  int n = 1;
  std::uint64_t seed = 0;
  bool exact_u0 = true;
  long long mc_u0_samples = 1000;
  BigInt scalar_cap = BigInt(10'000'000);
  int threads = 1;
};

/// Assembles the n-th iterate and its gradient on the grid from
/// term-by-term estimates, one substream per (term, point), budget
/// accounted as sum_k A(k,n) N(k) d (k+1).
SolutionEstimate iterate_solution(const std::vector<TestField>& a,
                                  const std::optional<std::vector<TestField>>& f,
                                  const SpaceTimeGrid& grid, const Allocation& alloc,
                                  const IterateOptions& opts);

/// Baseline nested scheme: each level resamples the previous iterate
/// inside the forced-problem estimator. Biased in general through the
/// nested nonlinearity; reported for comparison only. budget_used is
/// 2 N(0) + sum_{j>=1} (j+1) N(j).
SolutionEstimate iterate_nested(const std::vector<TestField>& a,
                                const std::optional<std::vector<TestField>>& f,
                                const SpaceTimeGrid& grid, const std::vector<long long>& level_n,
                                std::uint64_t seed);

/// Aggregate variance bound sum_k max(t^k,t^{2k}) W(k)^2 A(k,n) B^{2k} / N(k).
double variance_aggregate(const Allocation& alloc, double t, double B, int n, int d);

/// Grid-sup of max(|x|,1) * max(|u_i|, |du_i/dx_j|): a lower estimate of
/// the true weighted sup, labeled as such.
double triple_norm_estimate(const SpaceTimeGrid& grid,
                            const std::vector<std::vector<double>>& values,
                            const std::vector<std::vector<std::vector<double>>>& grads);

}  // namespace nsmc
