#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nsmc {

enum class FieldKind { constant, linear, gaussian_bump, polynomial_decay, product_time };

FieldKind field_kind_from_name(const std::string& name);
std::string field_kind_name(FieldKind kind);

/// Scalar analytic field from a small named registry. Keeping fields as
/// named parameter families (instead of arbitrary code) keeps runs
/// reproducible from a config file and keeps closed-form references
/// available where they exist.
///
/// Parameter layout per kind:
///   constant          [c]
///   linear            [b, c_1..c_d]              value b + sum c_i x_i
///   gaussian_bump     [A, sigma, (mu_1..mu_d)]   A exp(-|x-mu|^2 / (2 sigma^2))
///   polynomial_decay  [A, p]                     A (1+|x|^2)^{-p}
///   product_time      [k, b, (c_1..c_d)]         t^k (b + sum c_i x_i)
class TestField {
 public:
  TestField(FieldKind kind, std::vector<double> params, int d);

  double value(std::span<const double> x, double t) const;
  double gradient(std::span<const double> x, double t, int j) const;

  /// Closed-form evolution under the half-Laplacian heat semigroup, where
  /// one exists (constant, linear, gaussian_bump).
  bool has_exact_heat() const;
  double exact_heat(std::span<const double> x, double t) const;
  double exact_heat_gradient(std::span<const double> x, double t, int j) const;

  /// Radius outside which the field is negligible; absent for fields
  /// without spatial decay.
  std::optional<double> support_radius() const;

  /// Bound on |value| over R^d x [0, t_max]; absent when unbounded.
  std::optional<double> sup_bound(double t_max) const;

  FieldKind kind() const { return kind_; }
  int dimension() const { return d_; }
  const std::vector<double>& params() const { return params_; }

 private:
  FieldKind kind_;
  std::vector<double> params_;
  int d_;
};

struct SpaceTimePoint {
  std::vector<double> x;
  double t = 0.0;
};

/// Finite evaluation set; weights default to 1 per point when empty.
struct SpaceTimeGrid {
  std::vector<SpaceTimePoint> points;
  std::vector<double> weights;

  void validate() const;
  double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
};

/// Grid-discretized L_p norm (weighted) or sup norm (p = infinity) of a
/// sampled vector field, maximized over components.
/// component_values[c][i] is component c at grid point i.
double field_norm(const SpaceTimeGrid& grid,
                  const std::vector<std::vector<double>>& component_values, double p);

}  // namespace nsmc
