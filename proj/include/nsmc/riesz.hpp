#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nsmc/estimate.hpp"
#include "nsmc/fields.hpp"
#include "nsmc/rng.hpp"

namespace nsmc {

/// Projection matrix onto the orthogonal complement of a frequency
/// vector xi: delta_ij - xi_i xi_j / |xi|^2. Symmetric, idempotent,
/// annihilates xi.
struct ProjectionSymbol {
  std::vector<double> xi;
  std::vector<double> matrix;  // d x d, row-major
  int d = 0;

  double at(int i, int j) const { return matrix[static_cast<std::size_t>(i) * d + j]; }
};

ProjectionSymbol hw_symbol(std::span<const double> xi);

/// Normalization constant -pi^{(d+1)/2} / Gamma((d+1)/2) of the singular
/// kernel, kept verbatim; only symmetry-forced zeros and internal
/// consistency are validated, not external normalization tables.
double riesz_constant(int d);

using PointFn = std::function<double(std::span<const double>)>;

/// Truncated principal value of the odd singular integral over the
/// annulus eps < |y| < R, with log-uniform radial importance sampling
/// and a uniform spherical direction:
///   c(d) * Int  |y|^{-d} (y_k/|y|) f(x - y) dy.
EstimateWithError riesz_truncated_mc(const PointFn& f, int k, std::span<const double> x,
                                     double eps, double R, long long n_samples,
                                     const RandomStream& stream, int d, int threads = 1);

/// Pointwise-evaluable vector field with a registry of named shapes for
/// tests and the command line.
class VectorField {
 public:
  using Eval = std::function<double(std::span<const double>, int comp)>;

  VectorField(int d, Eval eval) : d_(d), eval_(std::move(eval)) {}

  /// Component-wise wrapper over scalar fields sharing one dimension.
  static VectorField from_components(std::vector<TestField> components);

  /// Named shapes: "rotor" (x2, -x1, 0, ...), "constant" (params),
  /// "curl_bump" (divergence-free compact curl of a Gaussian stream
  /// function, d = 3), "gradient_bump" (gradient of a Gaussian, any d).
  static VectorField named(const std::string& name, int d, std::vector<double> params = {});

  int dimension() const { return d_; }
  double value(std::span<const double> x, int comp) const { return eval_(x, comp); }

  /// Central finite difference of component i along coordinate j.
  double fd_gradient(std::span<const double> x, int i, int j, double h = 1e-4) const;

 private:
  int d_;
  Eval eval_;
};

enum class BilinearMode { convective_only, full };

struct RieszParams {
  double eps = 1e-3;
  double R = 10.0;
  long long n_outer = 2000;
  long long n_inner = 200;
};

/// The bilinear transport form at a point: (u . grad) v, plus in full
/// mode the divergence term and its projection part realized through the
/// truncated singular transform, [Q g]_i = g_i + R_i sum_j R_j g_j with
/// g = div(u x v). Gradients of sampled fields use central differences.
std::vector<double> bilinear_B(const VectorField& u, const VectorField& v, BilinearMode mode,
                               const std::optional<RieszParams>& riesz_params,
                               std::span<const double> x, const RandomStream& stream,
                               double h_fd = 1e-4);

}  // namespace nsmc
