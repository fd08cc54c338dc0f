#include "nsmc/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace nsmc {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the
// orthogonal-polynomial recurrence, weights the squared first eigenvector
// components scaled by the measure's total mass.
QuadRule golub_welsch(const std::vector<double>& offdiag, double total_mass) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = offdiag[static_cast<std::size_t>(i)];
    jacobi(i + 1, i) = offdiag[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = total_mass * v0 * v0;
  }
  return rule;
}

}  // namespace

QuadRule gauss_legendre_unit(int n) {
  if (n < 1) throw std::domain_error("gauss_legendre_unit: n must be >= 1");
  std::vector<double> off(static_cast<std::size_t>(n - 1));
  for (int k = 1; k < n; ++k)
    off[static_cast<std::size_t>(k - 1)] = k / std::sqrt(4.0 * k * k - 1.0);
  QuadRule rule = golub_welsch(off, 1.0);  // weight sums to 1 after mapping
  for (double& x : rule.nodes) x = 0.5 * (x + 1.0);
  return rule;
}

QuadRule gauss_hermite_unit(int n) {
  if (n < 1) throw std::domain_error("gauss_hermite_unit: n must be >= 1");
  std::vector<double> off(static_cast<std::size_t>(n - 1));
  for (int k = 1; k < n; ++k) off[static_cast<std::size_t>(k - 1)] = std::sqrt(k);
  return golub_welsch(off, 1.0);
}

namespace {

// Integrand over the cube of per-step time variables (Gauss-Legendre) and
// per-step Gaussian increments (Gauss-Hermite). Plain step j contributes
// tau_{j-1}; gradient step j, after the substitution r = 1 - v^2 that
// removes its gap singularity, contributes 2 tau_{j-1}^{1/2} and the
// kernel factor (-z_{j,k_j}).
double tensor_pass(const PathIntegrand& h, const TermKernelSpec& spec,
                   std::span<const double> x, double t, int d, const QuadRule& time_rule,
                   const QuadRule& z_rule) {
  const int m = spec.total();
  const std::vector<StepKind> steps = spec.effective_order();
  const int time_dims = m;
  const int z_dims = m * d;
  const int dims = time_dims + z_dims;

  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  GaussianBlock z;
  z.m = m;
  z.d = d;
  z.z.resize(static_cast<std::size_t>(z_dims));
  SimplexPoint tau;
  tau.coords.resize(static_cast<std::size_t>(m));

  double total = 0.0;
  while (true) {
    double weight = 1.0;
    for (int jd = 0; jd < time_dims; ++jd)
      weight *= time_rule.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(jd)])];
    for (int jd = 0; jd < z_dims; ++jd)
      weight *=
          z_rule.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(time_dims + jd)])];

    double tau_prev = 1.0;
    double step_factor = 1.0;
    int g = 0;
    for (int j = 0; j < m; ++j) {
      const double u = time_rule.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
      double ratio;
      if (steps[static_cast<std::size_t>(j)] == StepKind::grad) {
        ratio = 1.0 - u * u;  // r = 1 - v^2
        step_factor *= 2.0 * std::sqrt(tau_prev);
      } else {
        ratio = u;
        step_factor *= tau_prev;
      }
      tau_prev *= ratio;
      tau.coords[static_cast<std::size_t>(j)] = tau_prev;
    }

    double kernel = 1.0;
    g = 0;
    for (int j = 0; j < m; ++j) {
      for (int c = 0; c < d; ++c)
        z.z[static_cast<std::size_t>(j) * d + c] = z_rule.nodes[static_cast<std::size_t>(
            idx[static_cast<std::size_t>(time_dims + j * d + c)])];
    }
    for (int j = 0; j < m; ++j) {
      if (steps[static_cast<std::size_t>(j)] == StepKind::grad) {
        kernel *= -z.at(j, spec.deriv_indices[static_cast<std::size_t>(g)]);
        ++g;
      }
    }

    const PathPoint path = change_of_variables(x, t, z, tau);
    total += weight * step_factor * kernel * h(path);

    int carry = dims - 1;
    while (carry >= 0) {
      const int limit = carry < time_dims ? static_cast<int>(time_rule.nodes.size())
                                          : static_cast<int>(z_rule.nodes.size());
      if (++idx[static_cast<std::size_t>(carry)] < limit) break;
      idx[static_cast<std::size_t>(carry)] = 0;
      --carry;
    }
    if (carry < 0) break;
  }
  return std::pow(t, spec.m1 + 0.5 * spec.m2) * total;
}

}  // namespace

OracleResult quadrature_oracle(const PathIntegrand& h, const TermKernelSpec& spec,
                               std::span<const double> x, double t, int d) {
  spec.validate(d);
  if (!(t > 0.0)) throw std::domain_error("quadrature_oracle: t must be positive");
  if (spec.total() > 2 || d > 2)
    throw std::invalid_argument("quadrature_oracle: unsupported beyond m <= 2, d <= 2");

  const int dims = spec.total() * (1 + d);
  const int n_time = dims <= 4 ? 48 : 16;
  const int n_z = dims <= 4 ? 40 : 12;
  const QuadRule time_hi = gauss_legendre_unit(n_time);
  const QuadRule z_hi = gauss_hermite_unit(n_z);
  const QuadRule time_lo = gauss_legendre_unit(3 * n_time / 4);
  const QuadRule z_lo = gauss_hermite_unit(3 * n_z / 4);

  OracleResult result;
  result.value = tensor_pass(h, spec, x, t, d, time_hi, z_hi);
  result.error_estimate = std::fabs(result.value - tensor_pass(h, spec, x, t, d, time_lo, z_lo));
  return result;
}

}  // namespace nsmc
