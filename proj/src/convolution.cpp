#include "nsmc/convolution.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nsmc/parallel.hpp"
#include "nsmc/special.hpp"

namespace nsmc {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

std::vector<StepKind> TermKernelSpec::effective_order() const {
  if (!order.empty()) return order;
  std::vector<StepKind> steps(static_cast<std::size_t>(m1), StepKind::plain);
  steps.insert(steps.end(), static_cast<std::size_t>(m2), StepKind::grad);
  return steps;
}

void TermKernelSpec::validate(int d) const {
  if (m1 < 0 || m2 < 0 || total() < 1)
    throw std::domain_error("TermKernelSpec: need m1,m2 >= 0 and m1+m2 >= 1");
  if (static_cast<int>(deriv_indices.size()) != m2)
    throw std::domain_error("TermKernelSpec: one derivative index per gradient step");
  for (int k : deriv_indices)
    if (k < 0 || k >= d) throw std::domain_error("TermKernelSpec: derivative index out of range");
  if (!order.empty()) {
    if (static_cast<int>(order.size()) != total())
      throw std::domain_error("TermKernelSpec: order length mismatch");
    int plain = 0, grad = 0;
    for (StepKind s : order) (s == StepKind::plain ? plain : grad)++;
    if (plain != m1 || grad != m2)
      throw std::domain_error("TermKernelSpec: order step counts mismatch");
  }
}

TermKernelSpec TermKernelSpec::pure_plain(int m) {
  TermKernelSpec spec;
  spec.m1 = m;
  return spec;
}

TermKernelSpec TermKernelSpec::pure_grad(int m, std::vector<int> deriv) {
  TermKernelSpec spec;
  spec.m2 = m;
  spec.deriv_indices = std::move(deriv);
  return spec;
}

PathPoint change_of_variables(std::span<const double> x, double t, GaussianBlock z,
                              SimplexPoint tau) {
  if (!(t > 0.0)) throw std::domain_error("change_of_variables: t must be positive");
  if (z.m != tau.m()) throw std::domain_error("change_of_variables: shape mismatch");
  tau.validate();

  PathPoint path;
  path.x0.assign(x.begin(), x.end());
  path.t = t;
  path.s.resize(tau.coords.size());
  for (std::size_t j = 0; j < tau.coords.size(); ++j) path.s[j] = t * tau.coords[j];

  const int m = z.m, d = z.d;
  path.y.resize(static_cast<std::size_t>(m) * d);
  double s_prev = t;
  const double* y_prev = x.data();
  for (int j = 0; j < m; ++j) {
    const double gap = s_prev - path.s[static_cast<std::size_t>(j)];
    if (!(gap > 0.0)) throw std::domain_error("change_of_variables: zero time gap");
    const double scale = std::sqrt(gap);
    double* y_j = path.y.data() + static_cast<std::size_t>(j) * d;
    for (int c = 0; c < d; ++c) y_j[c] = y_prev[c] + z.at(j, c) * scale;
    s_prev = path.s[static_cast<std::size_t>(j)];
    y_prev = y_j;
  }
  path.z = std::move(z);
  path.tau = std::move(tau);
  return path;
}

GaussianBlock path_increments(const PathPoint& path) {
  GaussianBlock z;
  z.m = path.steps();
  z.d = path.dim();
  z.z.resize(path.y.size());
  double s_prev = path.t;
  const double* y_prev = path.x0.data();
  for (int j = 0; j < z.m; ++j) {
    const double scale = std::sqrt(s_prev - path.s[static_cast<std::size_t>(j)]);
    const double* y_j = path.y.data() + static_cast<std::size_t>(j) * z.d;
    for (int c = 0; c < z.d; ++c)
      z.z[static_cast<std::size_t>(j) * z.d + c] = (y_j[c] - y_prev[c]) / scale;
    s_prev = path.s[static_cast<std::size_t>(j)];
    y_prev = y_j;
  }
  return z;
}

PathIntegrand integrand_at_endpoint(const TestField& field) {
  return [field](const PathPoint& p) { return field.value(p.y_last(), p.s.back()); };
}

namespace {

void check_finite(double v, std::size_t i) {
  if (!std::isfinite(v))
    throw std::runtime_error("estimator failure: non-finite integrand at sample " +
                             std::to_string(i));
}

}  // namespace

EstimateWithError estimate_I(const PathIntegrand& h, int m, std::span<const double> x, double t,
                             long long n_samples, const RandomStream& stream, int d,
                             int threads) {
  if (m < 1) throw std::domain_error("estimate_I: m must be >= 1");
  if (!(t > 0.0)) throw std::domain_error("estimate_I: t must be positive");
  if (n_samples < 1) throw std::domain_error("estimate_I: need at least one sample");

  const double factor = std::pow(t, m) / factorial(m);
  std::vector<double> values(static_cast<std::size_t>(n_samples));
  parallel_for(values.size(), threads, [&](std::size_t i) {
    RandomStream sub = stream.child(i);
    SimplexPoint tau = uniform_simplex_sample(m, sub);
    GaussianBlock z = gaussian_block_sample(m, d, sub);
    const PathPoint path = change_of_variables(x, t, std::move(z), std::move(tau));
    values[i] = factor * h(path);
    check_finite(values[i], i);
  });
  return finalize_samples(values);
}

EstimateWithError estimate_J(const PathIntegrand& h, const TermKernelSpec& spec,
                             std::span<const double> x, double t, long long n_samples,
                             const RandomStream& stream, int d, int threads) {
  spec.validate(d);
  if (spec.m1 != 0) throw std::domain_error("estimate_J: spec must be pure gradient");
  if (!(t > 0.0)) throw std::domain_error("estimate_J: t must be positive");
  if (n_samples < 1) throw std::domain_error("estimate_J: need at least one sample");
  const int m = spec.m2;

  const double factor = std::pow(t, 0.5 * m) * unit_ball_volume(m);
  std::vector<double> values(static_cast<std::size_t>(n_samples));
  parallel_for(values.size(), threads, [&](std::size_t i) {
    RandomStream sub = stream.child(i);
    SimplexPoint tau = pb_half_sample(m, sub);
    GaussianBlock z = gaussian_block_sample(m, d, sub);
    double kernel = 1.0;
    for (int j = 0; j < m; ++j) kernel *= -z.at(j, spec.deriv_indices[static_cast<std::size_t>(j)]);
    const PathPoint path = change_of_variables(x, t, std::move(z), std::move(tau));
    values[i] = factor * kernel * h(path);
    check_finite(values[i], i);
  });
  return finalize_samples(values);
}

EstimateWithError estimate_K(const PathIntegrand& h, const TermKernelSpec& spec,
                             std::span<const double> x, double t, long long n_samples,
                             const RandomStream& stream, int d, int threads) {
  spec.validate(d);
  if (spec.m2 == 0) return estimate_I(h, spec.m1, x, t, n_samples, stream, d, threads);
  if (spec.m1 == 0) return estimate_J(h, spec, x, t, n_samples, stream, d, threads);

  const int m = spec.total();
  const std::vector<StepKind> steps = spec.effective_order();

  // Ratio-weight exponents: a plain step is reweighted by the half-count
  // of gradient steps after it, a gradient step by the count of plain
  // steps after it. Pure shapes make every exponent vanish, recovering
  // the constant-prefactor estimators exactly.
  std::vector<double> exponents(steps.size(), 0.0);
  {
    int plains_after = 0, grads_after = 0;
    for (int j = m - 1; j >= 0; --j) {
      exponents[static_cast<std::size_t>(j)] =
          steps[static_cast<std::size_t>(j)] == StepKind::grad
              ? static_cast<double>(plains_after)
              : 0.5 * static_cast<double>(grads_after);
      (steps[static_cast<std::size_t>(j)] == StepKind::plain ? plains_after : grads_after)++;
    }
  }

  const double factor =
      std::pow(t, spec.m1 + 0.5 * spec.m2) * unit_ball_volume(spec.m2) / factorial(spec.m1);

  std::vector<double> values(static_cast<std::size_t>(n_samples));
  parallel_for(values.size(), threads, [&](std::size_t i) {
    RandomStream sub = stream.child(i);
    const SimplexPoint kappa = pb_half_sample(spec.m2, sub);
    const SimplexPoint nu = uniform_simplex_sample(spec.m1, sub);
    GaussianBlock z = gaussian_block_sample(m, d, sub);

    // Compose one decreasing time sequence: each step consumes the next
    // stick ratio of its own simplex variate, rescaled into the interval
    // left below the previous step.
    SimplexPoint tau;
    tau.coords.resize(static_cast<std::size_t>(m));
    double weight = 1.0;
    double kernel = 1.0;
    double tau_prev = 1.0;
    double kappa_prev = 1.0, nu_prev = 1.0;
    int g = 0, p = 0;
    for (int j = 0; j < m; ++j) {
      double ratio;
      if (steps[static_cast<std::size_t>(j)] == StepKind::grad) {
        const double c = kappa.coords[static_cast<std::size_t>(g)];
        ratio = c / kappa_prev;
        kappa_prev = c;
        kernel *= -z.at(j, spec.deriv_indices[static_cast<std::size_t>(g)]);
        ++g;
      } else {
        const double c = nu.coords[static_cast<std::size_t>(p)];
        ratio = c / nu_prev;
        nu_prev = c;
        ++p;
      }
      if (exponents[static_cast<std::size_t>(j)] != 0.0)
        weight *= std::pow(ratio, exponents[static_cast<std::size_t>(j)]);
      tau_prev *= ratio;
      tau.coords[static_cast<std::size_t>(j)] = tau_prev;
    }

    const PathPoint path = change_of_variables(x, t, std::move(z), std::move(tau));
    values[i] = factor * weight * kernel * h(path);
    check_finite(values[i], i);
  });
  return finalize_samples(values);
}

VarianceBound variance_bound(const TermKernelSpec& spec, double t, double h_sup,
                             long long n_samples) {
  if (!(h_sup >= 0.0) || !std::isfinite(h_sup))
    throw std::domain_error("variance_bound: h_sup must be finite and >= 0");
  if (n_samples < 1) throw std::domain_error("variance_bound: need at least one sample");
  const int m = spec.total();
  const double n = static_cast<double>(n_samples);
  const double sup2 = h_sup * h_sup;

  VarianceBound b;
  if (spec.m2 == 0) {
    const double f = factorial(spec.m1);
    b.tight = std::pow(t, 2 * m) * sup2 / (f * f * n);
  } else if (spec.m1 == 0) {
    const double w = unit_ball_volume(m);
    b.tight = std::pow(t, m) * w * w * sup2 / n;
  } else {
    const double w = unit_ball_volume(spec.m2);
    const double f = factorial(spec.m1);
    b.tight = std::pow(t, 2 * spec.m1 + spec.m2) * w * w * sup2 / (f * f * n);
  }
  const double wm = unit_ball_volume(m);
  b.rough = std::max(std::pow(t, m), std::pow(t, 2 * m)) * wm * wm * sup2 / n;
  return b;
}

}  // namespace nsmc
