#include "nsmc/riesz.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nsmc/parallel.hpp"
#include "nsmc/special.hpp"

namespace nsmc {

ProjectionSymbol hw_symbol(std::span<const double> xi) {
  double norm2 = 0.0;
  for (double v : xi) norm2 += v * v;
  if (!(norm2 > 0.0)) throw std::domain_error("hw_symbol: xi must be nonzero");

  ProjectionSymbol sym;
  sym.d = static_cast<int>(xi.size());
  sym.xi.assign(xi.begin(), xi.end());
  sym.matrix.resize(static_cast<std::size_t>(sym.d) * sym.d);
  for (int i = 0; i < sym.d; ++i)
    for (int j = 0; j < sym.d; ++j)
      sym.matrix[static_cast<std::size_t>(i) * sym.d + j] =
          (i == j ? 1.0 : 0.0) -
          xi[static_cast<std::size_t>(i)] * xi[static_cast<std::size_t>(j)] / norm2;
  return sym;
}

double riesz_constant(int d) {
  if (d < 1) throw std::domain_error("riesz_constant: d must be >= 1");
  return -std::pow(std::numbers::pi, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
}

namespace {

struct AnnulusDraw {
  double r = 0.0;
  std::vector<double> theta;  // unit direction
};

AnnulusDraw draw_annulus(RandomStream& s, int d, double eps, double log_ratio) {
  AnnulusDraw a;
  a.r = eps * std::exp(s.u01() * log_ratio);
  a.theta.resize(static_cast<std::size_t>(d));
  double norm2 = 0.0;
  for (double& c : a.theta) {
    c = s.normal();
    norm2 += c * c;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& c : a.theta) c *= inv;
  return a;
}

}  // namespace

EstimateWithError riesz_truncated_mc(const PointFn& f, int k, std::span<const double> x,
                                     double eps, double R, long long n_samples,
                                     const RandomStream& stream, int d, int threads) {
  if (!(eps > 0.0) || !(eps < R)) throw std::domain_error("riesz_truncated_mc: need 0 < eps < R");
  if (k < 0 || k >= d) throw std::domain_error("riesz_truncated_mc: coordinate out of range");
  if (n_samples < 1) throw std::domain_error("riesz_truncated_mc: need at least one sample");

  const double log_ratio = std::log(R / eps);
  const double prefactor = riesz_constant(d) * sphere_area(d) * log_ratio;

  std::vector<double> values(static_cast<std::size_t>(n_samples));
  parallel_for(values.size(), threads, [&](std::size_t i) {
    RandomStream sub = stream.child(i);
    const AnnulusDraw a = draw_annulus(sub, d, eps, log_ratio);
    std::vector<double> arg(x.begin(), x.end());
    for (int c = 0; c < d; ++c)
      arg[static_cast<std::size_t>(c)] -= a.r * a.theta[static_cast<std::size_t>(c)];
    values[i] = prefactor * a.theta[static_cast<std::size_t>(k)] * f(arg);
    if (!std::isfinite(values[i]))
      throw std::runtime_error("riesz_truncated_mc: non-finite value at sample " +
                               std::to_string(i));
  });
  return finalize_samples(values);
}

VectorField VectorField::from_components(std::vector<TestField> components) {
  if (components.empty()) throw std::invalid_argument("VectorField: no components");
  const int d = components[0].dimension();
  for (const auto& c : components)
    if (c.dimension() != d) throw std::invalid_argument("VectorField: mixed dimensions");
  return VectorField(d, [comps = std::move(components)](std::span<const double> x, int i) {
    return comps[static_cast<std::size_t>(i)].value(x, 0.0);
  });
}

VectorField VectorField::named(const std::string& name, int d, std::vector<double> params) {
  if (name == "rotor") {
    if (d < 2) throw std::invalid_argument("rotor field needs d >= 2");
    return VectorField(d, [](std::span<const double> x, int i) {
      if (i == 0) return x[1];
      if (i == 1) return -x[0];
      return 0.0;
    });
  }
  if (name == "constant") {
    if (static_cast<int>(params.size()) != d)
      throw std::invalid_argument("constant vector field needs d parameters");
    return VectorField(d, [params](std::span<const double>, int i) {
      return params[static_cast<std::size_t>(i)];
    });
  }
  if (name == "curl_bump") {
    // curl of (0, 0, psi) with a Gaussian stream function psi:
    // divergence-free and rapidly decaying
    if (d != 3) throw std::invalid_argument("curl_bump is three-dimensional");
    const double sigma = params.empty() ? 1.0 : params[0];
    if (!(sigma > 0.0)) throw std::invalid_argument("curl_bump: sigma must be positive");
    return VectorField(3, [sigma](std::span<const double> x, int i) {
      const double psi =
          std::exp(-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * sigma * sigma));
      if (i == 0) return -x[1] / (sigma * sigma) * psi;
      if (i == 1) return x[0] / (sigma * sigma) * psi;
      return 0.0;
    });
  }
  if (name == "gradient_bump") {
    const double sigma = params.empty() ? 1.0 : params[0];
    if (!(sigma > 0.0)) throw std::invalid_argument("gradient_bump: sigma must be positive");
    return VectorField(d, [sigma, d](std::span<const double> x, int i) {
      double r2 = 0.0;
      for (int c = 0; c < d; ++c)
        r2 += x[static_cast<std::size_t>(c)] * x[static_cast<std::size_t>(c)];
      return -x[static_cast<std::size_t>(i)] / (sigma * sigma) *
             std::exp(-r2 / (2.0 * sigma * sigma));
    });
  }
  throw std::invalid_argument("unknown vector field: " + name);
}

double VectorField::fd_gradient(std::span<const double> x, int i, int j, double h) const {
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  xp[static_cast<std::size_t>(j)] += h;
  xm[static_cast<std::size_t>(j)] -= h;
  return (value(xp, i) - value(xm, i)) / (2.0 * h);
}

namespace {

// div(u x v)_i = sum_k d/dx_k (u_i v_k), by central differences
double divergence_term(const VectorField& u, const VectorField& v, std::span<const double> x,
                       int i, double h) {
  const int d = u.dimension();
  double sum = 0.0;
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  for (int k = 0; k < d; ++k) {
    xp[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] + h;
    xm[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)] - h;
    sum += (u.value(xp, i) * v.value(xp, k) - u.value(xm, i) * v.value(xm, k)) / (2.0 * h);
    xp[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)];
    xm[static_cast<std::size_t>(k)] = x[static_cast<std::size_t>(k)];
  }
  return sum;
}

}  // namespace

std::vector<double> bilinear_B(const VectorField& u, const VectorField& v, BilinearMode mode,
                               const std::optional<RieszParams>& riesz_params,
                               std::span<const double> x, const RandomStream& stream,
                               double h_fd) {
  const int d = u.dimension();
  if (v.dimension() != d) throw std::invalid_argument("bilinear_B: dimension mismatch");

  std::vector<double> out(static_cast<std::size_t>(d), 0.0);
  for (int i = 0; i < d; ++i) {
    double conv = 0.0;
    for (int j = 0; j < d; ++j) conv += u.value(x, j) * v.fd_gradient(x, i, j, h_fd);
    out[static_cast<std::size_t>(i)] = conv;
  }
  if (mode == BilinearMode::convective_only) return out;
  if (!riesz_params) throw std::invalid_argument("bilinear_B: full mode needs riesz parameters");

  const RieszParams& rp = *riesz_params;
  const double log_ratio = std::log(rp.R / rp.eps);
  const double prefactor = riesz_constant(d) * sphere_area(d) * log_ratio;

  // Nested transform: outer sample s estimates R_i, its inner block
  // estimates G(w) = sum_j R_j[g_j](w) with an independent substream, so
  // the composition stays unbiased (the outer integrand is linear in the
  // inner value). One direction draw serves all j components of g.
  const auto inner_G = [&](std::span<const double> w, RandomStream inner) {
    double total = 0.0;
    for (long long s = 0; s < rp.n_inner; ++s) {
      RandomStream draw = inner.child(static_cast<std::uint64_t>(s));
      const AnnulusDraw a = draw_annulus(draw, d, rp.eps, log_ratio);
      std::vector<double> arg(w.begin(), w.end());
      for (int c = 0; c < d; ++c)
        arg[static_cast<std::size_t>(c)] -= a.r * a.theta[static_cast<std::size_t>(c)];
      double g_dot_theta = 0.0;
      for (int j = 0; j < d; ++j)
        g_dot_theta += a.theta[static_cast<std::size_t>(j)] * divergence_term(u, v, arg, j, h_fd);
      total += prefactor * g_dot_theta;
    }
    return total / static_cast<double>(rp.n_inner);
  };

  for (int i = 0; i < d; ++i) {
    out[static_cast<std::size_t>(i)] += divergence_term(u, v, x, i, h_fd);
    const RandomStream outer_root = stream.child(900 + static_cast<std::uint64_t>(i));
    std::vector<double> samples(static_cast<std::size_t>(rp.n_outer));
    for (long long s = 0; s < rp.n_outer; ++s) {
      RandomStream outer = outer_root.child(static_cast<std::uint64_t>(s)).child(0);
      const AnnulusDraw a = draw_annulus(outer, d, rp.eps, log_ratio);
      std::vector<double> w(x.begin(), x.end());
      for (int c = 0; c < d; ++c)
        w[static_cast<std::size_t>(c)] -= a.r * a.theta[static_cast<std::size_t>(c)];
      const RandomStream inner = outer_root.child(static_cast<std::uint64_t>(s)).child(1);
      samples[static_cast<std::size_t>(s)] =
          prefactor * a.theta[static_cast<std::size_t>(i)] * inner_G(w, inner);
    }
    out[static_cast<std::size_t>(i)] += finalize_samples(samples).value;
  }
  return out;
}

}  // namespace nsmc
