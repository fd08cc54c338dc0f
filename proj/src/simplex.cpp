#include "nsmc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

#include "nsmc/special.hpp"

namespace nsmc {

namespace {

constexpr double kMinGap = 1e-300;

double clamp_open_unit(double x) {
  const double lo = std::nextafter(0.0, 1.0);
  const double hi = std::nextafter(1.0, 0.0);
  return std::min(std::max(x, lo), hi);
}

}  // namespace

std::vector<double> SimplexPoint::gaps() const {
  std::vector<double> g(coords.size());
  double prev = 1.0;
  for (std::size_t j = 0; j < coords.size(); ++j) {
    g[j] = prev - coords[j];
    prev = coords[j];
  }
  return g;
}

void SimplexPoint::validate() const {
  if (coords.empty()) throw std::domain_error("SimplexPoint: empty");
  double prev = 1.0;
  for (double c : coords) {
    if (!(c > 0.0 && c < prev)) throw std::domain_error("SimplexPoint: ordering violated");
    prev = c;
  }
  double total = coords.back();
  for (double g : gaps()) total += g;
  if (std::fabs(total - 1.0) > 1e-12)
    throw std::domain_error("SimplexPoint: gap partition does not sum to 1");
}

GaussianBlock gaussian_block_sample(int m, int d, RandomStream& stream) {
  if (m < 1 || d < 1) throw std::domain_error("gaussian_block_sample: m,d must be >= 1");
  GaussianBlock block;
  block.m = m;
  block.d = d;
  block.z.resize(static_cast<std::size_t>(m) * d);
  for (double& v : block.z) v = stream.normal();
  return block;
}

SimplexPoint uniform_simplex_sample(int m, RandomStream& stream) {
  if (m < 1) throw std::domain_error("uniform_simplex_sample: m must be >= 1");
  SimplexPoint p;
  p.coords.resize(m);
  for (double& c : p.coords) c = stream.u01();
  std::sort(p.coords.begin(), p.coords.end(), std::greater<double>());
  return p;
}

SimplexPoint pb_half_sample(int m, RandomStream& stream) {
  if (m < 1) throw std::domain_error("pb_half_sample: m must be >= 1");
  SimplexPoint p;
  p.coords.resize(m);
  double tau = 1.0;
  for (int i = 1; i <= m; ++i) {
    // Stick ratio for gap i of Dirichlet(1/2,...,1/2,1):
    // Beta(1/2, (m-i)/2 + 1), inverted on one uniform.
    const double a = 0.5;
    const double b = 0.5 * (m - i) + 1.0;
    const double ratio = clamp_open_unit(boost::math::ibeta_inv(a, b, stream.u01()));
    tau *= (1.0 - ratio);
    p.coords[i - 1] = tau;
  }
  return p;
}

double pb_density(const SimplexPoint& point) {
  point.validate();
  double r = 1.0;
  for (double g : point.gaps()) {
    if (g < kMinGap) throw std::domain_error("pb_density: degenerate gap");
    r /= std::sqrt(g);
  }
  return r / unit_ball_volume(point.m());
}

}  // namespace nsmc
