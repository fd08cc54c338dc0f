#include "nsmc/special.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nsmc {

double unit_ball_volume(int m) {
  if (m < 1) throw std::domain_error("unit_ball_volume: m must be >= 1");
  return std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(1.0 + 0.5 * m);
}

double sphere_area(int d) {
  if (d < 1) throw std::domain_error("sphere_area: d must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double dirichlet_simplex_integral(std::span<const double> alphas) {
  double log_num = 0.0;
  double exponent_sum = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0 && a < 1.0))
      throw std::domain_error("dirichlet_simplex_integral: alpha outside [0,1)");
    log_num += std::lgamma(1.0 - a);
    exponent_sum += 1.0 - a;
  }
  return std::exp(log_num - std::lgamma(1.0 + exponent_sum));
}

double mittag_leffler_partial(double beta, double z, int terms) {
  if (beta <= 0.0) throw std::domain_error("mittag_leffler_partial: beta must be positive");
  if (terms < 1) throw std::domain_error("mittag_leffler_partial: terms must be >= 1");
  double sum = 0.0;
  const double log_abs_z = (z == 0.0) ? 0.0 : std::log(std::fabs(z));
  for (int n = 0; n < terms; ++n) {
    double term;
    if (n == 0) {
      term = 1.0;
    } else if (z == 0.0) {
      break;  // all remaining terms vanish
    } else {
      const double magnitude = n * log_abs_z - std::lgamma(1.0 + n * beta);
      term = std::exp(magnitude);
      if (z < 0.0 && (n % 2)) term = -term;
    }
    sum += term;
    if (!std::isfinite(sum))
      throw std::overflow_error("mittag_leffler_partial: sum saturated at term " +
                                std::to_string(n));
  }
  return sum;
}

}  // namespace nsmc
