#include "nsmc/rng.hpp"

#include <boost/math/distributions/normal.hpp>

namespace nsmc {

double RandomStream::normal() {
  static const boost::math::normal_distribution<double> unit_normal(0.0, 1.0);
  return boost::math::quantile(unit_normal, u01());
}

}  // namespace nsmc
