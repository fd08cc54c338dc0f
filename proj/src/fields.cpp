#include "nsmc/fields.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nsmc {

namespace {

double sq_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

FieldKind field_kind_from_name(const std::string& name) {
  if (name == "constant") return FieldKind::constant;
  if (name == "linear") return FieldKind::linear;
  if (name == "gaussian_bump") return FieldKind::gaussian_bump;
  if (name == "polynomial_decay") return FieldKind::polynomial_decay;
  if (name == "product_time") return FieldKind::product_time;
  throw std::invalid_argument("unknown field kind: " + name);
}

std::string field_kind_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::constant: return "constant";
    case FieldKind::linear: return "linear";
    case FieldKind::gaussian_bump: return "gaussian_bump";
    case FieldKind::polynomial_decay: return "polynomial_decay";
    case FieldKind::product_time: return "product_time";
  }
  throw std::logic_error("unreachable");
}

TestField::TestField(FieldKind kind, std::vector<double> params, int d)
    : kind_(kind), params_(std::move(params)), d_(d) {
  if (d < 1) throw std::invalid_argument("TestField: dimension must be >= 1");
  const std::size_t n = params_.size();
  const std::size_t du = static_cast<std::size_t>(d);
  switch (kind_) {
    case FieldKind::constant:
      if (n != 1) throw std::invalid_argument("constant field needs [c]");
      break;
    case FieldKind::linear:
      if (n != 1 + du) throw std::invalid_argument("linear field needs [b, c_1..c_d]");
      break;
    case FieldKind::gaussian_bump:
      if (n != 2 && n != 2 + du)
        throw std::invalid_argument("gaussian_bump needs [A, sigma] or [A, sigma, mu...]");
      if (params_[1] <= 0.0) throw std::invalid_argument("gaussian_bump: sigma must be positive");
      break;
    case FieldKind::polynomial_decay:
      if (n != 2) throw std::invalid_argument("polynomial_decay needs [A, p]");
      if (params_[1] <= 0.0) throw std::invalid_argument("polynomial_decay: p must be positive");
      break;
    case FieldKind::product_time:
      if (n != 2 && n != 2 + du)
        throw std::invalid_argument("product_time needs [k, b] or [k, b, c_1..c_d]");
      if (params_[0] < 0.0) throw std::invalid_argument("product_time: k must be >= 0");
      break;
  }
}

double TestField::value(std::span<const double> x, double t) const {
  switch (kind_) {
    case FieldKind::constant:
      return params_[0];
    case FieldKind::linear: {
      double v = params_[0];
      for (int i = 0; i < d_; ++i) v += params_[1 + i] * x[i];
      return v;
    }
    case FieldKind::gaussian_bump: {
      const double a = params_[0], sigma = params_[1];
      double r2 = 0.0;
      for (int i = 0; i < d_; ++i) {
        const double mu = params_.size() > 2 ? params_[2 + i] : 0.0;
        r2 += (x[i] - mu) * (x[i] - mu);
      }
      return a * std::exp(-r2 / (2.0 * sigma * sigma));
    }
    case FieldKind::polynomial_decay:
      return params_[0] * std::pow(1.0 + sq_norm(x), -params_[1]);
    case FieldKind::product_time: {
      double v = params_[1];
      for (int i = 0; i < d_ && params_.size() > 2; ++i) v += params_[2 + i] * x[i];
      return std::pow(t, params_[0]) * v;
    }
  }
  throw std::logic_error("unreachable");
}

double TestField::gradient(std::span<const double> x, double t, int j) const {
  switch (kind_) {
    case FieldKind::constant:
      return 0.0;
    case FieldKind::linear:
      return params_[1 + j];
    case FieldKind::gaussian_bump: {
      const double sigma = params_[1];
      const double mu = params_.size() > 2 ? params_[2 + j] : 0.0;
      return value(x, t) * (-(x[j] - mu) / (sigma * sigma));
    }
    case FieldKind::polynomial_decay: {
      const double p = params_[1];
      return params_[0] * (-p) * std::pow(1.0 + sq_norm(x), -p - 1.0) * 2.0 * x[j];
    }
    case FieldKind::product_time:
      return params_.size() > 2 ? std::pow(t, params_[0]) * params_[2 + j] : 0.0;
  }
  throw std::logic_error("unreachable");
}

bool TestField::has_exact_heat() const {
  return kind_ == FieldKind::constant || kind_ == FieldKind::linear ||
         kind_ == FieldKind::gaussian_bump;
}

double TestField::exact_heat(std::span<const double> x, double t) const {
  switch (kind_) {
    case FieldKind::constant:
      return params_[0];
    case FieldKind::linear:
      return value(x, t);  // harmonic initial data is invariant
    case FieldKind::gaussian_bump: {
      const double a = params_[0], sigma = params_[1];
      const double s2 = sigma * sigma + t;
      double r2 = 0.0;
      for (int i = 0; i < d_; ++i) {
        const double mu = params_.size() > 2 ? params_[2 + i] : 0.0;
        r2 += (x[i] - mu) * (x[i] - mu);
      }
      return a * std::pow(sigma * sigma / s2, 0.5 * d_) * std::exp(-r2 / (2.0 * s2));
    }
    default:
      throw std::invalid_argument("exact_heat: no closed form for kind " +
                                  field_kind_name(kind_));
  }
}

double TestField::exact_heat_gradient(std::span<const double> x, double t, int j) const {
  switch (kind_) {
    case FieldKind::constant:
      return 0.0;
    case FieldKind::linear:
      return params_[1 + j];
    case FieldKind::gaussian_bump: {
      const double sigma = params_[1];
      const double mu = params_.size() > 2 ? params_[2 + j] : 0.0;
      return exact_heat(x, t) * (-(x[j] - mu) / (sigma * sigma + t));
    }
    default:
      throw std::invalid_argument("exact_heat_gradient: no closed form for kind " +
                                  field_kind_name(kind_));
  }
}

std::optional<double> TestField::support_radius() const {
  switch (kind_) {
    case FieldKind::gaussian_bump: {
      double mu_norm = 0.0;
      if (params_.size() > 2)
        for (int i = 0; i < d_; ++i) mu_norm += params_[2 + i] * params_[2 + i];
      return std::sqrt(mu_norm) + 8.0 * params_[1];
    }
    case FieldKind::polynomial_decay: {
      // radius where the value has decayed by 1e-8 relative to the center
      const double p = params_[1];
      return std::sqrt(std::pow(1e8, 1.0 / p) - 1.0);
    }
    default:
      return std::nullopt;
  }
}

std::optional<double> TestField::sup_bound(double t_max) const {
  switch (kind_) {
    case FieldKind::constant:
      return std::fabs(params_[0]);
    case FieldKind::gaussian_bump:
    case FieldKind::polynomial_decay:
      return std::fabs(params_[0]);
    case FieldKind::product_time: {
      bool spatial = false;
      for (std::size_t i = 2; i < params_.size(); ++i)
        if (params_[i] != 0.0) spatial = true;
      if (spatial) return std::nullopt;
      return std::fabs(params_[1]) * std::pow(std::max(t_max, 0.0), params_[0]);
    }
    case FieldKind::linear:
      return std::nullopt;
  }
  throw std::logic_error("unreachable");
}

void SpaceTimeGrid::validate() const {
  if (points.empty()) throw std::domain_error("SpaceTimeGrid: empty grid");
  if (!weights.empty() && weights.size() != points.size())
    throw std::domain_error("SpaceTimeGrid: weight count mismatch");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].t > 0.0)) throw std::domain_error("SpaceTimeGrid: t must be positive");
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[i].t == points[j].t && points[i].x == points[j].x)
        throw std::domain_error("SpaceTimeGrid: duplicate points");
    }
  }
}

double field_norm(const SpaceTimeGrid& grid,
                  const std::vector<std::vector<double>>& component_values, double p) {
  grid.validate();
  if (component_values.empty()) throw std::domain_error("field_norm: no components");
  if (!(p >= 1.0)) throw std::domain_error("field_norm: p must be >= 1");
  double best = 0.0;
  for (const auto& comp : component_values) {
    if (comp.size() != grid.points.size())
      throw std::domain_error("field_norm: value count mismatch");
    double norm = 0.0;
    if (std::isinf(p)) {
      for (double v : comp) norm = std::max(norm, std::fabs(v));
    } else {
      for (std::size_t i = 0; i < comp.size(); ++i)
        norm += grid.weight(i) * std::pow(std::fabs(comp[i]), p);
      norm = std::pow(norm, 1.0 / p);
    }
    best = std::max(best, norm);
  }
  return best;
}

}  // namespace nsmc
