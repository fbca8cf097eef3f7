#include "vshock/flux.hpp"

#include <cmath>
#include <sstream>

#include "vshock/errors.hpp"

namespace vshock {

FluxSpec FluxSpec::burgers() {
  FluxSpec f;
  f.kind_ = Kind::burgers;
  f.name_ = "burgers";
  f.poly_.clear();
  f.c_f_ = 1.0;
  return f;
}

FluxSpec FluxSpec::polynomial(std::vector<double> coeffs, double convexity_floor,
                              std::string name) {
  if (coeffs.empty()) throw DomainError("polynomial flux needs at least one coefficient");
  if (!(convexity_floor > 0.0)) throw DomainError("convexity floor must be positive");
  FluxSpec f;
  f.kind_ = Kind::custom_convex;
  f.name_ = std::move(name);
  f.poly_ = std::move(coeffs);
  f.c_f_ = convexity_floor;
  return f;
}

FluxSpec FluxSpec::quartic() {
  return polynomial({0.5, 0.0, 1.0 / 12.0}, 1.0, "quartic");
}

FluxSpec FluxSpec::custom(std::string name, Fn f, Fn df, double convexity_floor) {
  if (!f || !df) throw DomainError("custom flux needs both f and f'");
  if (!(convexity_floor > 0.0)) throw DomainError("convexity floor must be positive");
  FluxSpec s;
  s.kind_ = Kind::custom_convex;
  s.name_ = std::move(name);
  s.poly_.clear();
  s.f_ = std::move(f);
  s.df_ = std::move(df);
  s.c_f_ = convexity_floor;
  return s;
}

FluxSpec FluxSpec::from_name(const std::string& name) {
  if (name == "burgers") return burgers();
  if (name == "quartic") return quartic();
  const std::string prefix = "polynomial:";
  if (name.rfind(prefix, 0) == 0) {
    std::vector<double> coeffs;
    std::stringstream ss(name.substr(prefix.size()));
    std::string item;
    while (std::getline(ss, item, ',')) coeffs.push_back(std::stod(item));
    if (coeffs.empty()) throw ConfigError("empty polynomial flux: " + name);
    // f'' >= 2*c2 - (higher terms); the caller validates on the working range.
    const double floor = 2.0 * coeffs.front();
    if (!(floor > 0.0)) throw ConfigError("polynomial flux needs a positive u^2 coefficient");
    return polynomial(std::move(coeffs), floor, name);
  }
  throw ConfigError("unknown flux '" + name + "'");
}

double FluxSpec::value(double u) const {
  if (kind_ == Kind::burgers) return 0.5 * u * u;
  if (!poly_.empty()) {
    double acc = 0.0;
    for (auto it = poly_.rbegin(); it != poly_.rend(); ++it) acc = acc * u + *it;
    return acc * u * u;
  }
  return f_(u);
}

double FluxSpec::derivative(double u) const {
  if (kind_ == Kind::burgers) return u;
  if (!poly_.empty()) {
    double acc = 0.0;
    for (std::size_t k = poly_.size(); k-- > 0;) acc = acc * u + static_cast<double>(k + 2) * poly_[k];
    return acc * u;
  }
  return df_(u);
}

void FluxSpec::validate(double lo, double hi, int samples) const {
  if (std::abs(value(0.0)) > 1e-12 || std::abs(derivative(0.0)) > 1e-12)
    throw DomainError("flux '" + name_ + "' violates f(0) = f'(0) = 0");
  if (!(hi > lo)) throw DomainError("empty flux validation range");
  const double h = 1e-3 * std::max(1.0, hi - lo);
  for (int i = 0; i < samples; ++i) {
    const double v = lo + (hi - lo) * i / (samples - 1);
    const double d2 = (value(v + h) - 2.0 * value(v) + value(v - h)) / (h * h);
    if (d2 < c_f_ * (1.0 - 1e-6)) {
      std::ostringstream msg;
      msg << "flux '" << name_ << "' is not uniformly convex at u = " << v
          << " (second difference " << d2 << " < c_f = " << c_f_ << ")";
      throw DomainError(msg.str());
    }
  }
}

double FluxSpec::sonic_point(double slope) const {
  if (kind_ == Kind::burgers) return slope;
  // f' is increasing with f'' >= c_f, so |u*| <= |slope| / c_f brackets the root.
  double lo = -std::abs(slope) / c_f_ - 1.0;
  double hi = std::abs(slope) / c_f_ + 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (derivative(mid) < slope) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace vshock
