#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "vshock/flux.hpp"
#include "vshock/interpolation.hpp"

namespace vshock {

/// Far-field states, viscosity exponent and wave speed of a viscous shock.
struct ShockParams {
  double u_minus = 1.0;
  double u_plus = -1.0;
  double p = 1.0;
  FluxSpec flux = FluxSpec::burgers();
  double gamma = 0.0;

  /// Validates u_minus > u_plus and p >= 1 and fills gamma from the
  /// Rankine-Hugoniot condition.
  static ShockParams make(double u_minus, double u_plus, double p,
                          FluxSpec flux = FluxSpec::burgers());

  double jump() const noexcept { return u_minus - u_plus; }
  double anchor() const noexcept { return 0.5 * (u_minus + u_plus); }
  bool is_burgers() const noexcept { return flux.kind() == FluxSpec::Kind::burgers; }
};

/// gamma = (f(u-) - f(u+)) / (u- - u+).
double rankine_hugoniot_speed(const FluxSpec& flux, double u_minus, double u_plus);

/// Burgers profile slope U' = -(0.5 (u- - U)(U - u+))^(1/p).
double profile_slope(double U, const ShockParams& params);

/// p = 1 traveling-wave slope for a general flux, U' = f(U) - f(u-) - gamma (U - u-).
double general_flux_slope(double U, const ShockParams& params);

/// Tabulated traveling wave U(xi) on a uniform grid with U(0) = (u- + u+)/2.
///
/// Values are immutable once built. Off-grid evaluation uses a monotone cubic
/// through the tabulated values and slopes; beyond the table the far-field
/// states are returned.
class Profile {
 public:
  Profile() = default;
  Profile(ShockParams params, double xi_min, double spacing, std::vector<double> U,
          std::vector<double> Uprime, double x_L, double x_R);

  const ShockParams& params() const noexcept { return params_; }
  double xi_min() const noexcept { return xi_min_; }
  double xi_max() const noexcept { return xi_min_ + spacing_ * static_cast<double>(U_.size() - 1); }
  double spacing() const noexcept { return spacing_; }
  std::size_t size() const noexcept { return U_.size(); }
  double xi(std::size_t j) const noexcept { return xi_min_ + spacing_ * static_cast<double>(j); }
  std::span<const double> U() const noexcept { return U_; }
  std::span<const double> Uprime() const noexcept { return Uprime_; }

  /// Left/right support endpoints; -inf/+inf for p = 1.
  double x_L() const noexcept { return x_L_; }
  double x_R() const noexcept { return x_R_; }
  bool has_compact_support() const noexcept { return std::isfinite(x_L_) && std::isfinite(x_R_); }

  double value(double xi) const;
  /// Slope law evaluated at the interpolated value, so U'(xi) is consistent
  /// with U(xi) everywhere.
  double slope(double xi) const;
  double slope_of_value(double U) const;

 private:
  ShockParams params_;
  double xi_min_ = 0.0;
  double spacing_ = 1.0;
  std::vector<double> U_;
  std::vector<double> Uprime_;
  double x_L_ = -std::numeric_limits<double>::infinity();
  double x_R_ = std::numeric_limits<double>::infinity();
  MonotoneCubic interp_;
};

/// Burgers-flux profile for any p >= 1 by quadrature inversion of
/// xi = -int_{U0}^{U} dw / (0.5 (u- - w)(w - u+))^(1/p).
///
/// The endpoint singularity is removed by substitution before quadrature,
/// w = u+ + (du/2) tau^(p/(p-1)) for p > 1 and w = u+ + (du/2) e^{-t} for
/// p = 1 (mirrored on the left). For p = 1 the tails are tabulated until
/// |U - u_pm| < 1e-12 and extended by the constant states.
///
/// Throws ToleranceError naming the endpoint when a quadrature misses tol.
Profile build_profile(const ShockParams& params, double xi_min, double xi_max, std::size_t n,
                      double tol = 1e-12);

/// p = 1 profile for a general convex flux by quadrature inversion of
/// xi = int_{U0}^{U} dw / (f(w) - f(u-) - gamma (w - u-)).
Profile general_flux_profile(const ShockParams& params, double xi_min, double xi_max,
                             std::size_t n, double tol = 1e-12);

/// Dispatches to build_profile or general_flux_profile.
Profile make_profile(const ShockParams& params, double xi_min, double xi_max, std::size_t n,
                     double tol = 1e-12);

/// Scaling t -> mu tau, x -> mu^(2/(p+1)) y that reduces the viscosity to 1.
/// Every solver in this library assumes the rescaled form (mu = 1).
struct ViscosityScaling {
  double time_scale;
  double space_scale;
};
ViscosityScaling rescale_viscosity(double mu, double p);

/// CSV with header `xi,U,Uprime`, round-trip decimal.
void write_profile_csv(const Profile& profile, std::ostream& out);

}  // namespace vshock
