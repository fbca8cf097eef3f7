#pragma once

#include <functional>
#include <string>
#include <vector>

namespace vshock {

/// Convex flux f with f(0) = f'(0) = 0 and f'' >= c_f > 0.
///
/// Burgers (f = u^2/2) and polynomial fluxes are evaluated inline by the
/// solver kernels; arbitrary callables go through std::function.
class FluxSpec {
 public:
  enum class Kind { burgers, custom_convex };
  using Fn = std::function<double(double)>;

  FluxSpec() = default;  // Burgers

  static FluxSpec burgers();
  /// f(u) = sum_k coeffs[k] * u^(k+2); the constant and linear terms are
  /// absent by construction.
  static FluxSpec polynomial(std::vector<double> coeffs, double convexity_floor,
                             std::string name = "polynomial");
  /// f(u) = u^2/2 + u^4/12, f'' = 1 + u^2 >= 1.
  static FluxSpec quartic();
  static FluxSpec custom(std::string name, Fn f, Fn df, double convexity_floor);
  /// Accepts "burgers", "quartic" or "polynomial:c2,c3,...".
  static FluxSpec from_name(const std::string& name);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double convexity_floor() const noexcept { return c_f_; }
  bool is_polynomial() const noexcept { return !poly_.empty(); }
  const std::vector<double>& polynomial_coefficients() const noexcept { return poly_; }

  double value(double u) const;
  double derivative(double u) const;

  /// Checks f(0) = f'(0) = 0 to 1e-12 and the sampled second difference
  /// against c_f on [lo, hi]. Throws DomainError on violation.
  void validate(double lo, double hi, int samples = 401) const;

  /// The state u* with f'(u*) = slope. f' is strictly increasing so the
  /// root is unique.
  double sonic_point(double slope) const;

 private:
  Kind kind_ = Kind::burgers;
  std::string name_ = "burgers";
  std::vector<double> poly_;
  Fn f_;
  Fn df_;
  double c_f_ = 1.0;
};

}  // namespace vshock
