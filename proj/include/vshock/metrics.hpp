#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vshock/pde_solver.hpp"
#include "vshock/shock_profile.hpp"

namespace vshock {

/// One output time. The first eight fields form the TimeSeries CSV; the rest
/// go to the diagnostics CSV.
struct Record {
  double t = 0.0;
  double X = 0.0;
  double Xdot = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double dissipation = 0.0;
  double mass_residual = 0.0;

  double gradient_term = 0.0;  // ||v_x - U'||_{p+1}^{p+1}
  double shift_gap = 0.0;      // |X' - gamma|
  double shift_bound = 0.0;    // (u- - u+)^(1/p - 1/2) ||v - U||_2
  double l1_lab = 0.0;         // ||u(t) - U(. - gamma t)||_1
  double u_max = 0.0;
  double u_min = 0.0;
  double phi_l2 = std::numeric_limits<double>::quiet_NaN();
  double phi_boundary = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t steps = 0;
};

struct TimeSeries {
  std::vector<Record> records;
  std::vector<std::string> warnings;

  std::vector<double> column(std::string_view name) const;
  std::vector<double> times() const { return column("t"); }

  /// `t,X,Xdot,l1,l2,linf,dissipation,mass_residual`
  void write_csv(std::ostream& out) const;
  void write_diagnostics_csv(std::ostream& out) const;
};

/// min(1/5, 2^(1-p)/5).
double default_c0(double p);

/// Profile samples aligned with a grid: U and U' at the nodes and U' at the
/// face midpoints, all at profile coordinate x_i + frame_offset - X.
struct AlignedProfile {
  std::vector<double> U;
  std::vector<double> Uprime;
  std::vector<double> Uprime_face;
};
AlignedProfile align_profile(const GridState& state, const Profile& profile, double X);

/// (int |u(. + X) - U|^q)^(1/q) by the trapezoidal rule; max over nodes for
/// q = inf. Throws DomainError for q < 1.
double perturbation_norm(const GridState& state, const Profile& profile, double X, double q);

struct NormTriple {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};
NormTriple perturbation_norms(const GridState& state, const AlignedProfile& aligned);

struct DissipationParts {
  double gradient = 0.0;  // int |v_x - U'|^(p+1) dx
  double weighted = 0.0;  // int |U'|^(p-1) (v_x - U')^2 dx
  double mean = 0.0;      // int w dy
  double square = 0.0;    // int w^2 dy
  double total = 0.0;
};
DissipationParts dissipation_parts(const GridState& state, const AlignedProfile& aligned,
                                   double Xdot, const ShockParams& params, double c0);

/// D(t) = 5/3 int (c0 |v_x - U'|^(p+1) + |U'|^(p-1) (v_x - U')^2) dx
///        + 2 (X' - gamma) int w dy - int w^2 dy,
/// with w(U(x)) = v(x) - U(x) and the y-integrals taken as int g(U) |U'| dx.
double dissipation(const GridState& state, const Profile& profile, double X, double Xdot,
                   const ShockParams& params, double c0);

struct PoincareResult {
  double lhs = 0.0;            // int (w - mean)^2 dy
  double rhs = 0.0;            // 5/6 int (u- - y)(y - u+) w_y^2 dy
  double rhs_classical = 0.0;  // same weight with the sharp constant 1/2
  bool pass = false;           // lhs <= rhs (1 + 1e-6)
};
/// Both sides by adaptive quadrature on (u_plus, u_minus). When dw is empty
/// the derivative is taken by a fourth-order central difference.
PoincareResult weighted_poincare_check(const std::function<double(double)>& w, double u_plus,
                                       double u_minus,
                                       const std::function<double(double)>& dw = {});

/// sum_k a_k cos(k pi s) + b_k sin(k pi s), s = (y - u+) / (u- - u+), with
/// coefficients uniform in [-1, 1] from a seeded generator.
class TrigPolynomial {
 public:
  TrigPolynomial(std::uint64_t seed, double u_plus, double u_minus, int degree = 6);
  double operator()(double y) const;
  double derivative(double y) const;

 private:
  double lo_;
  double len_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

struct IdentityGap {
  double lhs = 0.0;  // int (u- - y)(y - u+) w_y^2 dy, computed in y
  double rhs = 0.0;  // 2 int |U'|^(p-1) (v_x - U')^2 dx, computed in x
  double relative_gap = 0.0;
};
/// Evaluates both sides of the change of variables y = U(x) independently.
/// The y-side inverts the profile and interpolates the grid at m nodes.
IdentityGap change_of_variables_identity(const GridState& state, const Profile& profile, double X,
                                         const ShockParams& params, std::size_t m = 4000);

struct AntiderivativeNorm {
  double value = 0.0;     // ||Phi||_r
  double boundary = 0.0;  // Phi at the right end of the grid
};
/// Phi(x) = int_{x_min}^{x} (u(. + X) - U) by cumulative trapezoid. Throws
/// DomainError for r < 2.
AntiderivativeNorm antiderivative_norm(const GridState& state, const Profile& profile, double X,
                                       double r);

struct RateOptions {
  double t_a = -1.0;  // window start; negative: t_end / 10
  double t_b = -1.0;  // window end; negative: last sample
  /// Companion run norms at the same times. Samples beyond the floor series
  /// reuse its last value.
  std::vector<double> floor;
  double floor_rel = 0.0;
  double floor_abs = 0.0;
  double tolerance_factor = 1.1;
  std::size_t min_samples = 20;
};

struct RateFit {
  std::string norm;
  double t_a = 0.0;
  double t_b = 0.0;
  double C = 0.0;
  double slope = 0.0;
  std::string slope_basis;  // "window", "pre-floor" or "none"
  double theoretical_r = 0.0;
  double sup_ratio_median = 0.0;
  double sup_ratio_last_decade = 0.0;
  double raw_sup_ratio_median = 0.0;
  double raw_sup_ratio_last_decade = 0.0;
  double floor_last = 0.0;
  std::size_t samples = 0;
  bool floor_corrected = false;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Bound-type decay check of norm(t) <= C (1+t)^(-r) on a window.
///
/// The ratio norm (1+t)^r must be finite with its maximum over the last tenth
/// of the window at most tolerance_factor times its window median. With a
/// floor series the excess max(norm - floor (1 + floor_rel) - floor_abs, 0)
/// replaces the norm. The slope is the least-squares fit of log(value)
/// against log(1+t) over positive values. Throws DomainError for fewer than
/// min_samples window points or a non-positive raw norm.
RateFit fit_decay_rate(std::span<const double> t, std::span<const double> norm, double r,
                       const RateOptions& options = {}, std::string name = "norm");

}  // namespace vshock
