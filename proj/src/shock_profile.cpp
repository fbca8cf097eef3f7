#include "vshock/shock_profile.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vshock/errors.hpp"
#include "vshock/io.hpp"

namespace vshock {
namespace {

constexpr double kTailCutoff = 1e-12;

// A point on one half of the profile, carrying both distances to the far
// states so slopes near an endpoint are computed without cancellation.
struct BranchPoint {
  double U;
  double below;  // U - u_plus
  double above;  // u_minus - U
};

// One half of the profile parametrised by s >= 0 with s = 0 at the anchor
// xi = 0 and |xi| strictly increasing in s.
struct Branch {
  std::function<double(double)> speed;        // d|xi|/ds > 0
  std::function<BranchPoint(double)> state;   // U(s)
  double s_end;                               // far endpoint or tail cutoff
  bool finite_support;
  const char* endpoint;
  double layer = 0.0;  // width of a boundary layer at s = 0, if any
};

// Bisects until the 15-point Kronrod and 30-point Gauss values agree to
// abs_tol. Boost's own error estimate has a relative floor near 1e-9 on
// intervals much shorter than the boundary layer (p close to 1), so it cannot
// certify 1e-12 there. `budget` caps the number of leaves.
bool integrate_split(const std::function<double(double)>& f, double a, double b, double abs_tol,
                     int& budget, double& value) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G30 = boost::math::quadrature::gauss<double, 30>;
  if (--budget < 0) return false;
  const double k = GK::integrate(f, a, b, 0, 0.0);
  const double g = G30::integrate(f, a, b);
  if (!std::isfinite(k) || !std::isfinite(g)) return false;
  if (std::abs(k - g) <= abs_tol) {
    value = k;
    return true;
  }
  const double m = 0.5 * (a + b);
  if (!(m > a && m < b)) return false;
  double left = 0.0;
  double right = 0.0;
  if (!integrate_split(f, a, m, 0.5 * abs_tol, budget, left)) return false;
  if (!integrate_split(f, m, b, 0.5 * abs_tol, budget, right)) return false;
  value = left + right;
  return true;
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 const char* endpoint) {
  if (b <= a) return 0.0;
  if (b - a <= 1e-13 * std::max(1.0, std::abs(b))) return f(0.5 * (a + b)) * (b - a);
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double error = 0.0;
  double l1 = 0.0;
  double value = 0.0;
  // Boost's estimate first, then the two-rule bisection, then deeper Boost
  // recursion.
  value = GK::integrate(f, a, b, 0, tol, &error, &l1);
  if (std::isfinite(value) && error <= tol * std::max(l1, 1.0)) return value;
  int budget = 1 << 12;
  double split = 0.0;
  if (integrate_split(f, a, b, tol * std::max(std::abs(value), 1.0), budget, split)) return split;
  for (unsigned depth : {4u, 8u, 12u}) {
    value = GK::integrate(f, a, b, depth, tol, &error, &l1);
    if (std::isfinite(value) && error <= tol * std::max(l1, 1.0)) return value;
  }
  std::ostringstream msg;
  msg << "quadrature toward " << endpoint << " did not converge on [" << a << ", " << b
      << "]: error estimate " << error << " exceeds tolerance " << tol;
  throw ToleranceError(msg.str(), endpoint);
}

// Splits at geometric multiples of the layer width so no rule steps over it.
double branch_integral(const Branch& br, double a, double b, double tol) {
  if (!(br.layer > 0.0)) return integrate(br.speed, a, b, tol, br.endpoint);
  double total = 0.0;
  double lo = a;
  for (double cut = 0.25 * br.layer; lo < b; cut *= 2.0) {
    if (cut <= lo) continue;
    const double hi = std::min(cut, b);
    total += integrate(br.speed, lo, hi, tol, br.endpoint);
    lo = hi;
  }
  return total;
}

// Solves |xi|(s) = target for each (increasing) target on one branch.
// Targets beyond the branch end map to the far state.
std::vector<BranchPoint> invert_branch(const Branch& br, std::span<const double> targets,
                                       const BranchPoint& far, double tol, double& end_xi) {
  end_xi = branch_integral(br, 0.0, br.s_end, tol);
  std::vector<BranchPoint> out;
  out.reserve(targets.size());
  double s_ref = 0.0;
  double xi_ref = 0.0;
  for (double target : targets) {
    if (target <= 0.0) {
      out.push_back(br.state(0.0));
      continue;
    }
    if (target >= end_xi) {
      out.push_back(far);
      continue;
    }
    // Safeguarded Newton on F(s) = xi_ref + int_{s_ref}^{s} speed - target.
    double lo = s_ref;
    double hi = br.s_end;
    double s = std::min(hi, s_ref + (target - xi_ref) / br.speed(s_ref));
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    double xi_s = xi_ref;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      xi_s = xi_ref + branch_integral(br, s_ref, s, tol);
      const double f = xi_s - target;
      if (std::abs(f) <= 4e-16 * std::max(1.0, target)) {
        converged = true;
        break;
      }
      if (f < 0.0) lo = s;
      else hi = s;
      double next = s - f / br.speed(s);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - s) <= 1e-16 * std::max(1.0, std::abs(s))) {
        converged = true;
        break;
      }
      s = next;
    }
    if (!converged) {
      std::ostringstream msg;
      msg << "profile inversion toward " << br.endpoint << " stalled at xi = " << target;
      throw ToleranceError(msg.str(), br.endpoint);
    }
    out.push_back(br.state(s));
    s_ref = s;
    xi_ref = xi_s;
  }
  return out;
}

void check_grid(double xi_min, double xi_max, std::size_t n, double tol) {
  if (n < 16) throw DomainError("profile grid needs at least 16 points");
  if (!(xi_max > xi_min)) throw DomainError("profile grid needs xi_max > xi_min");
  if (!(xi_min < 0.0 && xi_max > 0.0))
    throw DomainError("profile grid must contain the anchor xi = 0 in its interior");
  if (!(tol > 0.0)) throw DomainError("profile tolerance must be positive");
}

// Assembles the table from the two branches. `slope` maps a branch point to U'.
Profile assemble(const ShockParams& params, double xi_min, double xi_max, std::size_t n,
                 double tol, const Branch& left, const Branch& right,
                 const std::function<double(const BranchPoint&)>& slope) {
  const double h = (xi_max - xi_min) / static_cast<double>(n - 1);
  std::vector<double> xi(n);
  for (std::size_t j = 0; j < n; ++j) xi[j] = xi_min + h * static_cast<double>(j);

  std::vector<double> right_targets;
  std::vector<std::size_t> right_index;
  std::vector<double> left_targets;
  std::vector<std::size_t> left_index;
  for (std::size_t j = 0; j < n; ++j) {
    if (xi[j] >= 0.0) {
      right_targets.push_back(xi[j]);
      right_index.push_back(j);
    }
  }
  for (std::size_t j = n; j-- > 0;) {
    if (xi[j] < 0.0) {
      left_targets.push_back(-xi[j]);
      left_index.push_back(j);
    }
  }

  const BranchPoint far_right{params.u_plus, 0.0, params.jump()};
  const BranchPoint far_left{params.u_minus, params.jump(), 0.0};
  double right_end = 0.0;
  double left_end = 0.0;
  const auto rp = invert_branch(right, right_targets, far_right, tol, right_end);
  const auto lp = invert_branch(left, left_targets, far_left, tol, left_end);

  std::vector<double> U(n);
  std::vector<double> Up(n);
  for (std::size_t k = 0; k < rp.size(); ++k) {
    U[right_index[k]] = rp[k].U;
    Up[right_index[k]] = slope(rp[k]);
  }
  for (std::size_t k = 0; k < lp.size(); ++k) {
    U[left_index[k]] = lp[k].U;
    Up[left_index[k]] = slope(lp[k]);
  }
  const double inf = std::numeric_limits<double>::infinity();
  const double x_L = left.finite_support ? -left_end : -inf;
  const double x_R = right.finite_support ? right_end : inf;
  return Profile(params, xi_min, h, std::move(U), std::move(Up), x_L, x_R);
}

}  // namespace

ShockParams ShockParams::make(double u_minus, double u_plus, double p, FluxSpec flux) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("viscosity exponent p must be >= 1");
  ShockParams s;
  s.u_minus = u_minus;
  s.u_plus = u_plus;
  s.p = p;
  s.gamma = rankine_hugoniot_speed(flux, u_minus, u_plus);
  if (!(u_minus > u_plus))
    throw DomainError("a viscous shock needs u_minus > u_plus (compressive jump)");
  s.flux = std::move(flux);
  return s;
}

double rankine_hugoniot_speed(const FluxSpec& flux, double u_minus, double u_plus) {
  if (u_minus == u_plus) throw DegenerateShockError("equal far-field states: no shock");
  if (flux.kind() == FluxSpec::Kind::burgers) return 0.5 * (u_minus + u_plus);
  return (flux.value(u_minus) - flux.value(u_plus)) / (u_minus - u_plus);
}

double profile_slope(double U, const ShockParams& params) {
  if (U > params.u_minus || U < params.u_plus) {
    std::ostringstream msg;
    msg << "profile value " << U << " outside [" << params.u_plus << ", " << params.u_minus << "]";
    throw DomainError(msg.str());
  }
  const double s = 0.5 * (params.u_minus - U) * (U - params.u_plus);
  if (s <= 0.0) return 0.0;
  return params.p == 1.0 ? -s : -std::pow(s, 1.0 / params.p);
}

double general_flux_slope(double U, const ShockParams& params) {
  const double r = params.flux.value(U) - params.flux.value(params.u_minus) -
                   params.gamma * (U - params.u_minus);
  return std::min(r, 0.0);
}

Profile::Profile(ShockParams params, double xi_min, double spacing, std::vector<double> U,
                 std::vector<double> Uprime, double x_L, double x_R)
    : params_(std::move(params)),
      xi_min_(xi_min),
      spacing_(spacing),
      U_(std::move(U)),
      Uprime_(std::move(Uprime)),
      x_L_(x_L),
      x_R_(x_R),
      interp_(xi_min, spacing, U_, Uprime_) {}

double Profile::value(double xi) const {
  if (xi <= xi_min_) return xi < xi_min_ ? params_.u_minus : U_.front();
  if (xi >= xi_max()) return xi > xi_max() ? params_.u_plus : U_.back();
  if (xi <= x_L_) return params_.u_minus;
  if (xi >= x_R_) return params_.u_plus;
  return std::clamp(interp_(xi), params_.u_plus, params_.u_minus);
}

double Profile::slope_of_value(double U) const {
  U = std::clamp(U, params_.u_plus, params_.u_minus);
  return params_.is_burgers() ? profile_slope(U, params_) : general_flux_slope(U, params_);
}

double Profile::slope(double xi) const { return slope_of_value(value(xi)); }

Profile build_profile(const ShockParams& params, double xi_min, double xi_max, std::size_t n,
                      double tol) {
  if (!params.is_burgers()) throw DomainError("build_profile handles the Burgers flux only");
  check_grid(xi_min, xi_max, n, tol);
  const double du = params.jump();
  const double half = 0.5 * du;
  const double p = params.p;
  // xi = -K G(s) with w = U0 + (du/2) s and G(s) = int_0^s (1 - r^2)^(-1/p) dr.
  const double K = half * std::pow(8.0 / (du * du), 1.0 / p);
  const double u_plus = params.u_plus;
  const double u_minus = params.u_minus;

  auto slope = [p](const BranchPoint& bp) {
    const double s = 0.5 * bp.above * bp.below;
    if (s <= 0.0) return 0.0;
    return p == 1.0 ? -s : -std::pow(s, 1.0 / p);
  };

  if (p == 1.0) {
    // r = 1 - e^{-t}: the integrand becomes 1 / (2 - e^{-t}), smooth on [0, inf).
    const double t_end = std::log(half / kTailCutoff);
    auto speed = [K](double t) { return K / (2.0 - std::exp(-t)); };
    Branch right{speed,
                 [=](double t) {
                   const double b = half * std::exp(-t);
                   return BranchPoint{u_plus + b, b, du - b};
                 },
                 t_end, false, "x_R"};
    Branch left{speed,
                [=](double t) {
                  const double a = half * std::exp(-t);
                  return BranchPoint{u_minus - a, du - a, a};
                },
                t_end, false, "x_L"};
    return assemble(params, xi_min, xi_max, n, tol, left, right, slope);
  }

  // r = 1 - tau^q, q = p/(p-1): the integrand becomes q (2 - tau^q)^(-1/p),
  // smooth on [0, 1] but with a layer of width ~1/q at s = 0. The branch
  // parameter is s = 1 - tau.
  const double q = p / (p - 1.0);
  auto speed = [K, q, p](double s) {
    const double tau = 1.0 - s;
    return K * q * std::pow(2.0 - std::pow(tau, q), -1.0 / p);
  };
  Branch right{speed,
               [=](double s) {
                 const double b = half * std::pow(1.0 - s, q);
                 return BranchPoint{u_plus + b, b, du - b};
               },
               1.0, true, "x_R", 1.0 / q};
  Branch left{speed,
              [=](double s) {
                const double a = half * std::pow(1.0 - s, q);
                return BranchPoint{u_minus - a, du - a, a};
              },
              1.0, true, "x_L", 1.0 / q};
  return assemble(params, xi_min, xi_max, n, tol, left, right, slope);
}

Profile general_flux_profile(const ShockParams& params, double xi_min, double xi_max,
                             std::size_t n, double tol) {
  if (params.p != 1.0) throw DomainError("general-flux profiles are defined for p = 1 only");
  check_grid(xi_min, xi_max, n, tol);
  params.flux.validate(params.u_plus, params.u_minus);
  const double u_plus = params.u_plus;
  const double u_minus = params.u_minus;
  const double U0 = params.anchor();
  const FluxSpec& f = params.flux;
  const double gamma = params.gamma;
  // Secant slope (f(base + h) - f(base)) / h - gamma. Small |h| goes through
  // the mean of f' on the interval so tails near u_pm do not cancel.
  auto secant = [&f, gamma, du = u_minus - u_plus](double base, double h) {
    if (std::abs(h) > 1e-2 * du) return (f.value(base + h) - f.value(base)) / h - gamma;
    static constexpr double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831,
                                    -0.9061798459386640, 0.9061798459386640};
    static constexpr double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                    0.2369268850561891, 0.2369268850561891};
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) acc += w[i] * f.derivative(base + 0.5 * h * (1.0 + x[i]));
    return 0.5 * acc - gamma;
  };
  // R(w) = f(w) - f(u_pm) - gamma (w - u_pm), written relative to the nearer
  // far state; both forms agree by the Rankine-Hugoniot condition.
  auto rate_right = [secant, u_plus](double w) { return (w - u_plus) * secant(u_plus, w - u_plus); };
  auto rate_left = [secant, u_minus](double w) {
    return (w - u_minus) * secant(u_minus, w - u_minus);
  };
  const double b0 = U0 - u_plus;
  const double a0 = u_minus - U0;
  // w = u+ + b0 e^{-t}: dxi/dt = -(w - u+) / R(w) -> 1 / |f'(u+) - gamma| as t -> inf.
  Branch right{[=](double t) {
                 return -1.0 / secant(u_plus, b0 * std::exp(-t));
               },
               [=](double t) {
                 const double b = b0 * std::exp(-t);
                 return BranchPoint{u_plus + b, b, (u_minus - u_plus) - b};
               },
               std::log(b0 / kTailCutoff), false, "x_R"};
  Branch left{[=](double t) {
                return 1.0 / secant(u_minus, -a0 * std::exp(-t));
              },
              [=](double t) {
                const double a = a0 * std::exp(-t);
                return BranchPoint{u_minus - a, (u_minus - u_plus) - a, a};
              },
              std::log(a0 / kTailCutoff), false, "x_L"};
  auto slope = [&](const BranchPoint& bp) {
    if (bp.below <= 0.0 || bp.above <= 0.0) return 0.0;
    return std::min(bp.below < bp.above ? rate_right(bp.U) : rate_left(bp.U), 0.0);
  };
  return assemble(params, xi_min, xi_max, n, tol, left, right, slope);
}

Profile make_profile(const ShockParams& params, double xi_min, double xi_max, std::size_t n,
                     double tol) {
  return params.is_burgers() ? build_profile(params, xi_min, xi_max, n, tol)
                             : general_flux_profile(params, xi_min, xi_max, n, tol);
}

ViscosityScaling rescale_viscosity(double mu, double p) {
  if (!(mu > 0.0)) throw DomainError("viscosity coefficient mu must be positive");
  if (!(p >= 1.0)) throw DomainError("viscosity exponent p must be >= 1");
  return {mu, std::pow(mu, 2.0 / (p + 1.0))};
}

void write_profile_csv(const Profile& profile, std::ostream& out) {
  out << "xi,U,Uprime\n";
  const auto U = profile.U();
  const auto Up = profile.Uprime();
  for (std::size_t j = 0; j < profile.size(); ++j)
    out << format_double(profile.xi(j)) << ',' << format_double(U[j]) << ','
        << format_double(Up[j]) << '\n';
}

}  // namespace vshock
