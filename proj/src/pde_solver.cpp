#include "vshock/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "vshock/errors.hpp"

namespace vshock {

std::string to_string(Scheme s) {
  return s == Scheme::engquist_osher ? "engquist-osher" : "lax-friedrichs";
}

std::string to_string(Frame f) {
  switch (f) {
    case Frame::fixed: return "fixed";
    case Frame::co_moving_gamma: return "co-moving-gamma";
    case Frame::co_moving_shift: return "co-moving-shift";
  }
  return "fixed";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "engquist-osher" || s == "eo") return Scheme::engquist_osher;
  if (s == "lax-friedrichs" || s == "lf") return Scheme::lax_friedrichs;
  throw ConfigError("unknown convection scheme '" + s + "'");
}

Frame frame_from_string(const std::string& s) {
  if (s == "fixed") return Frame::fixed;
  if (s == "co-moving-gamma") return Frame::co_moving_gamma;
  if (s == "co-moving-shift") return Frame::co_moving_shift;
  throw ConfigError("unknown frame '" + s + "'");
}

std::string to_string(PerturbationKind k) {
  switch (k) {
    case PerturbationKind::none: return "none";
    case PerturbationKind::gaussian: return "gaussian";
    case PerturbationKind::square: return "square";
    case PerturbationKind::smooth_random: return "smooth-random";
  }
  return "none";
}

PerturbationKind perturbation_from_string(const std::string& s) {
  if (s == "none") return PerturbationKind::none;
  if (s == "gaussian") return PerturbationKind::gaussian;
  if (s == "square") return PerturbationKind::square;
  if (s == "smooth-random") return PerturbationKind::smooth_random;
  throw ConfigError("unknown perturbation '" + s + "'");
}

void SolverConfig::validate() const {
  if (!(cfl > 0.0 && cfl <= 0.9)) throw ConfigError("cfl must lie in (0, 0.9]");
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(output_dt > 0.0)) throw ConfigError("output_dt must be positive");
}

Perturbation::Perturbation(const InitialData& init)
    : kind_(init.kind), amplitude_(init.amplitude), width_(init.width), offset_(init.offset) {
  if (kind_ != PerturbationKind::none && !(width_ > 0.0))
    throw ConfigError("perturbation width must be positive");
  switch (kind_) {
    case PerturbationKind::none:
      lo_ = hi_ = offset_;
      break;
    case PerturbationKind::gaussian:
      lo_ = offset_ - init.cutoff * width_;
      hi_ = offset_ + init.cutoff * width_;
      break;
    case PerturbationKind::square:
    case PerturbationKind::smooth_random:
      lo_ = offset_ - width_;
      hi_ = offset_ + width_;
      break;
  }
  if (kind_ == PerturbationKind::smooth_random) {
    if (init.modes < 1) throw ConfigError("smooth-random perturbation needs modes >= 1");
    // Raw 53-bit draws keep the coefficients identical across standard libraries.
    std::mt19937_64 rng(init.seed);
    double norm = 0.0;
    for (int k = 1; k <= init.modes; ++k) {
      const double u01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      coeffs_.push_back((2.0 * u01 - 1.0) / k);
      norm += std::abs(coeffs_.back());
    }
    if (norm > 0.0)
      for (double& c : coeffs_) c /= norm;
  }
}

double Perturbation::operator()(double x) const {
  if (kind_ == PerturbationKind::none || x < lo_ || x > hi_) return 0.0;
  const double s = (x - offset_) / width_;
  switch (kind_) {
    case PerturbationKind::gaussian: return amplitude_ * std::exp(-s * s);
    case PerturbationKind::square: return std::abs(s) < 1.0 ? amplitude_ : 0.0;
    case PerturbationKind::smooth_random: {
      const double window = (1.0 - s * s) * (1.0 - s * s);
      double acc = 0.0;
      for (std::size_t k = 0; k < coeffs_.size(); ++k)
        acc += coeffs_[k] * std::sin(static_cast<double>(k + 1) * M_PI * 0.5 * (s + 1.0));
      return amplitude_ * window * acc;
    }
    default: return 0.0;
  }
}

GridState initial_state(const Profile& profile, const InitialData& init) {
  if (!(init.dx > 0.0)) throw ConfigError("dx must be positive");
  if (!(init.x_max > init.x_min)) throw ConfigError("empty domain");
  const double cells = (init.x_max - init.x_min) / init.dx;
  const auto n = static_cast<std::size_t>(std::llround(cells));
  if (n < 2 || std::abs(cells - static_cast<double>(n)) > 1e-6 * cells)
    throw ConfigError("domain length must be a positive multiple of dx (at least 2 cells)");
  const Perturbation phi(init);
  GridState s;
  s.x0 = init.x_min;
  s.dx = init.dx;
  s.u_left = profile.params().u_minus;
  s.u_right = profile.params().u_plus;
  s.values.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = s.x(i);
    s.values[i] = profile.value(x - init.base_shift) + phi(x);
  }
  s.values.front() = s.u_left;
  s.values.back() = s.u_right;
  return s;
}

double viscous_face_flux(double gradient, double p, double epsilon) {
  if (p == 1.0) return gradient;
  if (gradient == 0.0) return 0.0;
  return std::pow(gradient * gradient + epsilon, 0.5 * (p - 1.0)) * gradient;
}

double cfl_dt(const GridState& state, const ShockParams& params, const SolverConfig& config,
              double drift) {
  if (!(state.dx > 0.0)) throw ConfigError("grid spacing must be positive");
  if (state.size() < 3) throw ConfigError("grid needs at least 3 nodes");
  const auto [lo, hi] = std::minmax_element(state.values.begin(), state.values.end());
  // f' is increasing, so the extreme transport speeds sit at the extreme states.
  const double speed = std::max(std::abs(params.flux.derivative(*lo) - drift),
                                std::abs(params.flux.derivative(*hi) - drift));
  double maxdiff = 0.0;
  for (std::size_t i = 0; i + 1 < state.size(); ++i) {
    const double g = (state.values[i + 1] - state.values[i]) / state.dx;
    const double a = params.p == 1.0 ? 1.0 : std::pow(g * g + config.epsilon, 0.5 * (params.p - 1.0));
    maxdiff = std::max(maxdiff, params.p * a);
  }
  maxdiff = std::max(maxdiff, 1e-12);
  double dt = state.dx * state.dx / (2.0 * maxdiff);
  if (speed > 0.0) dt = std::min(dt, state.dx / speed);
  return config.cfl * dt;
}

double numerical_flux(const ShockParams& params, Scheme scheme, double drift, double a, double b) {
  const FluxSpec& f = params.flux;
  auto h = [&](double u) { return f.value(u) - drift * u; };
  if (scheme == Scheme::engquist_osher) {
    const double us = f.sonic_point(drift);
    return h(std::max(a, us)) + h(std::min(b, us)) - h(us);
  }
  const double alpha = std::max(std::abs(f.derivative(a) - drift), std::abs(f.derivative(b) - drift));
  return 0.5 * (h(a) + h(b)) - 0.5 * alpha * (b - a);
}

Stepper::Stepper(ShockParams params, SolverConfig config)
    : params_(std::move(params)), config_(config) {
  config_.validate();
  if (params_.p != 1.0 && config_.epsilon > 0.0)
    a_zero_ = std::pow(config_.epsilon, 0.5 * (params_.p - 1.0));
  else if (params_.p == 1.0)
    a_zero_ = 1.0;
}

double Stepper::advance(GridState& state, double drift, double dt_max) {
  if (params_.is_burgers()) return advance_impl<kBurgers>(state, drift, dt_max);
  if (params_.flux.is_polynomial()) return advance_impl<kPolynomial>(state, drift, dt_max);
  return advance_impl<kGeneric>(state, drift, dt_max);
}

template <int Mode>
double Stepper::advance_impl(GridState& s, double drift, double dt_max) {
  const std::size_t n = s.values.size();
  if (n < 3) throw ConfigError("grid needs at least 3 nodes");
  if (!(s.dx > 0.0)) throw ConfigError("grid spacing must be positive");
  double* u = s.values.data();
  constexpr bool Burgers = Mode == kBurgers;
  const FluxSpec& f = params_.flux;
  const double* pc = f.polynomial_coefficients().data();
  const std::size_t pn = f.polynomial_coefficients().size();
  auto fv = [&](double v) {
    if constexpr (Mode == kBurgers) {
      return 0.5 * v * v;
    } else if constexpr (Mode == kPolynomial) {
      double acc = 0.0;
      for (std::size_t k = pn; k-- > 0;) acc = acc * v + pc[k];
      return acc * v * v;
    } else {
      return f.value(v);
    }
  };
  auto fd = [&f](double v) {
    if constexpr (Mode == kBurgers) return v;
    else return f.derivative(v);
  };
  auto h = [&](double v) { return fv(v) - drift * v; };
  const bool eo = config_.scheme == Scheme::engquist_osher;
  double us = 0.0;
  double hs = 0.0;
  if (eo) {
    if constexpr (Burgers) us = drift;
    else us = f.sonic_point(drift);
    hs = h(us);
  }

  // Runs of equal neighbours produce bitwise equal face fluxes, so nodes
  // inside them cannot change. Only faces [fa, fb] are evaluated; the result
  // is identical to a full sweep.
  std::size_t fl = 0;
  while (fl + 1 < n && u[fl] == u[fl + 1]) ++fl;
  std::size_t fh = n - 2;
  while (fh > fl && u[fh] == u[fh + 1]) --fh;
  const bool flat = fl + 1 >= n;
  const std::size_t fa = flat ? 0 : (fl > 0 ? fl - 1 : 0);
  const std::size_t fb = flat ? 0 : std::min(fh + 1, n - 2);
  const bool has_quiet = flat || fl > 0 || fh < n - 2;

  // Pass 1: total face flux F - Q, largest diffusivity, state range.
  q_.resize(n - 1);
  double* T = q_.data();
  const double p = params_.p;
  const double e = 0.5 * (p - 1.0);
  const double eps = config_.epsilon;
  const double inv_dx = 1.0 / s.dx;
  double amax = p == 1.0 ? 1.0 : (has_quiet ? a_zero_ : 0.0);
  double umin = std::min(u[0], u[n - 1]);
  double umax = std::max(u[0], u[n - 1]);
  for (std::size_t i = fa; i <= fb + 1; ++i) {
    umin = u[i] < umin ? u[i] : umin;
    umax = u[i] > umax ? u[i] : umax;
  }
  auto convective = [&](std::size_t lo, std::size_t hi) {
    if (Burgers && eo) {
      // With h = (u - d)^2 / 2 - d^2 / 2 the constant cancels in every flux
      // difference, including the boundary balance.
      for (std::size_t i = lo; i <= hi; ++i) {
        const double a = std::max(u[i] - drift, 0.0);
        const double b = std::min(u[i + 1] - drift, 0.0);
        T[i] = 0.5 * (a * a + b * b);
      }
    } else if (eo) {
      for (std::size_t i = lo; i <= hi; ++i)
        T[i] = h(std::max(u[i], us)) + h(std::min(u[i + 1], us)) - hs;
    } else {
      for (std::size_t i = lo; i <= hi; ++i) {
        const double a = u[i];
        const double b = u[i + 1];
        const double alpha = std::max(std::abs(fd(a) - drift), std::abs(fd(b) - drift));
        T[i] = 0.5 * (h(a) + h(b)) - 0.5 * alpha * (b - a);
      }
    }
  };
  convective(fa, fb);
  if (fa > 0) convective(0, 0);
  if (fb < n - 2) convective(n - 2, n - 2);
  if (!flat) {
    if (p == 1.0) {
      for (std::size_t i = fa; i <= fb; ++i) T[i] -= (u[i + 1] - u[i]) * inv_dx;
    } else {
      for (std::size_t i = fa; i <= fb; ++i) {
        const double g = (u[i + 1] - u[i]) * inv_dx;
        if (g == 0.0) {
          amax = std::max(amax, a_zero_);
          continue;
        }
        const double a = std::pow(g * g + eps, e);
        T[i] -= a * g;
        amax = std::max(amax, a);
      }
    }
  }
  const double speed = std::max(std::abs(fd(umin) - drift), std::abs(fd(umax) - drift));
  const double maxdiff = std::max(p * amax, 1e-12);
  double dt = s.dx * s.dx / (2.0 * maxdiff);
  if (speed > 0.0) dt = std::min(dt, s.dx / speed);
  dt = std::min(config_.cfl * dt, dt_max);
  if (!(dt > 0.0)) throw ConfigError("non-positive time step");

  // Pass 2: conservative update of the interior nodes next to active faces.
  const double lam = dt * inv_dx;
  int bad = 0;
  if (!flat) {
    const std::size_t lo = std::max<std::size_t>(fl, 1);
    const std::size_t hi = std::min(fh + 1, n - 2);
    for (std::size_t i = lo; i <= hi; ++i) {
      u[i] -= lam * (T[i] - T[i - 1]);
      bad |= !(std::abs(u[i]) <= 1e300);
    }
  }
  inflow_ += dt * (T[0] - T[n - 2]);
  u[0] = s.u_left;
  u[n - 1] = s.u_right;
  s.t += dt;
  ++steps_;
  if (bad) {
    std::ostringstream msg;
    msg << "non-finite solution value at t = " << s.t;
    throw BlowUpError(msg.str(), s.t);
  }
  return dt;
}

template double Stepper::advance_impl<Stepper::kBurgers>(GridState&, double, double);
template double Stepper::advance_impl<Stepper::kPolynomial>(GridState&, double, double);
template double Stepper::advance_impl<Stepper::kGeneric>(GridState&, double, double);

GridState step(const GridState& state, const ShockParams& params, const SolverConfig& config,
               double drift) {
  GridState next = state;
  Stepper stepper(params, config);
  stepper.advance(next, drift);
  return next;
}

double interior_mass(const GridState& state) {
  double m = 0.0;
  for (std::size_t i = 1; i + 1 < state.size(); ++i) m += state.values[i];
  return m * state.dx;
}

}  // namespace vshock
