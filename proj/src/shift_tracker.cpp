#include "vshock/shift_tracker.hpp"

#include <cmath>
#include <sstream>

#include "vshock/errors.hpp"

namespace vshock {
namespace {

void check_support(const GridState& state, const Profile& profile, double z_first, double z_last) {
  bool inside = true;
  if (profile.has_compact_support()) {
    inside = z_first <= profile.x_L() && z_last >= profile.x_R();
  } else {
    const auto& pr = profile.params();
    const double scale = std::pow(2.0, -3.0 / pr.p) * std::pow(pr.jump(), 2.0 / pr.p);
    inside = std::abs(profile.slope(z_first)) <= 1e-8 * scale &&
             std::abs(profile.slope(z_last)) <= 1e-8 * scale;
  }
  if (!inside) {
    std::ostringstream msg;
    msg << "shifted profile support leaves the simulated domain: grid covers [" << z_first << ", "
        << z_last << "] in profile coordinates at t = " << state.t;
    throw DomainError(msg.str());
  }
}

}  // namespace

double shift_rhs(const GridState& state, const Profile& profile, double X, const ShockParams& params) {
  const std::size_t n = state.size();
  const double shift = state.frame_offset - X;
  check_support(state, profile, state.x(0) + shift, state.x(n - 1) + shift);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = state.x(i) + shift;
    if (z <= profile.x_L() || z >= profile.x_R()) continue;
    const double Up = profile.slope(z);
    if (Up == 0.0) continue;
    const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
    acc += w * (state.values[i] - profile.value(z)) * Up;
  }
  return params.gamma - acc * state.dx / (2.0 * params.jump());
}

double shift_rhs_aligned(std::span<const double> values, std::span<const double> U,
                         std::span<const double> Uprime, double dx, const ShockParams& params) {
  const std::size_t n = values.size();
  double acc = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) acc += (values[i] - U[i]) * Uprime[i];
  acc += 0.5 * ((values[0] - U[0]) * Uprime[0] + (values[n - 1] - U[n - 1]) * Uprime[n - 1]);
  return params.gamma - acc * dx / (2.0 * params.jump());
}

ShiftState advance_shift(const ShiftState& shift, double rhs_now, double rhs_next, double dt) {
  return {shift.X + 0.5 * dt * (rhs_now + rhs_next), rhs_next, shift.t + dt};
}

MassShift mass_shift(const GridState& u0, const Profile& profile, const ShockParams& params) {
  if (params.u_minus == params.u_plus) throw DegenerateShockError("equal far-field states");
  auto excess = [&](double y) {
    double m = 0.0;
    const std::size_t n = u0.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
      m += w * (u0.values[i] - profile.value(u0.x(i) + u0.frame_offset - y));
    }
    return m * u0.dx;
  };
  MassShift out;
  out.mass = excess(0.0);
  out.y = out.mass / params.jump();
  out.residual = excess(out.y);
  return out;
}

}  // namespace vshock
