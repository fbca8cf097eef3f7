#include "vshock/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vshock/errors.hpp"
#include "vshock/shift_tracker.hpp"

namespace vshock {
namespace {

// Node range [lo, hi) outside of which U' vanishes, widened by one node so
// the trapezoidal end weights fall on zero terms.
std::pair<std::size_t, std::size_t> slope_range(const std::vector<double>& Uprime) {
  const std::size_t n = Uprime.size();
  std::size_t lo = 0;
  while (lo < n && Uprime[lo] == 0.0) ++lo;
  if (lo == n) return {0, 0};
  std::size_t hi = n;
  while (hi > lo && Uprime[hi - 1] == 0.0) --hi;
  return {lo > 0 ? lo - 1 : 0, std::min(n, hi + 1)};
}

}  // namespace

TimeSeries simulate(const Profile& profile, const InitialData& init, const ShockParams& params,
                    const SolverConfig& config, const MetricsSchedule& schedule) {
  config.validate();
  if (schedule.zero_mass_shift && config.frame == Frame::co_moving_shift)
    throw ConfigError("the zero-mass shift replaces shift tracking; use a fixed or co-moving-gamma frame");
  const double steps_f = config.t_end / config.output_dt;
  const auto n_out = static_cast<std::size_t>(std::llround(steps_f));
  if (n_out < 1 || std::abs(steps_f - static_cast<double>(n_out)) > 1e-9 * steps_f)
    throw ConfigError("t_end must be a positive multiple of output_dt");

  TimeSeries ts;
  GridState state = initial_state(profile, init);
  const Perturbation phi(init);
  if (init.kind != PerturbationKind::none &&
      (phi.support_min() < init.x_min + 5.0 * init.dx || phi.support_max() > init.x_max - 5.0 * init.dx))
    ts.warnings.push_back(
        "domain too small: perturbation support reaches within 5 cells of the boundary");
  if (params.p > 2.0)
    ts.warnings.push_back("theory out of range: shift estimates are only claimed for 1 <= p <= p0 < 2");

  const double c0 = schedule.c0 > 0.0 ? schedule.c0 : default_c0(params.p);
  const double gamma = params.gamma;
  const double bound_factor = std::pow(params.jump(), 1.0 / params.p - 0.5);
  Stepper stepper(params, config);
  const double mass0 = interior_mass(state);

  double y = 0.0;
  if (schedule.zero_mass_shift) {
    const MassShift ms = mass_shift(state, profile, params);
    y = ms.y;
    if (std::abs(ms.residual) > 1e-8 * std::max(1.0, std::abs(ms.mass))) {
      std::ostringstream msg;
      msg << "zero-mass shift residual " << ms.residual << " exceeds 1e-8";
      ts.warnings.push_back(msg.str());
    }
  }

  // In the co-moving-shift frame the grid stays aligned with the profile.
  AlignedProfile aligned;
  std::size_t act_lo = 0, act_hi = 0;
  const bool aligned_frame = config.frame == Frame::co_moving_shift;
  if (aligned_frame) {
    aligned = align_profile(state, profile, 0.0);
    std::tie(act_lo, act_hi) = slope_range(aligned.Uprime);
  }
  auto aligned_rhs = [&]() {
    if (act_hi <= act_lo) return gamma;
    const std::size_t len = act_hi - act_lo;
    return shift_rhs_aligned(std::span<const double>(state.values).subspan(act_lo, len),
                             std::span<const double>(aligned.U).subspan(act_lo, len),
                             std::span<const double>(aligned.Uprime).subspan(act_lo, len), state.dx,
                             params);
  };

  ShiftState shift{y, gamma, 0.0};
  if (aligned_frame) shift.Xdot = aligned_rhs();
  else if (!schedule.zero_mass_shift) shift.Xdot = shift_rhs(state, profile, shift.X, params);

  auto record = [&]() {
    Record r;
    r.t = state.t;
    r.X = shift.X;
    r.Xdot = shift.Xdot;
    const AlignedProfile local = aligned_frame ? AlignedProfile{} : align_profile(state, profile, shift.X);
    const AlignedProfile& a = aligned_frame ? aligned : local;
    const NormTriple nt = perturbation_norms(state, a);
    r.l1 = nt.l1;
    r.l2 = nt.l2;
    r.linf = nt.linf;
    const DissipationParts d = dissipation_parts(state, a, shift.Xdot, params, c0);
    r.dissipation = d.total;
    r.gradient_term = d.gradient;
    r.mass_residual = interior_mass(state) - mass0 - stepper.boundary_inflow();
    r.shift_gap = std::abs(shift.Xdot - gamma);
    r.shift_bound = bound_factor * nt.l2;
    r.l1_lab = perturbation_norm(state, profile, gamma * state.t, 1.0);
    const auto [lo, hi] = std::minmax_element(state.values.begin(), state.values.end());
    r.u_min = *lo;
    r.u_max = *hi;
    if (schedule.antiderivative) {
      const AntiderivativeNorm an = antiderivative_norm(state, profile, shift.X, 2.0);
      r.phi_l2 = an.value;
      r.phi_boundary = an.boundary;
    }
    r.steps = stepper.steps();
    ts.records.push_back(r);
    if (schedule.on_output) schedule.on_output(state, r);
  };

  record();
  std::vector<double> previous;
  if (schedule.stationary_tol > 0.0) previous = state.values;

  for (std::size_t k = 1; k <= n_out; ++k) {
    const double t_target = static_cast<double>(k) * config.output_dt;
    while (t_target - state.t > 1e-12 * std::max(1.0, t_target)) {
      const double remaining = t_target - state.t;
      if (aligned_frame) {
        const double drift = aligned_rhs();
        const double dt = stepper.advance(state, drift, remaining);
        state.frame_offset += drift * dt;
        shift.X = state.frame_offset;
      } else if (schedule.zero_mass_shift) {
        const double drift = config.frame == Frame::fixed ? 0.0 : gamma;
        const double dt = stepper.advance(state, drift, remaining);
        state.frame_offset += drift * dt;
      } else {
        const double drift = config.frame == Frame::fixed ? 0.0 : gamma;
        const double rhs_now = shift.Xdot;
        const double dt = stepper.advance(state, drift, remaining);
        state.frame_offset += drift * dt;
        const double rhs_pred = shift_rhs(state, profile, shift.X + dt * rhs_now, params);
        shift = advance_shift(shift, rhs_now, rhs_pred, dt);
        shift.Xdot = shift_rhs(state, profile, shift.X, params);
      }
    }
    state.t = t_target;
    shift.t = t_target;
    if (aligned_frame) shift.Xdot = aligned_rhs();
    if (schedule.zero_mass_shift) shift.X = y + gamma * t_target;
    record();
    if (schedule.stationary_tol > 0.0) {
      double change = 0.0;
      for (std::size_t i = 0; i < previous.size(); ++i)
        change = std::max(change, std::abs(state.values[i] - previous[i]));
      if (change <= schedule.stationary_tol) break;
      previous = state.values;
    }
  }
  return ts;
}

}  // namespace vshock
