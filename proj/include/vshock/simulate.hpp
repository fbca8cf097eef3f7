#pragma once

#include <functional>

#include "vshock/metrics.hpp"
#include "vshock/pde_solver.hpp"
#include "vshock/shock_profile.hpp"

namespace vshock {

/// What to record at every output time.
struct MetricsSchedule {
  /// Dissipation constant; 0 selects default_c0(p).
  double c0 = 0.0;
  /// Measure against U(. - y - gamma t) with the zero-mass shift y instead of
  /// integrating the shift ODE.
  bool zero_mass_shift = false;
  /// Record ||Phi||_2 of the antiderivative of v - U.
  bool antiderivative = false;
  /// Stop once two consecutive outputs differ by at most this much in max
  /// norm (0 disables). Used by steady companion runs.
  double stationary_tol = 0.0;
  std::function<void(const GridState&, const Record&)> on_output;
};

/// Drives the stepper from t = 0 to t_end, landing exactly on multiples of
/// output_dt, and records one TimeSeries entry per output time (including
/// t = 0). Deterministic for fixed inputs.
///
/// Shift coupling by frame:
///   co-moving-shift: the drift is X'(t_n) from the aligned grid and the grid
///     origin advances with X, so X equals the frame offset;
///   fixed / co-moving-gamma: the drift is 0 / gamma and X follows a Heun
///     update from shift_rhs before and after each step.
TimeSeries simulate(const Profile& profile, const InitialData& init, const ShockParams& params,
                    const SolverConfig& config, const MetricsSchedule& schedule = {});

}  // namespace vshock
