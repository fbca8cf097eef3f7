#pragma once

#include <span>

#include "vshock/pde_solver.hpp"
#include "vshock/shock_profile.hpp"

namespace vshock {

struct ShiftState {
  double X = 0.0;
  double Xdot = 0.0;
  double t = 0.0;
};

/// X' = gamma - 1/(2 (u- - u+)) int (u(t, x + X) - U(x)) U'(x) dx.
///
/// The integral runs over the profile support intersected with the grid;
/// u(x + X) is read at the grid nodes by evaluating U at the matching
/// shifted profile coordinate. Throws DomainError when [x_L, x_R] shifted by X
/// leaves the simulated domain.
double shift_rhs(const GridState& state, const Profile& profile, double X, const ShockParams& params);

/// Same integral when the grid is aligned with the profile (frame_offset == X):
/// U and U' are the profile sampled at the grid nodes.
double shift_rhs_aligned(std::span<const double> values, std::span<const double> U,
                         std::span<const double> Uprime, double dx, const ShockParams& params);

/// Heun update X += dt (rhs_now + rhs_next) / 2.
ShiftState advance_shift(const ShiftState& shift, double rhs_now, double rhs_next, double dt);

struct MassShift {
  double y = 0.0;
  double mass = 0.0;
  /// int (u0 - U(. - y)) dx recomputed after shifting.
  double residual = 0.0;
};

/// y = M / (u- - u+) with M = int (u0 - U) dx. The residual is recomputed by
/// quadrature against the shifted profile and returned for the caller to judge.
MassShift mass_shift(const GridState& u0, const Profile& profile, const ShockParams& params);

}  // namespace vshock
