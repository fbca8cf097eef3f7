#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "vshock/shock_profile.hpp"

namespace vshock {

enum class Scheme { engquist_osher, lax_friedrichs };
enum class Frame { fixed, co_moving_gamma, co_moving_shift };

std::string to_string(Scheme s);
std::string to_string(Frame f);
Scheme scheme_from_string(const std::string& s);
Frame frame_from_string(const std::string& s);

/// Node values u_0..u_N on x_i = x0 + i dx in frame coordinates. The lab
/// position of a node is x_i + frame_offset.
struct GridState {
  double x0 = 0.0;
  double dx = 0.0;
  std::vector<double> values;
  double t = 0.0;
  double u_left = 1.0;
  double u_right = -1.0;
  double frame_offset = 0.0;

  std::size_t size() const noexcept { return values.size(); }
  double x(std::size_t i) const noexcept { return x0 + dx * static_cast<double>(i); }
  double x_max() const noexcept { return x(values.size() - 1); }
};

struct SolverConfig {
  double cfl = 0.9;
  double epsilon = 0.0;
  Scheme scheme = Scheme::engquist_osher;
  Frame frame = Frame::co_moving_gamma;
  double t_end = 1.0;
  double output_dt = 1.0;

  /// Throws ConfigError on cfl outside (0, 0.9], negative epsilon, or
  /// non-positive t_end / output_dt.
  void validate() const;
};

enum class PerturbationKind { none, gaussian, square, smooth_random };
std::string to_string(PerturbationKind k);
PerturbationKind perturbation_from_string(const std::string& s);

/// Perturbed-shock initial data u0 = U(x - base_shift) + phi(x) on
/// [x_min, x_max] with spacing dx.
struct InitialData {
  PerturbationKind kind = PerturbationKind::gaussian;
  double amplitude = 0.3;
  /// Gaussian: e-folding scale; square: half-width; smooth_random: half-width
  /// of the support window.
  double width = 1.0;
  double offset = 0.0;
  std::uint64_t seed = 1;
  int modes = 6;
  /// Gaussian tails are cut at |x - offset| > cutoff * width.
  double cutoff = 8.0;
  double base_shift = 0.0;

  double x_min = -40.0;
  double x_max = 40.0;
  double dx = 0.02;
};

/// Compactly supported perturbation phi described by InitialData.
class Perturbation {
 public:
  explicit Perturbation(const InitialData& init);
  double operator()(double x) const;
  double support_min() const noexcept { return lo_; }
  double support_max() const noexcept { return hi_; }

 private:
  PerturbationKind kind_;
  double amplitude_;
  double width_;
  double offset_;
  double lo_;
  double hi_;
  std::vector<double> coeffs_;
};

/// Samples u0 on the grid and pins the end nodes to u_pm.
GridState initial_state(const Profile& profile, const InitialData& init);

/// (g^2 + eps)^((p-1)/2) g.
double viscous_face_flux(double gradient, double p, double epsilon);

/// cfl * min(dx / max|f'(u) - drift|, dx^2 / (2 maxdiff)) with
/// maxdiff = max_faces p (g^2 + eps)^((p-1)/2), floored at 1e-12.
double cfl_dt(const GridState& state, const ShockParams& params, const SolverConfig& config,
              double drift = 0.0);

/// Monotone two-point flux for h(u) = f(u) - drift u.
double numerical_flux(const ShockParams& params, Scheme scheme, double drift, double a, double b);

/// In-place explicit update reused across steps. Keeps the face buffer and
/// the running boundary flux so the discrete mass balance can be audited.
class Stepper {
 public:
  Stepper(ShockParams params, SolverConfig config);

  /// Advances by dt = min(cfl_dt, dt_max) and returns dt. Throws BlowUpError
  /// when a non-finite value appears.
  double advance(GridState& state, double drift,
                 double dt_max = std::numeric_limits<double>::infinity());

  /// Mass that entered through the two boundary faces since construction.
  double boundary_inflow() const noexcept { return inflow_; }
  std::size_t steps() const noexcept { return steps_; }
  const ShockParams& params() const noexcept { return params_; }
  const SolverConfig& config() const noexcept { return config_; }

 private:
  enum : int { kBurgers, kPolynomial, kGeneric };
  template <int Mode>
  double advance_impl(GridState& state, double drift, double dt_max);

  ShockParams params_;
  SolverConfig config_;
  std::vector<double> q_;
  double a_zero_ = 0.0;
  double inflow_ = 0.0;
  std::size_t steps_ = 0;
};

/// One step of the scheme with dt from cfl_dt; returns the new state.
GridState step(const GridState& state, const ShockParams& params, const SolverConfig& config,
               double drift);

/// Interior mass sum_{i=1}^{N-1} u_i dx.
double interior_mass(const GridState& state);

}  // namespace vshock
