#include <doctest.h>

#include <cmath>

#include "vshock/errors.hpp"
#include "vshock/metrics.hpp"
#include "vshock/shift_tracker.hpp"
#include "vshock/simulate.hpp"

using namespace vshock;

namespace {

GridState sampled(const Profile& prof, double lo, double hi, double dx, auto&& fn) {
  GridState s;
  s.x0 = lo;
  s.dx = dx;
  auto n = static_cast<std::size_t>(std::llround((hi - lo) / dx));
  s.values.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) s.values[i] = fn(s.x(i));
  s.u_left = prof.params().u_minus;
  s.u_right = prof.params().u_plus;
  return s;
}

}  // namespace

TEST_SUITE("shift_tracker") {
  TEST_CASE("exact profile gives X' = gamma") {
    for (auto [um, up] : {std::pair{1.0, -1.0}, std::pair{3.0, 1.0}}) {
      auto params = ShockParams::make(um, up, 1.5);
      auto prof = build_profile(params, -20, 20, 4001);
      auto s = sampled(prof, -10, 10, 0.01, [&](double x) { return prof.value(x); });
      CHECK(shift_rhs(s, prof, 0.0, params) == doctest::Approx(params.gamma).epsilon(1e-14));
    }
  }

  TEST_CASE("constant offset on the support gives X' = gamma + c/2") {
    auto params = ShockParams::make(1, -1, 2.0);
    auto prof = build_profile(params, -10, 10, 20001);
    for (double c : {0.01, -0.03}) {
      auto s = sampled(prof, -8, 8, 0.001, [&](double x) {
        return prof.value(x) + ((x > prof.x_L() && x < prof.x_R()) ? c : 0.0);
      });
      CHECK(std::abs(shift_rhs(s, prof, 0.0, params) - (params.gamma + c / 2)) < 1e-5 * std::abs(c) + 1e-9);
    }
  }

  TEST_CASE("aligned and interpolating forms agree") {
    auto params = ShockParams::make(1, -1, 1.0);
    auto prof = build_profile(params, -40, 40, 16001);
    InitialData init;
    init.x_min = -30;
    init.x_max = 30;
    init.dx = 0.05;
    init.kind = PerturbationKind::smooth_random;
    auto s = initial_state(prof, init);
    auto al = align_profile(s, prof, 0.0);
    double a = shift_rhs_aligned(s.values, al.U, al.Uprime, s.dx, params);
    double b = shift_rhs(s, prof, 0.0, params);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }

  TEST_CASE("shift bound holds for random perturbations") {
    for (double p : {1.0, 1.5, 2.0}) {
      auto params = ShockParams::make(1, -1, p);
      auto prof = build_profile(params, -40, 40, 16001);
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CAPTURE(p);
        CAPTURE(seed);
        InitialData init;
        init.kind = PerturbationKind::smooth_random;
        init.seed = seed;
        init.width = 0.5 + 0.25 * static_cast<double>(seed % 7);
        init.offset = -1.0 + 0.1 * static_cast<double>(seed);
        init.amplitude = 0.8;
        init.x_min = -30;
        init.x_max = 30;
        init.dx = 0.01;
        auto s = initial_state(prof, init);
        double gap = std::abs(shift_rhs(s, prof, 0.0, params) - params.gamma);
        double l2 = perturbation_norm(s, prof, 0.0, 2.0);
        CHECK(gap <= std::pow(params.jump(), 1 / p - 0.5) * l2 * (1 + 1e-6));
      }
    }
  }

  TEST_CASE("support leaving the domain is an error") {
    auto params = ShockParams::make(1, -1, 2.0);
    auto prof = build_profile(params, -10, 10, 2001);
    auto s = sampled(prof, -3, 3, 0.01, [&](double x) { return prof.value(x); });
    CHECK_NOTHROW(shift_rhs(s, prof, 0.0, params));
    CHECK_THROWS_AS(shift_rhs(s, prof, 1.5, params), DomainError);
  }

  TEST_CASE("advance_shift with a constant rhs") {
    ShiftState s{0.25, 0.0, 1.0};
    auto n = advance_shift(s, 0.7, 0.7, 0.125);
    CHECK(n.X == 0.25 + 0.7 * 0.125);
    CHECK(n.Xdot == 0.7);
    CHECK(n.t == 1.125);
  }

  TEST_CASE("Heun shift integration is second order") {
    // u(t, x) = U(x - a sin t) prescribed on a fixed grid; X' = shift_rhs(u(t), X).
    auto params = ShockParams::make(1, -1, 1.5);
    auto prof = build_profile(params, -20, 20, 8001);
    const double a = 0.3, T = 2.0;
    auto state_at = [&](double t) {
      auto s = sampled(prof, -8, 8, 0.01, [&](double x) { return prof.value(x - a * std::sin(t)); });
      s.t = t;
      return s;
    };
    auto integrate = [&](double dt) {
      ShiftState sh;
      double r0 = shift_rhs(state_at(0), prof, 0.0, params);
      int n = static_cast<int>(std::lround(T / dt));
      for (int k = 0; k < n; ++k) {
        auto next = state_at((k + 1) * dt);
        double r1 = shift_rhs(next, prof, sh.X + dt * r0, params);
        sh = advance_shift(sh, r0, r1, dt);
        r0 = shift_rhs(next, prof, sh.X, params);
      }
      return sh.X;
    };
    double ref = integrate(0.1 / 8);
    double e1 = std::abs(integrate(0.1) - ref), e2 = std::abs(integrate(0.05) - ref);
    CAPTURE(e1);
    CAPTURE(e2);
    CHECK(std::log2(e1 / e2) >= 1.8);
  }

  TEST_CASE("steady symmetric shock keeps X = 0") {
    auto params = ShockParams::make(1, -1, 1.0);
    auto prof = build_profile(params, -40, 40, 8001);
    InitialData init;
    init.kind = PerturbationKind::none;
    init.x_min = -20;
    init.x_max = 20;
    init.dx = 0.05;
    SolverConfig cfg;
    cfg.frame = Frame::co_moving_gamma;
    cfg.t_end = 10;
    cfg.output_dt = 1;
    auto ts = simulate(prof, init, params, cfg);
    for (const auto& r : ts.records) CHECK(std::abs(r.X - params.gamma * r.t) < 1e-12);
  }

  TEST_CASE("mass_shift examples") {
    auto params = ShockParams::make(1, -1, 1.0);
    auto prof = build_profile(params, -60, 60, 24001);
    const double dx = 0.01;
    auto s0 = sampled(prof, -40, 40, dx, [&](double x) { return prof.value(x); });
    CHECK(std::abs(mass_shift(s0, prof, params).y) < 1e-12);

    // bump of mass 0.5: sqrt(pi) * A * w = 0.5
    double w = 1.0, A = 0.5 / std::sqrt(M_PI);
    auto s1 = sampled(prof, -40, 40, dx, [&](double x) { return prof.value(x) + A * std::exp(-x * x / (w * w)); });
    auto m1 = mass_shift(s1, prof, params);
    CHECK(m1.mass == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(m1.y == doctest::Approx(0.25).epsilon(1e-9));
    // after shifting, the excess mass is (almost) gone
    CHECK(std::abs(m1.residual) < 1e-8);

    for (double shift : {0.37, -1.2}) {
      auto s2 = sampled(prof, -40, 40, dx, [&](double x) { return prof.value(x - shift); });
      CHECK(std::abs(mass_shift(s2, prof, params).y - shift) <= 2 * dx);
    }
  }
}
