#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "vshock/errors.hpp"
#include "vshock/metrics.hpp"
#include "vshock/pde_solver.hpp"
#include "vshock/simulate.hpp"

using namespace vshock;

namespace {

// Straightforward conservative update built only from the public two-point
// fluxes, cfl_dt and viscous_face_flux.
void reference_step(GridState& s, const ShockParams& params, const SolverConfig& cfg, double drift) {
  double dt = cfl_dt(s, params, cfg, drift);
  std::size_t n = s.size();
  std::vector<double> F(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double g = (s.values[i + 1] - s.values[i]) / s.dx;
    F[i] = numerical_flux(params, cfg.scheme, drift, s.values[i], s.values[i + 1]) -
           viscous_face_flux(g, params.p, cfg.epsilon);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) s.values[i] -= dt / s.dx * (F[i] - F[i - 1]);
  s.t += dt;
}

GridState grid(const Profile& prof, double lo, double hi, double dx, PerturbationKind k, double amp) {
  InitialData init;
  init.kind = k;
  init.amplitude = amp;
  init.width = 1.5;
  init.x_min = lo;
  init.x_max = hi;
  init.dx = dx;
  init.seed = 11;
  return initial_state(prof, init);
}

}  // namespace

TEST_SUITE("pde_solver") {
  TEST_CASE("viscous_face_flux examples") {
    CHECK(viscous_face_flux(0.0, 2.5, 0.3) == 0.0);
    CHECK(viscous_face_flux(-2.0, 1.0, 0.0) == -2.0);
    CHECK(viscous_face_flux(2.0, 3.0, 0.0) == doctest::Approx(8.0).epsilon(1e-15));
    CHECK(viscous_face_flux(-2.0, 3.0, 0.0) == doctest::Approx(-8.0).epsilon(1e-15));
  }

  TEST_CASE("cfl_dt examples") {
    auto params = ShockParams::make(1, -1, 1.0);
    SolverConfig cfg;
    cfg.cfl = 0.5;
    GridState s;
    s.dx = 0.1;
    s.values.assign(11, 0.0);
    CHECK(cfl_dt(s, params, cfg) == doctest::Approx(0.0025).epsilon(1e-14));

    auto p2 = ShockParams::make(1, -1, 2.0);
    // faces alternate between gradients +0.7 and -0.7
    for (std::size_t i = 0; i < s.size(); ++i) s.values[i] = (i % 2 == 0) ? -0.02 : 0.05;
    double mx = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) mx = std::max(mx, std::abs(s.values[i + 1] - s.values[i]) / s.dx);
    REQUIRE(mx == doctest::Approx(0.7));
    CHECK(cfl_dt(s, p2, cfg) == doctest::Approx(0.5 * 0.01 / (2 * 1.4)).epsilon(1e-12));
  }

  TEST_CASE("config validation") {
    SolverConfig cfg;
    cfg.cfl = 0.95;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.cfl = 0.5;
    cfg.epsilon = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(frame_from_string("lab"), ConfigError);
    CHECK(scheme_from_string("lf") == Scheme::lax_friedrichs);
    CHECK(to_string(frame_from_string("co-moving-shift")) == "co-moving-shift");
    CHECK(perturbation_from_string(to_string(PerturbationKind::smooth_random)) == PerturbationKind::smooth_random);
  }

  TEST_CASE("numerical fluxes are consistent and monotone") {
    auto params = ShockParams::make(1, -1, 1.0, FluxSpec::quartic());
    for (auto scheme : {Scheme::engquist_osher, Scheme::lax_friedrichs}) {
      for (double d : {0.0, 0.4}) {
        for (double a : {-1.0, -0.3, 0.2, 0.9}) {
          double h = params.flux.value(a) - d * a;
          CHECK(numerical_flux(params, scheme, d, a, a) == doctest::Approx(h).epsilon(1e-14));
          // nondecreasing in the left state, nonincreasing in the right
          CHECK(numerical_flux(params, scheme, d, a + 0.01, 0.1) >= numerical_flux(params, scheme, d, a, 0.1));
          CHECK(numerical_flux(params, scheme, d, 0.1, a + 0.01) <= numerical_flux(params, scheme, d, 0.1, a));
        }
      }
    }
  }

  TEST_CASE("fast kernel matches the reference scheme") {
    struct Case {
      FluxSpec flux;
      double p;
      Scheme scheme;
      double drift;
      double eps;
    };
    std::vector<Case> cases = {
        {FluxSpec::burgers(), 1.0, Scheme::engquist_osher, 0.0, 0.0},
        {FluxSpec::burgers(), 1.5, Scheme::engquist_osher, 0.13, 0.0},
        {FluxSpec::burgers(), 1.5, Scheme::lax_friedrichs, 0.0, 1e-4},
        {FluxSpec::quartic(), 1.0, Scheme::engquist_osher, 0.05, 0.0},
        {FluxSpec::custom("cubic-ish", [](double u) { return u * u / 2 + u * u * u * u / 12; },
                          [](double u) { return u + u * u * u / 3; }, 1.0),
         1.0, Scheme::lax_friedrichs, 0.0, 0.0},
    };
    for (const auto& c : cases) {
      CAPTURE(c.p);
      CAPTURE(c.drift);
      auto params = ShockParams::make(1, -1, c.p, c.flux);
      auto prof = make_profile(params, -20, 20, 4001);
      SolverConfig cfg;
      cfg.scheme = c.scheme;
      cfg.epsilon = c.eps;
      GridState a = grid(prof, -10, 10, 0.05, PerturbationKind::gaussian, 0.3);
      GridState b = a;
      Stepper st(params, cfg);
      for (int k = 0; k < 300; ++k) {
        double dt = st.advance(a, c.drift);
        double t0 = b.t;
        reference_step(b, params, cfg, c.drift);
        REQUIRE(b.t - t0 == doctest::Approx(dt).epsilon(1e-13));
      }
      double d = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
      CHECK(d < 1e-12);
    }
  }

  TEST_CASE("discrete mass balance") {
    auto params = ShockParams::make(1, -1, 1.5);
    auto prof = build_profile(params, -20, 20, 4001);
    GridState s = grid(prof, -10, 10, 0.05, PerturbationKind::smooth_random, 0.4);
    double m0 = interior_mass(s);
    SolverConfig cfg;
    Stepper st(params, cfg);
    for (int k = 0; k < 500; ++k) st.advance(s, 0.2);
    CHECK(std::abs(interior_mass(s) - m0 - st.boundary_inflow()) < 1e-12);
  }

  TEST_CASE("constant data is unchanged") {
    auto params = ShockParams::make(1, -1, 1.0);
    GridState s;
    s.dx = 0.1;
    s.values.assign(101, 0.0);
    s.u_left = s.u_right = 0.0;
    Stepper st(params, SolverConfig{});
    for (int k = 0; k < 50; ++k) st.advance(s, 0.0);
    for (double v : s.values) CHECK(v == 0.0);
  }

  TEST_CASE("exact profile is a discrete traveling wave") {
    for (double p : {1.0, 1.5}) {
      CAPTURE(p);
      auto params = ShockParams::make(2, 0, p);
      auto prof = build_profile(params, -30, 30, 6001);
      double dx = 0.05;
      GridState s = grid(prof, -15, 15, dx, PerturbationKind::none, 0.0);
      GridState u0 = s;
      SolverConfig cfg;
      Stepper st(params, cfg);
      for (int k = 0; k < 100; ++k) st.advance(s, params.gamma);
      double d = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) d = std::max(d, std::abs(s.values[i] - u0.values[i]));
      CHECK(d <= 5 * dx * dx);
    }
  }

  TEST_CASE("max principle for a one-signed perturbation") {
    auto params = ShockParams::make(1, -1, 1.0);
    auto prof = build_profile(params, -30, 30, 6001);
    GridState s = grid(prof, -15, 15, 0.05, PerturbationKind::gaussian, 0.5);
    double m = *std::max_element(s.values.begin(), s.values.end());
    double lo = *std::min_element(s.values.begin(), s.values.end());
    Stepper st(params, SolverConfig{});
    for (int k = 0; k < 2000; ++k) {
      st.advance(s, 0.0);
      double mk = *std::max_element(s.values.begin(), s.values.end());
      double lk = *std::min_element(s.values.begin(), s.values.end());
      REQUIRE(mk <= m);
      REQUIRE(lk >= lo);
      m = mk;
    }
  }

  TEST_CASE("blow-up is reported") {
    auto params = ShockParams::make(1, -1, 1.0);
    GridState s;
    s.dx = 0.1;
    s.values.assign(21, 0.0);
    s.values[10] = std::nan("");
    Stepper st(params, SolverConfig{});
    CHECK_THROWS_AS(st.advance(s, 0.0), BlowUpError);
  }

  TEST_CASE("initial_state rejects a bad grid") {
    auto prof = build_profile(ShockParams::make(1, -1, 1.0), -10, 10, 101);
    InitialData init;
    init.x_min = -1;
    init.x_max = 1;
    init.dx = 0.3;
    CHECK_THROWS_AS(initial_state(prof, init), ConfigError);
    init.dx = 0.25;
    auto s = initial_state(prof, init);
    CHECK(s.size() == 9);
    CHECK(s.values.front() == 1.0);
    CHECK(s.values.back() == -1.0);
  }

  TEST_CASE("simulate: zero perturbation stays at the discretization floor") {
    auto params = ShockParams::make(1, -1, 1.5);
    auto prof = build_profile(params, -40, 40, 8001);
    InitialData init;
    init.kind = PerturbationKind::none;
    init.x_min = -15;
    init.x_max = 15;
    init.dx = 0.05;
    SolverConfig cfg;
    cfg.frame = Frame::co_moving_shift;
    cfg.t_end = 20;
    cfg.output_dt = 2;
    auto ts = simulate(prof, init, params, cfg);
    REQUIRE(ts.records.size() == 11);
    for (const auto& r : ts.records) {
      CHECK(r.l2 <= 5 * init.dx * init.dx);
      CHECK(std::abs(r.X) <= 1e-12);
    }
  }

  TEST_CASE("simulate: L2 nonincreasing with the shift engaged") {
    auto params = ShockParams::make(1, -1, 1.0);
    auto prof = build_profile(params, -40, 40, 8001);
    InitialData init;
    init.x_min = -20;
    init.x_max = 20;
    init.dx = 0.04;
    SolverConfig cfg;
    cfg.frame = Frame::co_moving_shift;
    cfg.t_end = 30;
    cfg.output_dt = 0.5;
    auto ts = simulate(prof, init, params, cfg);
    for (std::size_t k = 1; k < ts.records.size(); ++k) CHECK(ts.records[k].l2 <= ts.records[k - 1].l2 + 1e-10);
  }

  TEST_CASE("simulate: L2 norm self-convergence under refinement") {
    auto params = ShockParams::make(1, -1, 1.0);
    auto prof = build_profile(params, -40, 40, 16001);
    auto l2_at = [&](double dx) {
      InitialData init;
      init.x_min = -16;
      init.x_max = 16;
      init.dx = dx;
      SolverConfig cfg;
      cfg.frame = Frame::co_moving_shift;
      cfg.t_end = 4;
      cfg.output_dt = 4;
      return simulate(prof, init, params, cfg).records.back().l2;
    };
    double a = l2_at(0.08), b = l2_at(0.04), c = l2_at(0.02);
    double order = std::log2(std::abs(a - b) / std::abs(b - c));
    CAPTURE(a);
    CAPTURE(b);
    CAPTURE(c);
    CHECK(order >= 1.0);
  }

  TEST_CASE("simulate rejects zero-mass shift in the shift frame") {
    auto params = ShockParams::make(1, -1, 1.0);
    auto prof = build_profile(params, -40, 40, 801);
    InitialData init;
    init.x_min = -10;
    init.x_max = 10;
    init.dx = 0.1;
    SolverConfig cfg;
    cfg.frame = Frame::co_moving_shift;
    MetricsSchedule sched;
    sched.zero_mass_shift = true;
    CHECK_THROWS_AS(simulate(prof, init, params, cfg, sched), ConfigError);
    cfg.frame = Frame::fixed;
    cfg.t_end = 1;
    cfg.output_dt = 0.3;
    CHECK_THROWS_AS(simulate(prof, init, params, cfg), ConfigError);
  }
}
