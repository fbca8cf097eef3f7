#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "vshock/errors.hpp"
#include "vshock/shock_profile.hpp"

using namespace vshock;

namespace {

// Position of the value U in (-1, 0] for u- = 1, u+ = -1:
// xi(U) = 2^(1/p) int_0^|U| (1 - w^2)^(-1/p) dw = 2^(1/p)/2 * B(U^2; 1/2, 1 - 1/p).
double xi_of_value_oracle(double U, double p) {
  double a = 0.5, b = 1.0 - 1.0 / p;
  double xi = std::pow(2.0, 1.0 / p) * 0.5 * boost::math::beta(a, b, U * U);
  return U < 0 ? xi : -xi;
}

double half_support_oracle(double p) { return std::pow(2.0, 1.0 / p) * 0.5 * std::beta(0.5, 1.0 - 1.0 / p); }

// Classical RK4 on U' = rhs(U) from U(0) = U0, used as an independent integrator.
template <class F>
double rk4(F rhs, double U0, double xi, int steps) {
  double h = xi / steps, U = U0;
  for (int i = 0; i < steps; ++i) {
    double k1 = rhs(U), k2 = rhs(U + 0.5 * h * k1), k3 = rhs(U + 0.5 * h * k2), k4 = rhs(U + h * k3);
    U += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return U;
}

}  // namespace

TEST_SUITE("shock_profile") {
  TEST_CASE("rankine_hugoniot examples") {
    CHECK(rankine_hugoniot_speed(FluxSpec::burgers(), 1, -1) == doctest::Approx(0.0));
    CHECK(rankine_hugoniot_speed(FluxSpec::burgers(), 2, 0) == doctest::Approx(1.0));
    CHECK(std::abs(rankine_hugoniot_speed(FluxSpec::quartic(), 1, -1)) < 1e-15);
    CHECK(ShockParams::make(3, 1, 1.5).gamma == doctest::Approx(2.0));
  }

  TEST_CASE("bad states") {
    CHECK_THROWS_AS(ShockParams::make(1, 1, 1.0), DegenerateShockError);
    CHECK_THROWS_AS(ShockParams::make(-1, 1, 1.0), DomainError);
    CHECK_THROWS_AS(ShockParams::make(1, -1, 0.5), DomainError);
  }

  TEST_CASE("profile_slope examples") {
    auto p1 = ShockParams::make(1, -1, 1.0);
    auto p2 = ShockParams::make(1, -1, 2.0);
    CHECK(profile_slope(0.0, p1) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(profile_slope(1.0, p1) == 0.0);
    CHECK(profile_slope(-1.0, p2) == 0.0);
    CHECK(profile_slope(0.0, p2) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-15));
  }

  TEST_CASE("rescale_viscosity examples") {
    auto s = rescale_viscosity(1.0, 2.7);
    CHECK(s.time_scale == 1.0);
    CHECK(s.space_scale == 1.0);
    s = rescale_viscosity(4.0, 1.0);
    CHECK(s.space_scale == doctest::Approx(4.0));
    s = rescale_viscosity(8.0, 3.0);
    CHECK(s.time_scale == 8.0);
    CHECK(s.space_scale == doctest::Approx(std::sqrt(8.0)).epsilon(1e-14));
  }

  TEST_CASE("p = 1 matches -tanh(xi/2)") {
    auto params = ShockParams::make(1, -1, 1.0);
    auto prof = build_profile(params, -40, 40, 8001);
    CHECK_FALSE(prof.has_compact_support());
    double err = 0.0;
    for (std::size_t j = 0; j < prof.size(); ++j) err = std::max(err, std::abs(prof.U()[j] + std::tanh(prof.xi(j) / 2)));
    CHECK(err <= 1e-8);
    // off-grid evaluation through the interpolant
    double err_off = 0.0;
    for (double xi = -20.003; xi < 20; xi += 0.0371) err_off = std::max(err_off, std::abs(prof.value(xi) + std::tanh(xi / 2)));
    CHECK(err_off <= 1e-8);
    CHECK(prof.value(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  }

  TEST_CASE("p = 2 compact support width sqrt(2) pi") {
    auto prof = build_profile(ShockParams::make(1, -1, 2.0), -6, 6, 12001);
    REQUIRE(prof.has_compact_support());
    CHECK(std::abs(prof.x_R() - prof.x_L() - std::numbers::sqrt2 * std::numbers::pi) <= 1e-6);
    for (std::size_t j = 0; j < prof.size(); ++j) {
      double xi = prof.xi(j);
      if (xi <= prof.x_L()) {
        CHECK(prof.U()[j] == 1.0);
        CHECK(prof.Uprime()[j] == 0.0);
      } else if (xi >= prof.x_R()) {
        CHECK(prof.U()[j] == -1.0);
        CHECK(prof.Uprime()[j] == 0.0);
      }
    }
    CHECK(prof.value(-100.0) == 1.0);
    CHECK(prof.slope(100.0) == 0.0);
  }

  TEST_CASE("support endpoints against the beta function") {
    for (double p : {1.2, 1.5, 2.0, 3.0, 5.0}) {
      CAPTURE(p);
      auto prof = build_profile(ShockParams::make(1, -1, p), -8, 8, 1601);
      CHECK(prof.x_R() == doctest::Approx(half_support_oracle(p)).epsilon(1e-9));
      CHECK(prof.x_L() == doctest::Approx(-half_support_oracle(p)).epsilon(1e-9));
    }
  }

  TEST_CASE("support endpoints for p close to 1") {
    // The layer at the far state has width ~(p-1); a rule that steps over it
    // loses the endpoint in the 5th digit.
    for (double p : {1.0001, 1.001, 1.01}) {
      CAPTURE(p);
      auto prof = build_profile(ShockParams::make(1, -1, p), -10, 10, 2001);
      CHECK(prof.x_R() == doctest::Approx(half_support_oracle(p)).epsilon(1e-9));
      CHECK(prof.value(0.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("interior values against the incomplete beta function") {
    for (double p : {1.05, 1.3, 1.5, 2.0, 4.0}) {
      CAPTURE(p);
      auto prof = build_profile(ShockParams::make(1, -1, p), -10, 10, 4001);
      double worst = 0.0;
      for (double U = -0.99; U < 0.99; U += 0.0173) {
        double xi = xi_of_value_oracle(U, p);
        worst = std::max(worst, std::abs(prof.value(xi) - U));
      }
      CHECK(worst < 1e-7);
    }
  }

  TEST_CASE("slope bound with equality at the anchor") {
    for (double p : {1.0, 1.5, 2.0}) {
      for (auto [um, up] : {std::pair{1.0, -1.0}, std::pair{2.5, 0.5}}) {
        CAPTURE(p);
        CAPTURE(um);
        auto params = ShockParams::make(um, up, p);
        auto prof = build_profile(params, -12, 12, 6001);
        double bound = std::pow(2.0, -3.0 / p) * std::pow(um - up, 2.0 / p);
        double mx = 0.0;
        for (double v : prof.Uprime()) mx = std::max(mx, std::abs(v));
        CHECK(mx <= bound * (1 + 1e-12));
        CHECK(std::abs(std::abs(prof.slope(0.0)) - bound) <= 1e-6);
      }
    }
  }

  TEST_CASE("profile is monotone and anchored for shifted states") {
    auto params = ShockParams::make(2.0, 0.0, 1.5);
    auto prof = build_profile(params, -10, 10, 2001);
    CHECK(prof.value(0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t j = 1; j < prof.size(); ++j) CHECK(prof.U()[j] <= prof.U()[j - 1]);
  }

  TEST_CASE("general flux with Burgers reduces to build_profile") {
    auto params = ShockParams::make(1, -1, 1.0);
    auto a = build_profile(params, -30, 30, 3001);
    auto b = general_flux_profile(params, -30, 30, 3001);
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(a.U()[j] - b.U()[j]));
    CHECK(d <= 1e-10);
  }

  TEST_CASE("quartic flux against an independent RK4 integration") {
    auto params = ShockParams::make(1, -1, 1.0, FluxSpec::quartic());
    auto prof = make_profile(params, -40, 40, 8001);
    auto rhs = [&](double U) {
      auto f = [](double u) { return u * u / 2 + u * u * u * u / 12; };
      return f(U) - f(1.0) - params.gamma * (U - 1.0);
    };
    CHECK(prof.slope(0.0) == doctest::Approx(rhs(0.0)).epsilon(1e-12));
    CHECK(general_flux_slope(0.0, params) == doctest::Approx(rhs(0.0)).epsilon(1e-15));
    for (double xi : {-6.0, -2.5, 1.0, 3.0, 7.0}) {
      CAPTURE(xi);
      CHECK(prof.value(xi) == doctest::Approx(rk4(rhs, 0.0, xi, 20000)).epsilon(1e-9));
    }
    CHECK(std::abs(prof.value(prof.xi_max()) + 1.0) <= 1e-12);
    CHECK(std::abs(prof.value(prof.xi_min()) - 1.0) <= 1e-12);
  }

  TEST_CASE("profile csv header and round trip") {
    auto prof = build_profile(ShockParams::make(1, -1, 2.0), -3, 3, 17);
    std::ostringstream os;
    write_profile_csv(prof, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "xi,U,Uprime");
    int rows = 0;
    while (std::getline(is, line)) {
      double xi, U, Up;
      char c1, c2;
      std::istringstream ls(line);
      ls >> xi >> c1 >> U >> c2 >> Up;
      CHECK(U == prof.U()[rows]);
      ++rows;
    }
    CHECK(rows == 17);
  }
}
