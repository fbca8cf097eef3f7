#include <doctest.h>

#include <cmath>
#include <random>

#include "vshock/errors.hpp"
#include "vshock/lemma_lab.hpp"

using namespace vshock;

namespace {

// Direct evaluation of the ratio, written independently of power_gap_ratio.
double ratio_oracle(double a, double b, double p, double c0) {
  auto sp = [p](double v) { return std::copysign(std::pow(std::abs(v), p), v); };
  double num = (sp(a) - sp(b)) * (a - b);
  double den = (c0 * std::pow(std::abs(a - b), p - 1) + std::pow(std::max(std::abs(a), std::abs(b)), p - 1)) *
               (a - b) * (a - b);
  return num / den;
}

}  // namespace

TEST_SUITE("lemma_lab") {
  TEST_CASE("decay exponent examples") {
    auto e = ode_decay_exponent({1, 1, 0, 1, 1});
    CHECK(e.mu == doctest::Approx(0.5));
    CHECK(e.C0 == doctest::Approx(2.0));
    e = ode_decay_exponent({1, 0, 0, 2, 1});
    CHECK(e.mu == doctest::Approx(1.0 / 3.0));
    CHECK(e.C0 == doctest::Approx(1.0));
    for (double p : {1.0, 1.5, 1.9}) {
      // beta = 2p, alpha = 0, b = 0: with no forcing any gamma_exp is admissible,
      // and once it is large enough the squared L2 norm decays at 1/(2p)
      CHECK(ode_decay_exponent({1, 0, 0, 2 * p, 2}).mu == doctest::Approx(1 / (2 * p)));
    }
  }

  TEST_CASE("invalid ODE parameters") {
    CHECK_THROWS_AS(ode_decay_exponent({0, 1, 0, 1, 1}), DomainError);
    CHECK_THROWS_AS(ode_decay_exponent({1, -1, 0, 1, 1}), DomainError);
    CHECK_THROWS_AS(ode_decay_exponent({1, 1, 0, 0, 1}), DomainError);
    CHECK_THROWS_AS(ode_comparison_test({1, 1, 0, 1, 1}, 100, 10), DomainError);
  }

  TEST_CASE("ODE comparison: closed form for b = 0") {
    for (double beta : {1.0, 2.0, 0.5}) {
      RateOdeParams prm{1.5, 0, 0, beta, 1};
      auto rep = ode_comparison_test(prm, 1000, 10000, {0.0, 0.1, 1.0, 10.0, 100.0});
      for (const auto& tr : rep.trials) {
        CAPTURE(beta);
        CAPTURE(tr.y0);
        CHECK_FALSE(tr.integration_failed);
        if (tr.y0 > 0) CHECK(tr.closed_form_error <= 1e-6);
        if (tr.y0 <= rep.C0) CHECK(tr.pass);
        CHECK(tr.pass_envelope);
      }
      CHECK(rep.trials[0].max_ratio == 0.0);
    }
  }

  TEST_CASE("ODE comparison: example with y0 = 100") {
    // y(0) = 100 exceeds C0 = 2, so the stated bound cannot hold at t = 0;
    // it holds from some finite time on and the envelope max(C0, y0) holds throughout.
    auto rep = ode_comparison_test({1, 1, 0, 1, 1}, 1000, 10000, {100.0});
    const auto& tr = rep.trials[0];
    CHECK(rep.C0 == doctest::Approx(2.0));
    CHECK_FALSE(tr.pass);
    CHECK(tr.max_ratio == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(tr.holds_from > 0.0);
    CHECK(tr.holds_from < 5.0);
    CHECK(tr.pass_envelope);
  }

  TEST_CASE("power_gap_ratio examples") {
    CHECK(power_gap_ratio(1, 0, 1.7, 0.1) == doctest::Approx(1 / 1.1));
    for (double p : {1.0, 1.4, 2.0}) {
      double c0 = 0.05;
      CHECK(power_gap_ratio(1, -1, p, c0) == doctest::Approx(1 / (std::pow(2.0, p - 1) * c0 + 1)));
      CHECK(h2(1.0, p, c0) == doctest::Approx(1 / (std::pow(2.0, p - 1) * c0 + 1)));
      CHECK(h1(0.0, p, c0) == doctest::Approx(1 / (c0 + 1)));
    }
    CHECK(power_gap_ratio(2, 1, 1.0, 0.2) == doctest::Approx(5.0 / 6.0));
    CHECK_THROWS_AS(power_gap_ratio(1, 1, 1.5, 0.1), DomainError);
  }

  TEST_CASE("power_gap_ratio against a direct evaluation and scale invariance") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-10, 10), P(1, 2.5), S(0.01, 100);
    for (int k = 0; k < 1000; ++k) {
      double a = U(rng), b = U(rng), p = P(rng), s = S(rng), c0 = 0.1;
      double r = power_gap_ratio(a, b, p, c0);
      CHECK(r == doctest::Approx(ratio_oracle(a, b, p, c0)).epsilon(1e-10));
      CHECK(power_gap_ratio(s * a, s * b, p, c0) == doctest::Approx(r).epsilon(1e-9));
      CHECK(power_gap_ratio(-a, -b, p, c0) == doctest::Approx(r).epsilon(1e-12));
      // the reductions: b = theta a with theta in [0,1) and b = -theta a
      double th = std::abs(b) < std::abs(a) ? std::abs(b / a) : std::abs(a / b);
      double big = std::max(std::abs(a), std::abs(b));
      if (a * b > 0 && th < 1) CHECK(h1(th, p, c0) == doctest::Approx(power_gap_ratio(big, th * big, p, c0)).epsilon(1e-9));
      if (a * b < 0 && th > 0) CHECK(h2(th, p, c0) == doctest::Approx(power_gap_ratio(big, -th * big, p, c0)).epsilon(1e-9));
    }
  }

  TEST_CASE("h1 is nondecreasing and h2 has a single interior dip") {
    for (double p : {1.2, 1.6, 1.95}) {
      double c0 = lemma_c0(p);
      double prev = h1(0.0, p, c0);
      for (int k = 1; k < 1000; ++k) {
        double v = h1(k / 1000.0, p, c0);
        CHECK(v >= prev - 1e-12);
        prev = v;
      }
      // g changes sign at most once on (0, 1)
      int changes = 0;
      double last = g_numerator(1e-6, p, c0);
      for (int k = 1; k <= 1000; ++k) {
        double v = g_numerator(k / 1000.0, p, c0);
        if ((v > 0) != (last > 0)) ++changes;
        last = v;
      }
      CHECK(changes <= 1);
    }
  }

  TEST_CASE("limiting minimum at p = 2") {
    auto m = min_h2(2.0, 0.0);
    CHECK(std::abs(m.value - 2 * (std::sqrt(2.0) - 1)) <= 1e-9);
    CHECK(m.argmin == doctest::Approx(std::sqrt(2.0) - 1).epsilon(1e-6));
    CHECK(m.value < 5.0 / 6.0);
  }

  TEST_CASE("critical c0 and the scan constant") {
    CHECK(critical_c0(2.0) == 0.0);
    for (double p : {1.3, 1.6, 1.9}) {
      double cc = critical_c0(p);
      CHECK(cc > 0.0);
      CHECK(min_h2(p, cc * 0.999).value >= 5.0 / 6.0);
      CHECK(min_h2(p, std::min(1.0, cc * 1.01)).value < 5.0 / 6.0);
      CHECK(lemma_c0(p) <= std::min({0.2, std::pow(2.0, 1 - p) / 5, cc}) / 2 * (1 + 1e-15));
    }
  }

  TEST_CASE("scan_abm: p = 1 passes") {
    ScanSpec spec;
    spec.theta_points = 2001;
    spec.random_pairs = 20000;
    auto r = scan_abm(1.0, 0.1, spec);
    CHECK(r.pass);
    CHECK(r.min_ratio == doctest::Approx(1 / 1.1).epsilon(1e-9));
  }

  TEST_CASE("scan_abm: p = 1.9 with a tiny c0 passes") {
    ScanSpec spec;
    spec.theta_points = 20001;
    spec.random_pairs = 20000;
    auto r = scan_abm(1.9, 1e-6, spec);
    CHECK(r.pass);
    CHECK(r.min_ratio >= 5.0 / 6.0);
  }

  TEST_CASE("scan_abm: p = 2 fails") {
    ScanSpec spec;
    spec.theta_points = 20001;
    spec.random_pairs = 20000;
    auto r = scan_abm(2.0, 1e-6, spec);
    CHECK_FALSE(r.pass);
    CHECK(r.min_ratio == doctest::Approx(2 * (std::sqrt(2.0) - 1)).epsilon(1e-5));
  }

  TEST_CASE("scan_abm is deterministic in the seed") {
    ScanSpec spec;
    spec.theta_points = 501;
    spec.random_pairs = 5000;
    auto a = scan_abm(1.5, 0.05, spec), b = scan_abm(1.5, 0.05, spec);
    CHECK(a.min_random == b.min_random);
    spec.seed = 99;
    auto c = scan_abm(1.5, 0.05, spec);
    CHECK(c.min_random != a.min_random);
  }

  TEST_CASE("estimate_p0") {
    auto e = estimate_p0();
    CHECK(e.p0 > 39.0 / 20.0);
    CHECK(e.p0 < 59.0 / 30.0);
    CHECK(e.min_at_lo > 5.0 / 6.0);
    CHECK(e.min_at_hi < 5.0 / 6.0);
    CHECK(min_h2(e.p0, 0.0).value == doctest::Approx(5.0 / 6.0).epsilon(1e-8));
    CHECK_THROWS_AS(estimate_p0(1e-3), DomainError);
    double prev = 1.0;
    for (int k = 0; k <= 10; ++k) {
      double v = min_h2(1.9 + 0.01 * k, 0.0).value;
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }

  TEST_CASE("elementary inequalities") {
    auto g = check_monotonicity_gap(1, -1, 2);
    CHECK(g.lhs == doctest::Approx(4.0));
    CHECK(g.rhs == doctest::Approx(4.0));
    CHECK(g.pass);
    auto s = check_power_subadditivity(4, 1, 0.5);
    CHECK(s.lhs == doctest::Approx(1.0));
    CHECK(s.rhs == doctest::Approx(std::sqrt(3.0)));
    CHECK(s.pass);
    auto z = check_monotonicity_gap(0.3, 0.3, 1.7);
    CHECK(z.lhs == 0.0);
    CHECK(z.pass);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-5, 5), P(1, 3), Q(0, 1);
    for (int k = 0; k < 2000; ++k) {
      auto r = check_elementary(U(rng), U(rng), P(rng), Q(rng));
      CHECK(r.gap.pass);
      CHECK(r.subadditivity.pass);
    }
  }
}
