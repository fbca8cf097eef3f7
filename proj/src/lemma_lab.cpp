#include "vshock/lemma_lab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "vshock/errors.hpp"
#include "vshock/io.hpp"

namespace vshock {
namespace {

constexpr double kFiveSixths = 5.0 / 6.0;

double spow(double x, double p) { return std::pow(std::abs(x), p - 1.0) * x; }

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <class F>
Minimum golden_section(F f, double lo, double hi, double tol = 1e-13) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? Minimum{f1, x1} : Minimum{f2, x2};
}

}  // namespace

void RateOdeParams::validate() const {
  if (!(a > 0.0)) throw DomainError("Lemma ODE needs a > 0");
  if (!(b >= 0.0)) throw DomainError("Lemma ODE needs b >= 0");
  if (!(alpha >= 0.0)) throw DomainError("Lemma ODE needs alpha >= 0");
  if (!(beta > 0.0)) throw DomainError("Lemma ODE needs beta > 0");
  if (!(gamma_exp > 0.0)) throw DomainError("Lemma ODE needs gamma > 0");
}

double RateOdeParams::mu() const {
  return std::min((alpha + gamma_exp) / (1.0 + beta), (1.0 + alpha) / beta);
}

double RateOdeParams::C0() const {
  return std::max(std::pow(2.0 * b / a, 1.0 / (1.0 + beta)),
                  std::pow(2.0 * (1.0 + alpha) / (a * beta), 1.0 / beta));
}

DecayExponent ode_decay_exponent(const RateOdeParams& params) {
  params.validate();
  return {params.mu(), params.C0()};
}

nlohmann::json OdeComparisonReport::to_json() const {
  nlohmann::json trials_json = nlohmann::json::array();
  for (const auto& tr : trials)
    trials_json.push_back({{"y0", json_number(tr.y0)},
                           {"max_ratio", json_number(tr.max_ratio)},
                           {"worst_t", json_number(tr.worst_t)},
                           {"holds_from", json_number(tr.holds_from)},
                           {"max_envelope_ratio", json_number(tr.max_envelope_ratio)},
                           {"closed_form_error", json_number(tr.closed_form_error)},
                           {"integration_failed", tr.integration_failed},
                           {"pass", tr.pass},
                           {"pass_envelope", tr.pass_envelope}});
  return {{"a", json_number(params.a)},
          {"b", json_number(params.b)},
          {"alpha", json_number(params.alpha)},
          {"beta", json_number(params.beta)},
          {"gamma", json_number(params.gamma_exp)},
          {"mu", json_number(mu)},
          {"C0", json_number(C0)},
          {"t_max", json_number(t_max)},
          {"n_steps", n_steps},
          {"trials", trials_json},
          {"pass", pass},
          {"pass_envelope", pass_envelope}};
}

OdeComparisonReport ode_comparison_test(const RateOdeParams& params, double t_max,
                                        std::size_t n_steps, const std::vector<double>& y0s) {
  params.validate();
  if (n_steps < 10000) throw DomainError("ode_comparison_test needs n_steps >= 1e4");
  if (!(t_max > 0.0)) throw DomainError("ode_comparison_test needs t_max > 0");
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;

  OdeComparisonReport rep;
  rep.params = params;
  rep.mu = params.mu();
  rep.C0 = params.C0();
  rep.t_max = t_max;
  rep.n_steps = n_steps;

  std::vector<double> times(n_steps + 1);
  const double log_end = std::log1p(t_max);
  for (std::size_t k = 0; k <= n_steps; ++k)
    times[k] = std::expm1(log_end * static_cast<double>(k) / static_cast<double>(n_steps));
  times.back() = t_max;

  const double a = params.a, b = params.b, alpha = params.alpha, beta = params.beta,
               gam = params.gamma_exp;
  auto rhs = [=](const State& y, State& dy, double t) {
    const double yy = std::max(y[0], 0.0);
    dy[0] = -a * std::pow(1.0 + t, alpha) * std::pow(yy, 1.0 + beta) + b * std::pow(1.0 + t, -gam);
  };

  rep.pass = true;
  rep.pass_envelope = true;
  for (double y0 : y0s) {
    OdeTrial tr;
    tr.y0 = y0;
    tr.closed_form_error = b == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    const double envelope_c = std::max(rep.C0, y0);
    std::size_t last_violation = std::numeric_limits<std::size_t>::max();
    std::size_t k = 0;
    auto observe = [&](const State& y, double t) {
      const double decay = std::pow(1.0 + t, -rep.mu);
      const double ratio = rep.C0 > 0.0 ? y[0] / (rep.C0 * decay)
                                        : (y[0] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      if (ratio > tr.max_ratio) {
        tr.max_ratio = ratio;
        tr.worst_t = t;
      }
      if (ratio > 1.0) last_violation = k;
      if (envelope_c > 0.0) tr.max_envelope_ratio = std::max(tr.max_envelope_ratio, y[0] / (envelope_c * decay));
      if (b == 0.0) {
        double exact = 0.0;
        if (y0 > 0.0)
          exact = std::pow(std::pow(y0, -beta) +
                               a * beta / (1.0 + alpha) * (std::pow(1.0 + t, 1.0 + alpha) - 1.0),
                           -1.0 / beta);
        const double err = exact > 0.0 ? std::abs(y[0] - exact) / exact : std::abs(y[0]);
        tr.closed_form_error = std::max(tr.closed_form_error, err);
      }
      ++k;
    };
    State y{y0};
    try {
      auto stepper = odeint::make_controlled(1e-14, 1e-11, odeint::runge_kutta_dopri5<State>());
      const double dt0 = std::min(1e-6, times[1]);
      odeint::integrate_times(stepper, rhs, y, times.begin(), times.end(), dt0, observe,
                              odeint::max_step_checker(1000000));
    } catch (const std::exception&) {
      tr.integration_failed = true;
    }
    tr.holds_from = last_violation == std::numeric_limits<std::size_t>::max()
                        ? 0.0
                        : (last_violation + 1 < times.size() ? times[last_violation + 1] : t_max);
    tr.pass = !tr.integration_failed && k == times.size() && tr.max_ratio <= 1.0;
    tr.pass_envelope = !tr.integration_failed && k == times.size() && tr.max_envelope_ratio <= 1.0;
    rep.pass = rep.pass && tr.pass;
    rep.pass_envelope = rep.pass_envelope && tr.pass_envelope;
    rep.trials.push_back(tr);
  }
  return rep;
}

double power_gap_ratio(double a, double b, double p, double c0) {
  if (a == b) throw DomainError("power_gap_ratio is undefined for a == b");
  const double d = a - b;
  const double num = (spow(a, p) - spow(b, p)) * d;
  const double den = (c0 * std::pow(std::abs(d), p - 1.0) +
                      std::pow(std::max(std::abs(a), std::abs(b)), p - 1.0)) *
                     d * d;
  return num / den;
}

double h1(double theta, double p, double c0) {
  return (1.0 - std::pow(theta, p)) /
         ((c0 * std::pow(1.0 - theta, p - 1.0) + 1.0) * (1.0 - theta));
}

double h2(double theta, double p, double c0) {
  return (1.0 + std::pow(theta, p)) /
         ((c0 * std::pow(1.0 + theta, p - 1.0) + 1.0) * (1.0 + theta));
}

double g_numerator(double theta, double p, double c0) {
  return c0 * p * (1.0 - std::pow(theta, p - 1.0)) * std::pow(1.0 + theta, p - 1.0) + 1.0 -
         p * std::pow(theta, p - 1.0) - (p - 1.0) * std::pow(theta, p);
}

Minimum min_h2(double p, double c0) {
  Minimum m = golden_section([&](double th) { return h2(th, p, c0); }, 0.0, 1.0);
  const double at0 = h2(0.0, p, c0);
  const double at1 = h2(1.0, p, c0);
  if (at0 < m.value) m = {at0, 0.0};
  if (at1 < m.value) m = {at1, 1.0};
  return m;
}

double critical_c0(double p) {
  if (min_h2(p, 0.0).value < kFiveSixths) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (min_h2(p, mid).value >= kFiveSixths) lo = mid;
    else hi = mid;
  }
  return lo;
}

double lemma_c0(double p) {
  const double ceiling = std::min(0.2, std::pow(2.0, 1.0 - p) / 5.0);
  const double critical = critical_c0(p);
  // Past p0 no c0 passes; keep the endpoint ceiling so the failure shows.
  return 0.5 * (critical > 0.0 ? std::min(ceiling, critical) : ceiling);
}

nlohmann::json LemmaScanReport::to_json() const {
  return {{"p", json_number(p)},
          {"c0", json_number(c0)},
          {"grid", grid},
          {"min_case1", json_number(min_case1)},
          {"min_case2", json_number(min_case2)},
          {"min_random", json_number(min_random)},
          {"min_structured", json_number(min_structured)},
          {"min_ratio", json_number(min_ratio)},
          {"argmin_a", json_number(argmin_a)},
          {"argmin_b", json_number(argmin_b)},
          {"argmin_theta", json_number(argmin_theta)},
          {"theta_p", json_number(theta_p)},
          {"h2_at_theta_p", json_number(h2_at_theta_p)},
          {"pass", pass}};
}

LemmaScanReport scan_abm(double p, double c0, const ScanSpec& spec) {
  if (!(p >= 1.0)) throw DomainError("scan_abm needs p >= 1");
  if (!(c0 > 0.0)) throw DomainError("scan_abm needs c0 > 0");
  if (spec.theta_points < 3) throw DomainError("scan_abm needs at least 3 theta points");
  LemmaScanReport rep;
  rep.p = p;
  rep.c0 = c0;
  std::ostringstream desc;
  desc << "theta grid " << spec.theta_points << " per case + golden section; " << spec.random_pairs
       << " random pairs in [-" << spec.box << ", " << spec.box << "]^2 (seed " << spec.seed
       << "); structured b = +-theta a";
  rep.grid = desc.str();
  rep.min_ratio = std::numeric_limits<double>::infinity();
  auto consider = [&](double value, double a, double b, double theta) {
    if (value < rep.min_ratio) {
      rep.min_ratio = value;
      rep.argmin_a = a;
      rep.argmin_b = b;
      rep.argmin_theta = theta;
    }
  };

  const auto m = static_cast<double>(spec.theta_points - 1);
  rep.min_case1 = std::numeric_limits<double>::infinity();
  rep.min_case2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < spec.theta_points; ++k) {
    const double th = static_cast<double>(k) / m;
    const double v = h1(th, p, c0);
    rep.min_case1 = std::min(rep.min_case1, v);
    consider(v, 1.0, th, th);
  }
  for (std::size_t k = 1; k < spec.theta_points; ++k) {
    const double th = static_cast<double>(k) / m;
    const double v = h2(th, p, c0);
    rep.min_case2 = std::min(rep.min_case2, v);
    consider(v, 1.0, -th, th);
  }
  const Minimum refined = min_h2(p, c0);
  rep.min_case2 = std::min(rep.min_case2, refined.value);
  consider(refined.value, 1.0, -refined.argmin, refined.argmin);

  rep.theta_p = std::numeric_limits<double>::quiet_NaN();
  rep.h2_at_theta_p = std::numeric_limits<double>::quiet_NaN();
  if (p > 1.0 && p < 2.0) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (g_numerator(mid, p, c0) > 0.0) lo = mid;
      else hi = mid;
    }
    rep.theta_p = 0.5 * (lo + hi);
    rep.h2_at_theta_p = h2(rep.theta_p, p, c0);
  }

  std::mt19937_64 rng(spec.seed);
  rep.min_random = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < spec.random_pairs; ++k) {
    const double a = spec.box * (2.0 * unit_draw(rng) - 1.0);
    const double b = spec.box * (2.0 * unit_draw(rng) - 1.0);
    if (a == b) continue;
    const double v = power_gap_ratio(a, b, p, c0);
    rep.min_random = std::min(rep.min_random, v);
    consider(v, a, b, std::numeric_limits<double>::quiet_NaN());
  }

  rep.min_structured = std::numeric_limits<double>::infinity();
  const double scales[] = {1.0, -1.0, 3.7, -0.2, spec.box};
  for (double a : scales) {
    for (std::size_t k = 0; k <= 1000; ++k) {
      const double th = static_cast<double>(k) / 1000.0;
      for (double sign : {1.0, -1.0}) {
        const double b = sign * th * a;
        if (a == b) continue;
        const double v = power_gap_ratio(a, b, p, c0);
        rep.min_structured = std::min(rep.min_structured, v);
        consider(v, a, b, th);
      }
    }
  }
  rep.pass = rep.min_ratio >= kFiveSixths - 1e-9;
  return rep;
}

P0Estimate estimate_p0(double tolerance) {
  if (!(tolerance > 0.0 && tolerance <= 1e-6))
    throw DomainError("estimate_p0 needs 0 < tolerance <= 1e-6");
  P0Estimate est;
  auto excess = [](double p) { return min_h2(p, 0.0).value - kFiveSixths; };
  est.min_at_lo = min_h2(est.lo, 0.0).value;
  est.min_at_hi = min_h2(est.hi, 0.0).value;
  if (!(est.min_at_lo >= kFiveSixths) || !(est.min_at_hi < kFiveSixths)) {
    std::ostringstream msg;
    msg << "p0 bracket failure: min h2 = " << est.min_at_lo << " at p = " << est.lo << ", "
        << est.min_at_hi << " at p = " << est.hi << " (threshold 5/6)";
    throw ToleranceError(msg.str(), "p0 bracket");
  }
  double lo = est.lo;
  double hi = est.hi;
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) >= 0.0) lo = mid;
    else hi = mid;
    ++est.iterations;
  }
  est.p0 = 0.5 * (lo + hi);
  return est;
}

ElementaryCheck check_monotonicity_gap(double a, double b, double p) {
  ElementaryCheck c;
  c.lhs = (spow(a, p) - spow(b, p)) * (a - b);
  c.rhs = std::pow(2.0, 1.0 - p) * std::pow(std::abs(a - b), p + 1.0);
  c.margin = c.lhs - c.rhs;
  c.pass = c.margin >= -1e-12 * std::max(1.0, std::abs(c.rhs));
  return c;
}

ElementaryCheck check_power_subadditivity(double a, double b, double q) {
  if (a < 0.0 || b < 0.0 || q < 0.0 || q > 1.0)
    throw DomainError("power subadditivity needs a, b >= 0 and 0 <= q <= 1");
  ElementaryCheck c;
  c.lhs = std::abs(std::pow(a, q) - std::pow(b, q));
  c.rhs = std::pow(std::abs(a - b), q);
  c.margin = c.rhs - c.lhs;
  c.pass = c.margin >= -1e-12 * std::max(1.0, c.rhs);
  return c;
}

ElementaryReport check_elementary(double a, double b, double p, double q) {
  ElementaryReport r;
  r.gap = check_monotonicity_gap(a, b, p);
  if (a >= 0.0 && b >= 0.0 && q >= 0.0 && q <= 1.0) r.subadditivity = check_power_subadditivity(a, b, q);
  else r.subadditivity.pass = true;
  return r;
}

LemmaCertificate lemma_certificate(const CertificateOptions& options) {
  LemmaCertificate cert;
  nlohmann::json& doc = cert.doc;
  doc = nlohmann::json::object();

  double p0 = std::numeric_limits<double>::quiet_NaN();
  if (options.p0 || options.scans) {
    const P0Estimate est = estimate_p0(1e-10);
    p0 = est.p0;
    bool monotone = true;
    nlohmann::json samples = nlohmann::json::array();
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 10; ++k) {
      const double p = 1.9 + 0.01 * k;
      const double m = min_h2(p, 0.0).value;
      monotone = monotone && m <= prev;
      prev = m;
      samples.push_back({{"p", json_number(p)}, {"min_h2_limit", json_number(m)}});
    }
    const bool inside = est.p0 > 39.0 / 20.0 && est.p0 < 59.0 / 30.0;
    cert.p0_pass = inside && monotone;
    doc["p0_estimate"] = json_number(est.p0);
    doc["bracket"] = {json_number(est.lo), json_number(est.hi)};
    doc["p0_detail"] = {{"min_at_lo", json_number(est.min_at_lo)},
                        {"min_at_hi", json_number(est.min_at_hi)},
                        {"iterations", est.iterations},
                        {"inside_bracket", inside},
                        {"monotone_in_p", monotone},
                        {"samples", samples},
                        {"min_h2_limit_p2", json_number(min_h2(2.0, 0.0).value)},
                        {"pass", cert.p0_pass}};
  }

  if (options.scans) {
    nlohmann::json scans = nlohmann::json::array();
    for (double p : {1.0, 1.3, 1.6, 1.9, 2.0}) {
      const bool expect = p < p0;
      const double c0 = lemma_c0(p);
      const LemmaScanReport rep = scan_abm(p, c0, options.scan);
      nlohmann::json j = rep.to_json();
      j["expected_pass"] = expect;
      j["as_expected"] = rep.pass == expect;
      j["critical_c0"] = json_number(critical_c0(p));
      j["half_ceiling_c0"] = json_number(0.5 * std::min(0.2, std::pow(2.0, 1.0 - p) / 5.0));
      j["min_h2_at_half_ceiling"] =
          json_number(min_h2(p, 0.5 * std::min(0.2, std::pow(2.0, 1.0 - p) / 5.0)).value);
      cert.scans_pass = cert.scans_pass && rep.pass == expect;
      scans.push_back(j);
    }
    doc["scans"] = scans;

    // Largest p just below the root that still passes a lighter scan.
    ScanSpec light = options.scan;
    light.theta_points = 10001;
    light.random_pairs = 10000;
    double verified = std::numeric_limits<double>::quiet_NaN();
    for (int k = 1; k <= 100; ++k) {
      const double p = p0 - 1e-4 * k;
      if (scan_abm(p, lemma_c0(p), light).pass) {
        verified = p;
        break;
      }
    }
    doc["largest_verified_pass_p"] = json_number(verified);
  }

  if (options.ode) {
    nlohmann::json tests = nlohmann::json::array();
    for (double alpha : {0.0, 0.5, 1.0})
      for (double beta : {0.5, 1.0, 2.0})
        for (double gam : {0.5, 1.0, 2.0}) {
          RateOdeParams q;
          q.a = 1.0;
          q.b = 1.0;
          q.alpha = alpha;
          q.beta = beta;
          q.gamma_exp = gam;
          const OdeComparisonReport rep = ode_comparison_test(q, options.ode_t_max, options.ode_steps);
          cert.ode_pass = cert.ode_pass && rep.pass;
          cert.ode_envelope_pass = cert.ode_envelope_pass && rep.pass_envelope;
          tests.push_back(rep.to_json());
        }
    doc["ode_tests"] = tests;

    nlohmann::json closed = nlohmann::json::array();
    for (double alpha : {0.0, 1.0})
      for (double beta : {1.0, 2.0}) {
        RateOdeParams q;
        q.b = 0.0;
        q.alpha = alpha;
        q.beta = beta;
        const OdeComparisonReport rep =
            ode_comparison_test(q, options.ode_t_max, options.ode_steps, {0.0, 0.1, 1.0, 10.0, 100.0});
        double worst = 0.0;
        bool failed = false;
        for (const auto& tr : rep.trials) {
          worst = std::max(worst, tr.closed_form_error);
          failed = failed || tr.integration_failed;
        }
        const bool ok = !failed && worst <= 1e-6;
        cert.closed_form_pass = cert.closed_form_pass && ok;
        nlohmann::json j = rep.to_json();
        j["closed_form_max_error"] = json_number(worst);
        j["closed_form_pass"] = ok;
        closed.push_back(j);
      }
    doc["closed_form_tests"] = closed;
  }
  // Only the parts that ran get a verdict.
  nlohmann::json verdict = nlohmann::json::object();
  if (options.p0) verdict["p0"] = cert.p0_pass;
  if (options.scans) verdict["scans"] = cert.scans_pass;
  if (options.ode) {
    verdict["ode_stated_bound"] = cert.ode_pass;
    verdict["ode_envelope_bound"] = cert.ode_envelope_pass;
    verdict["closed_form"] = cert.closed_form_pass;
  }
  doc["pass"] = verdict;
  return cert;
}

}  // namespace vshock
