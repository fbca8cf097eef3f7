#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vshock {

/// y' + a (1+t)^alpha y^(1+beta) <= b (1+t)^(-gamma_exp).
struct RateOdeParams {
  double a = 1.0;
  double b = 0.0;
  double alpha = 0.0;
  double beta = 1.0;
  double gamma_exp = 1.0;

  void validate() const;
  /// min{(alpha + gamma) / (1 + beta), (1 + alpha) / beta}
  double mu() const;
  /// max{(2b/a)^(1/(1+beta)), (2(1+alpha)/(a beta))^(1/beta)}
  double C0() const;
};

struct DecayExponent {
  double mu = 0.0;
  double C0 = 0.0;
};
DecayExponent ode_decay_exponent(const RateOdeParams& params);

struct OdeTrial {
  double y0 = 0.0;
  /// max over the observation grid of y / (C0 (1+t)^(-mu)); <= 1 means the
  /// stated bound holds everywhere.
  double max_ratio = 0.0;
  double worst_t = 0.0;
  /// Earliest observation time from which the stated bound holds up to t_max.
  double holds_from = 0.0;
  /// Same ratio against max(C0, y0) (1+t)^(-mu).
  double max_envelope_ratio = 0.0;
  /// Relative deviation from the closed form when b = 0 (NaN otherwise).
  double closed_form_error = 0.0;
  bool integration_failed = false;
  bool pass = false;
  bool pass_envelope = false;
};

struct OdeComparisonReport {
  RateOdeParams params;
  double mu = 0.0;
  double C0 = 0.0;
  double t_max = 0.0;
  std::size_t n_steps = 0;
  std::vector<OdeTrial> trials;
  bool pass = false;
  bool pass_envelope = false;
  nlohmann::json to_json() const;
};

/// Integrates y' = -a (1+t)^alpha y^(1+beta) + b (1+t)^(-gamma) from each y0
/// with an adaptive Dormand-Prince pair and checks y(t) <= C0 (1+t)^(-mu) on
/// n_steps + 1 observation times spaced uniformly in log(1+t). Requires
/// n_steps >= 1e4. A failed integration is reported on its trial.
OdeComparisonReport ode_comparison_test(const RateOdeParams& params, double t_max,
                                        std::size_t n_steps,
                                        const std::vector<double>& y0s = {0.1, 1.0, 10.0, 100.0});

/// (|a|^(p-1) a - |b|^(p-1) b)(a - b) / ((c0 |a-b|^(p-1) + max(|a|,|b|)^(p-1)) (a-b)^2).
/// Throws DomainError for a == b.
double power_gap_ratio(double a, double b, double p, double c0);

/// Same-sign reduction with theta in [0, 1).
double h1(double theta, double p, double c0);
/// Opposite-sign reduction with theta in (0, 1].
double h2(double theta, double p, double c0);
/// Numerator of -h2': c0 p (1 - theta^(p-1))(1+theta)^(p-1) + 1 - p theta^(p-1) - (p-1) theta^p.
double g_numerator(double theta, double p, double c0);

struct Minimum {
  double value = 0.0;
  double argmin = 0.0;
};
/// Golden-section minimum of h2(., p, c0) on (0, 1]; c0 = 0 gives the
/// limiting function (1 + theta^p) / (1 + theta).
Minimum min_h2(double p, double c0);

/// Largest c0 with min_theta h2 >= 5/6, found by bisection (0 when even the
/// c0 = 0 limit fails).
double critical_c0(double p);

/// c0 used by the lemma scans: half of min(1/5, 2^(1-p)/5, critical_c0(p)),
/// dropping the last term where it is 0 (p beyond p0).
double lemma_c0(double p);

struct ScanSpec {
  std::size_t theta_points = 100001;
  std::size_t random_pairs = 100000;
  std::uint64_t seed = 20240531;
  double box = 10.0;
};

struct LemmaScanReport {
  double p = 0.0;
  double c0 = 0.0;
  std::string grid;
  double min_case1 = 0.0;
  double min_case2 = 0.0;
  double min_random = 0.0;
  double min_structured = 0.0;
  double min_ratio = 0.0;
  double argmin_a = 0.0;
  double argmin_b = 0.0;
  double argmin_theta = 0.0;
  /// Root of g on (0, 1) and h2 there; NaN outside 1 < p < 2.
  double theta_p = 0.0;
  double h2_at_theta_p = 0.0;
  bool pass = false;
  nlohmann::json to_json() const;
};

/// Minimum of the ratio over both reduced cases, seeded random pairs in
/// [-box, box]^2 and the structured families b = +-theta a. Passes iff the
/// minimum is >= 5/6 - 1e-9.
LemmaScanReport scan_abm(double p, double c0, const ScanSpec& spec = {});

struct P0Estimate {
  double p0 = 0.0;
  double lo = 39.0 / 20.0;
  double hi = 59.0 / 30.0;
  double min_at_lo = 0.0;
  double min_at_hi = 0.0;
  int iterations = 0;
};
/// Bisection on p of min_theta (1 + theta^p) / (1 + theta) = 5/6 inside
/// (39/20, 59/30). Throws ToleranceError when the bracket does not straddle
/// the threshold or tolerance > 1e-6.
P0Estimate estimate_p0(double tolerance = 1e-10);

struct ElementaryCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // lhs - rhs for (ab1), rhs - lhs for (ab2)
  bool pass = false;
};
/// (|a|^(p-1) a - |b|^(p-1) b)(a - b) >= 2^(1-p) |a - b|^(p+1).
ElementaryCheck check_monotonicity_gap(double a, double b, double p);
/// |a^q - b^q| <= |a - b|^q for a, b >= 0 and 0 <= q <= 1.
ElementaryCheck check_power_subadditivity(double a, double b, double q);

struct ElementaryReport {
  ElementaryCheck gap;
  ElementaryCheck subadditivity;
};
/// Both elementary inequalities; the second is skipped (pass, zero margin)
/// when its preconditions fail.
ElementaryReport check_elementary(double a, double b, double p, double q);

struct CertificateOptions {
  bool p0 = true;
  bool scans = true;
  bool ode = true;
  ScanSpec scan;
  double ode_t_max = 1000.0;
  std::size_t ode_steps = 10000;
};

struct LemmaCertificate {
  nlohmann::json doc;  // {p0_estimate, bracket, scans, ode_tests, ...}
  bool p0_pass = true;
  bool scans_pass = true;
  bool ode_pass = true;           // stated bound on the (alpha, beta, gamma) lattice
  bool ode_envelope_pass = true;  // max(C0, y0) (1+t)^(-mu) on the same lattice
  bool closed_form_pass = true;   // b = 0 integration vs closed form to 1e-6
  bool pass() const { return p0_pass && scans_pass && ode_pass && closed_form_pass; }
};

/// The p0 bracket and monotonicity, the scans at p in {1, 1.3, 1.6, 1.9}
/// (expected pass) and p = 2 (expected fail), and the ODE comparison on
/// alpha in {0, 1/2, 1}, beta, gamma in {1/2, 1, 2} with a = b = 1.
LemmaCertificate lemma_certificate(const CertificateOptions& options = {});

}  // namespace vshock
