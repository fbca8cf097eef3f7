#include "vshock/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vshock/errors.hpp"
#include "vshock/interpolation.hpp"
#include "vshock/io.hpp"

namespace vshock {
namespace {

double trap_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double kronrod(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 25, 1e-13);
}

}  // namespace

std::vector<double> TimeSeries::column(std::string_view name) const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (name == "t") out.push_back(r.t);
    else if (name == "X") out.push_back(r.X);
    else if (name == "Xdot") out.push_back(r.Xdot);
    else if (name == "l1") out.push_back(r.l1);
    else if (name == "l2") out.push_back(r.l2);
    else if (name == "linf") out.push_back(r.linf);
    else if (name == "dissipation") out.push_back(r.dissipation);
    else if (name == "mass_residual") out.push_back(r.mass_residual);
    else if (name == "gradient_term") out.push_back(r.gradient_term);
    else if (name == "shift_gap") out.push_back(r.shift_gap);
    else if (name == "shift_bound") out.push_back(r.shift_bound);
    else if (name == "l1_lab") out.push_back(r.l1_lab);
    else if (name == "u_max") out.push_back(r.u_max);
    else if (name == "u_min") out.push_back(r.u_min);
    else if (name == "phi_l2") out.push_back(r.phi_l2);
    else if (name == "phi_boundary") out.push_back(r.phi_boundary);
    else throw DomainError("unknown time-series column '" + std::string(name) + "'");
  }
  return out;
}

void TimeSeries::write_csv(std::ostream& out) const {
  out << "t,X,Xdot,l1,l2,linf,dissipation,mass_residual\n";
  for (const auto& r : records)
    out << format_double(r.t) << ',' << format_double(r.X) << ',' << format_double(r.Xdot) << ','
        << format_double(r.l1) << ',' << format_double(r.l2) << ',' << format_double(r.linf) << ','
        << format_double(r.dissipation) << ',' << format_double(r.mass_residual) << '\n';
}

void TimeSeries::write_diagnostics_csv(std::ostream& out) const {
  out << "t,gradient_term,shift_gap,shift_bound,l1_lab,u_max,u_min,phi_l2,phi_boundary,steps\n";
  for (const auto& r : records)
    out << format_double(r.t) << ',' << format_double(r.gradient_term) << ','
        << format_double(r.shift_gap) << ',' << format_double(r.shift_bound) << ','
        << format_double(r.l1_lab) << ',' << format_double(r.u_max) << ','
        << format_double(r.u_min) << ',' << format_double(r.phi_l2) << ','
        << format_double(r.phi_boundary) << ',' << r.steps << '\n';
}

double default_c0(double p) { return std::min(0.2, std::pow(2.0, 1.0 - p) / 5.0); }

AlignedProfile align_profile(const GridState& state, const Profile& profile, double X) {
  const std::size_t n = state.size();
  const double shift = state.frame_offset - X;
  AlignedProfile a;
  a.U.resize(n);
  a.Uprime.resize(n);
  a.Uprime_face.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = state.x(i) + shift;
    a.U[i] = profile.value(z);
    a.Uprime[i] = profile.slope_of_value(a.U[i]);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) a.Uprime_face[i] = profile.slope(state.x(i) + 0.5 * state.dx + shift);
  return a;
}

NormTriple perturbation_norms(const GridState& state, const AlignedProfile& aligned) {
  const std::size_t n = state.size();
  NormTriple out;
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::abs(state.values[i] - aligned.U[i]);
    const double c = trap_weight(i, n);
    s1 += c * w;
    s2 += c * w * w;
    out.linf = std::max(out.linf, w);
  }
  out.l1 = s1 * state.dx;
  out.l2 = std::sqrt(s2 * state.dx);
  return out;
}

double perturbation_norm(const GridState& state, const Profile& profile, double X, double q) {
  if (!(q >= 1.0)) throw DomainError("norm exponent must be >= 1");
  const double shift = state.frame_offset - X;
  const std::size_t n = state.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::abs(state.values[i] - profile.value(state.x(i) + shift));
    if (std::isinf(q)) acc = std::max(acc, w);
    else acc += trap_weight(i, n) * std::pow(w, q);
  }
  return std::isinf(q) ? acc : std::pow(acc * state.dx, 1.0 / q);
}

DissipationParts dissipation_parts(const GridState& state, const AlignedProfile& aligned,
                                   double Xdot, const ShockParams& params, double c0) {
  const std::size_t n = state.size();
  const double p = params.p;
  DissipationParts d;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double g = (state.values[i + 1] - state.values[i]) / state.dx;
    const double Uf = aligned.Uprime_face[i];
    const double diff = g - Uf;
    const double ad = std::abs(diff);
    d.gradient += p == 1.0 ? ad * ad : std::pow(ad, p + 1.0);
    const double weight = p == 1.0 ? 1.0 : std::pow(std::abs(Uf), p - 1.0);
    d.weighted += weight * diff * diff;
  }
  d.gradient *= state.dx;
  d.weighted *= state.dx;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = state.values[i] - aligned.U[i];
    const double m = trap_weight(i, n) * std::abs(aligned.Uprime[i]);
    d.mean += m * w;
    d.square += m * w * w;
  }
  d.mean *= state.dx;
  d.square *= state.dx;
  d.total = (5.0 / 3.0) * (c0 * d.gradient + d.weighted) + 2.0 * (Xdot - params.gamma) * d.mean -
            d.square;
  return d;
}

double dissipation(const GridState& state, const Profile& profile, double X, double Xdot,
                   const ShockParams& params, double c0) {
  return dissipation_parts(state, align_profile(state, profile, X), Xdot, params, c0).total;
}

PoincareResult weighted_poincare_check(const std::function<double(double)>& w, double u_plus,
                                       double u_minus, const std::function<double(double)>& dw) {
  if (!(u_minus > u_plus)) throw DomainError("weighted Poincare check needs u_minus > u_plus");
  const double len = u_minus - u_plus;
  std::function<double(double)> deriv = dw;
  if (!deriv) {
    const double h = 1e-3 * len;
    deriv = [&w, h](double y) {
      return (8.0 * (w(y + h) - w(y - h)) - (w(y + 2 * h) - w(y - 2 * h))) / (12.0 * h);
    };
  }
  const double mean = kronrod(w, u_plus, u_minus) / len;
  PoincareResult r;
  r.lhs = kronrod([&](double y) { const double d = w(y) - mean; return d * d; }, u_plus, u_minus);
  const double weighted = kronrod(
      [&](double y) {
        const double g = deriv(y);
        return (u_minus - y) * (y - u_plus) * g * g;
      },
      u_plus, u_minus);
  r.rhs = 5.0 / 6.0 * weighted;
  r.rhs_classical = 0.5 * weighted;
  // Absolute slack for roundoff in the mean when w is (nearly) constant.
  r.pass = r.lhs <= r.rhs * (1.0 + 1e-6) + 1e-14 * (1.0 + mean * mean) * len;
  return r;
}

TrigPolynomial::TrigPolynomial(std::uint64_t seed, double u_plus, double u_minus, int degree)
    : lo_(u_plus), len_(u_minus - u_plus) {
  if (!(u_minus > u_plus) || degree < 1) throw DomainError("trigonometric test function needs u- > u+ and degree >= 1");
  std::mt19937_64 rng(seed);
  auto draw = [&rng] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
  for (int k = 0; k < degree; ++k) {
    cos_.push_back(draw());
    sin_.push_back(draw());
  }
}

double TrigPolynomial::operator()(double y) const {
  const double s = M_PI * (y - lo_) / len_;
  double acc = 0.0;
  for (std::size_t k = 0; k < cos_.size(); ++k) {
    const double a = static_cast<double>(k + 1) * s;
    acc += cos_[k] * std::cos(a) + sin_[k] * std::sin(a);
  }
  return acc;
}

double TrigPolynomial::derivative(double y) const {
  const double s = M_PI * (y - lo_) / len_;
  double acc = 0.0;
  for (std::size_t k = 0; k < cos_.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    acc += kk * (sin_[k] * std::cos(kk * s) - cos_[k] * std::sin(kk * s));
  }
  return acc * M_PI / len_;
}

IdentityGap change_of_variables_identity(const GridState& state, const Profile& profile, double X,
                                         const ShockParams& params, std::size_t m) {
  if (m < 16) throw DomainError("identity check needs at least 16 nodes");
  const double um = params.u_minus;
  const double up = params.u_plus;
  const double len = params.jump();
  const double shift = state.frame_offset - X;
  IdentityGap out;
  out.rhs = 2.0 * dissipation_parts(state, align_profile(state, profile, X), params.gamma, params, 0.0)
                      .weighted;

  // Profile inverse by bisection on the monotone table.
  auto inverse = [&](double y) {
    double lo = profile.xi_min();
    double hi = profile.xi_max();
    if (profile.has_compact_support()) {
      lo = std::max(lo, profile.x_L());
      hi = std::min(hi, profile.x_R());
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (profile.value(mid) > y) lo = mid;
      else hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  auto y_of = [&](double theta) { return up + 0.5 * len * (1.0 - std::cos(theta)); };
  auto w_of = [&](double theta) {
    const double y = y_of(theta);
    const double x = inverse(y);
    return pchip_eval(state.values, state.x0, state.dx, x - shift) - y;
  };
  const double dtheta = M_PI / static_cast<double>(m);
  const double h = 0.25 * dtheta;
  double acc = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double th = (static_cast<double>(k) + 0.5) * dtheta;
    const double y = y_of(th);
    const double wy = (w_of(th + h) - w_of(th - h)) / (y_of(th + h) - y_of(th - h));
    acc += (um - y) * (y - up) * wy * wy * 0.5 * len * std::sin(th);
  }
  out.lhs = acc * dtheta;
  const double scale = std::max(std::abs(out.lhs), std::abs(out.rhs));
  out.relative_gap = scale > 0.0 ? std::abs(out.lhs - out.rhs) / scale : 0.0;
  return out;
}

AntiderivativeNorm antiderivative_norm(const GridState& state, const Profile& profile, double X,
                                       double r) {
  if (!(r >= 2.0)) throw DomainError("antiderivative norm exponent must be >= 2");
  const std::size_t n = state.size();
  const double shift = state.frame_offset - X;
  double Phi = 0.0;
  double prev = state.values[0] - profile.value(state.x(0) + shift);
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double cur = state.values[i] - profile.value(state.x(i) + shift);
    Phi += 0.5 * (prev + cur) * state.dx;
    acc += trap_weight(i, n) * std::pow(std::abs(Phi), r);
    prev = cur;
  }
  return {std::pow(acc * state.dx, 1.0 / r), Phi};
}

nlohmann::json RateFit::to_json() const {
  return {{"norm", norm},
          {"window", {json_number(t_a), json_number(t_b)}},
          {"C", json_number(C)},
          {"slope", json_number(slope)},
          {"slope_basis", slope_basis},
          {"theoretical_r", json_number(theoretical_r)},
          {"sup_ratio_median", json_number(sup_ratio_median)},
          {"sup_ratio_last_decade", json_number(sup_ratio_last_decade)},
          {"raw_sup_ratio_median", json_number(raw_sup_ratio_median)},
          {"raw_sup_ratio_last_decade", json_number(raw_sup_ratio_last_decade)},
          {"floor_corrected", floor_corrected},
          {"floor_last", json_number(floor_last)},
          {"samples", samples},
          {"pass", pass}};
}

RateFit fit_decay_rate(std::span<const double> t, std::span<const double> norm, double r,
                       const RateOptions& options, std::string name) {
  if (t.size() != norm.size()) throw DomainError("time and norm series differ in length");
  if (t.empty()) throw DomainError("empty norm series");
  RateFit fit;
  fit.norm = std::move(name);
  fit.theoretical_r = r;
  fit.t_b = options.t_b >= 0.0 ? options.t_b : t.back();
  fit.t_a = options.t_a >= 0.0 ? options.t_a : fit.t_b / 10.0;
  fit.floor_corrected = !options.floor.empty();

  const std::size_t n = t.size();
  std::vector<double> value(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!fit.floor_corrected) {
      value[i] = norm[i];
      continue;
    }
    const double fl = options.floor[std::min(i, options.floor.size() - 1)];
    value[i] = std::max(norm[i] - fl * (1.0 + options.floor_rel) - options.floor_abs, 0.0);
  }
  if (fit.floor_corrected) fit.floor_last = options.floor.back();

  std::vector<std::size_t> win;
  for (std::size_t i = 0; i < n; ++i)
    if (t[i] >= fit.t_a && t[i] <= fit.t_b) win.push_back(i);
  fit.samples = win.size();
  if (win.size() < options.min_samples) {
    std::ostringstream msg;
    msg << "rate window [" << fit.t_a << ", " << fit.t_b << "] holds " << win.size()
        << " samples, need " << options.min_samples;
    throw DomainError(msg.str());
  }
  for (std::size_t i : win) {
    if (!(norm[i] > 0.0) || !std::isfinite(norm[i])) {
      std::ostringstream msg;
      msg << "non-positive or non-finite norm " << norm[i] << " at t = " << t[i];
      throw DomainError(msg.str());
    }
  }

  const double last_start = fit.t_b - (fit.t_b - fit.t_a) / 10.0;
  std::vector<double> ratio;
  std::vector<double> raw;
  double last = 0.0;
  double raw_last = 0.0;
  bool finite = true;
  for (std::size_t i : win) {
    const double w = std::pow(1.0 + t[i], r);
    ratio.push_back(value[i] * w);
    raw.push_back(norm[i] * w);
    finite = finite && std::isfinite(ratio.back());
    if (t[i] >= last_start) {
      last = std::max(last, ratio.back());
      raw_last = std::max(raw_last, raw.back());
    }
  }
  fit.sup_ratio_median = median(ratio);
  fit.sup_ratio_last_decade = last;
  fit.raw_sup_ratio_median = median(raw);
  fit.raw_sup_ratio_last_decade = raw_last;
  fit.pass = finite && last <= options.tolerance_factor * fit.sup_ratio_median;

  auto least_squares = [&](const std::vector<std::size_t>& idx) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i : idx) {
      const double x = std::log1p(t[i]);
      const double y = std::log(value[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double k = static_cast<double>(idx.size());
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    fit.slope = slope;
    fit.C = std::exp((sy - slope * sx) / k);
  };
  std::vector<std::size_t> pos;
  for (std::size_t i : win)
    if (value[i] > 0.0) pos.push_back(i);
  if (pos.size() >= options.min_samples) {
    fit.slope_basis = "window";
    least_squares(pos);
    return fit;
  }
  // The excess reached the floor early: fit the decade before it vanished.
  std::size_t last_pos = n;
  for (std::size_t i = 0; i < n && t[i] <= fit.t_b; ++i)
    if (value[i] > 0.0) last_pos = i;
  pos.clear();
  if (last_pos < n) {
    const double tz = t[last_pos];
    for (std::size_t i = 0; i <= last_pos; ++i)
      if (t[i] >= tz / 10.0 && t[i] > 0.0 && value[i] > 0.0) pos.push_back(i);
  }
  if (pos.size() >= 3) {
    fit.slope_basis = "pre-floor";
    least_squares(pos);
  } else {
    fit.slope_basis = "none";
    fit.slope = -std::numeric_limits<double>::infinity();
    fit.C = 0.0;
  }
  return fit;
}

}  // namespace vshock
