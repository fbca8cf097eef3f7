#include "vshock/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "vshock/errors.hpp"

namespace vshock {
namespace {

double harmonic_slope(double d0, double d1) {
  if (d0 * d1 <= 0.0) return 0.0;
  return 2.0 / (1.0 / d0 + 1.0 / d1);
}

// Three-point one-sided end slope, clipped so the end interval stays monotone.
double end_slope(double d0, double d1) {
  double m = 0.5 * (3.0 * d0 - d1);
  if (m * d0 <= 0.0) return 0.0;
  if (d0 * d1 <= 0.0 && std::abs(m) > 3.0 * std::abs(d0)) m = 3.0 * d0;
  return m;
}

double hermite(double y0, double y1, double m0, double m1, double h, double t) {
  const double t2 = t * t;
  const double omt = 1.0 - t;
  return (1.0 + 2.0 * t) * omt * omt * y0 + t * omt * omt * h * m0 + t2 * (3.0 - 2.0 * t) * y1 +
         t2 * (t - 1.0) * h * m1;
}

double hermite_derivative(double y0, double y1, double m0, double m1, double h, double t) {
  const double dy = (y1 - y0) / h;
  return 6.0 * t * (1.0 - t) * dy + (1.0 - t) * (1.0 - 3.0 * t) * m0 + t * (3.0 * t - 2.0) * m1;
}

}  // namespace

std::vector<double> pchip_slopes(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  std::vector<double> m(n, 0.0);
  if (n < 2) return m;
  if (n == 2) {
    m[0] = m[1] = (y[1] - y[0]) / h;
    return m;
  }
  for (std::size_t i = 1; i + 1 < n; ++i)
    m[i] = harmonic_slope((y[i] - y[i - 1]) / h, (y[i + 1] - y[i]) / h);
  m[0] = end_slope((y[1] - y[0]) / h, (y[2] - y[1]) / h);
  m[n - 1] = end_slope((y[n - 1] - y[n - 2]) / h, (y[n - 2] - y[n - 3]) / h);
  return m;
}

void limit_monotone_slopes(std::span<const double> y, double h, std::span<double> m) {
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    const double d = (y[i + 1] - y[i]) / h;
    if (d == 0.0) {
      m[i] = 0.0;
      m[i + 1] = 0.0;
      continue;
    }
    double a = m[i] / d;
    double b = m[i + 1] / d;
    if (a < 0.0) m[i] = a = 0.0;
    if (b < 0.0) m[i + 1] = b = 0.0;
    const double r2 = a * a + b * b;
    if (r2 > 9.0) {
      const double tau = 3.0 / std::sqrt(r2);
      m[i] = tau * a * d;
      m[i + 1] = tau * b * d;
    }
  }
}

MonotoneCubic::MonotoneCubic(double x0, double h, std::vector<double> values)
    : x0_(x0), h_(h), y_(std::move(values)) {
  if (!(h_ > 0.0)) throw DomainError("interpolation spacing must be positive");
  m_ = pchip_slopes(y_, h_);
}

MonotoneCubic::MonotoneCubic(double x0, double h, std::vector<double> values,
                             std::span<const double> slopes)
    : x0_(x0), h_(h), y_(std::move(values)), m_(slopes.begin(), slopes.end()) {
  if (!(h_ > 0.0)) throw DomainError("interpolation spacing must be positive");
  if (m_.size() != y_.size()) throw DomainError("slope table size mismatch");
  limit_monotone_slopes(y_, h_, m_);
}

double MonotoneCubic::operator()(double x) const {
  if (y_.empty()) return 0.0;
  const double s = (x - x0_) / h_;
  if (!(s > 0.0)) return y_.front();
  const auto last = static_cast<double>(y_.size() - 1);
  if (s >= last) return y_.back();
  const auto i = static_cast<std::size_t>(s);
  return hermite(y_[i], y_[i + 1], m_[i], m_[i + 1], h_, s - static_cast<double>(i));
}

double MonotoneCubic::derivative(double x) const {
  if (y_.size() < 2) return 0.0;
  const double s = (x - x0_) / h_;
  const auto last = static_cast<double>(y_.size() - 1);
  if (s < 0.0 || s > last) return 0.0;
  auto i = static_cast<std::size_t>(s);
  if (i == y_.size() - 1) --i;
  return hermite_derivative(y_[i], y_[i + 1], m_[i], m_[i + 1], h_, s - static_cast<double>(i));
}

double pchip_eval(std::span<const double> y, double x0, double h, double x) {
  const std::size_t n = y.size();
  if (n == 0) return 0.0;
  const double s = (x - x0) / h;
  if (!(s > 0.0)) return y.front();
  if (s >= static_cast<double>(n - 1)) return y.back();
  const auto i = static_cast<std::size_t>(s);
  const double t = s - static_cast<double>(i);
  if (n == 2) return y[0] + t * (y[1] - y[0]);
  const double d = (y[i + 1] - y[i]) / h;
  double m0;
  double m1;
  if (i == 0) m0 = end_slope(d, (y[2] - y[1]) / h);
  else m0 = harmonic_slope((y[i] - y[i - 1]) / h, d);
  if (i + 2 == n) m1 = end_slope(d, (y[i] - y[i - 1]) / h);
  else m1 = harmonic_slope(d, (y[i + 2] - y[i + 1]) / h);
  return hermite(y[i], y[i + 1], m0, m1, h, t);
}

}  // namespace vshock
