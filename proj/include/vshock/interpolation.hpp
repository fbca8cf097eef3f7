#pragma once

#include <span>
#include <vector>

namespace vshock {

/// Shape-preserving cubic Hermite interpolant on a uniform grid.
///
/// Node slopes come either from the Fritsch-Butland (PCHIP) rule or from
/// caller-supplied derivatives passed through the Fritsch-Carlson limiter, so
/// monotone data always yields a monotone interpolant. Outside the grid the
/// interpolant is extended by the end values.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(double x0, double h, std::vector<double> values);
  MonotoneCubic(double x0, double h, std::vector<double> values, std::span<const double> slopes);

  double operator()(double x) const;
  double derivative(double x) const;

  double x0() const noexcept { return x0_; }
  double spacing() const noexcept { return h_; }
  std::size_t size() const noexcept { return y_.size(); }
  const std::vector<double>& values() const noexcept { return y_; }
  const std::vector<double>& slopes() const noexcept { return m_; }

 private:
  double x0_ = 0.0;
  double h_ = 1.0;
  std::vector<double> y_;
  std::vector<double> m_;
};

/// PCHIP node slopes for uniformly spaced samples.
std::vector<double> pchip_slopes(std::span<const double> y, double h);

/// Applies the Fritsch-Carlson monotonicity limiter to candidate slopes in place.
void limit_monotone_slopes(std::span<const double> y, double h, std::span<double> m);

/// Evaluates the PCHIP interpolant of uniformly spaced samples at x without
/// building the full slope table. Only the four surrounding samples are read.
double pchip_eval(std::span<const double> y, double x0, double h, double x);

}  // namespace vshock
