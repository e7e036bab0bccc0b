#pragma once

#include <span>
#include <vector>

namespace causwave {

// Chebyshev series on [lo, hi]; evaluation outside the interval extrapolates
// the polynomial.
class ChebSeries {
 public:
  ChebSeries() = default;
  ChebSeries(double lo, double hi, std::vector<double> coeffs);

  /// Least-squares fit of the given degree.
  static ChebSeries fit(std::span<const double> u, std::span<const double> v, int degree, double lo,
                        double hi);

  double operator()(double u) const { return eval(coeffs_, u); }
  double deriv(double u) const { return eval(d1_, u) * scale_; }
  double deriv2(double u) const { return eval(d2_, u) * scale_ * scale_; }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<double>& coeffs() const { return coeffs_; }

 private:
  double eval(const std::vector<double>& c, double u) const;

  double lo_ = -1.0;
  double hi_ = 1.0;
  double scale_ = 1.0;  // dt/du
  std::vector<double> coeffs_;
  std::vector<double> d1_;
  std::vector<double> d2_;
};

}  // namespace causwave
