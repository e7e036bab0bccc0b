#include "causwave/chebyshev.hpp"

#include <Eigen/Dense>

#include "causwave/errors.hpp"

namespace causwave {

namespace {

std::vector<double> derivative_coeffs(const std::vector<double>& c) {
  const int n = static_cast<int>(c.size());
  if (n <= 1) return {0.0};
  std::vector<double> d(static_cast<size_t>(n - 1), 0.0);
  // c'_{k-1} = c'_{k+1} + 2 k c_k
  for (int k = n - 1; k >= 1; --k) {
    const double next = (k + 1 <= n - 2) ? d[static_cast<size_t>(k + 1)] : 0.0;
    d[static_cast<size_t>(k - 1)] = next + 2.0 * k * c[static_cast<size_t>(k)];
  }
  d[0] *= 0.5;
  return d;
}

}  // namespace

ChebSeries::ChebSeries(double lo, double hi, std::vector<double> coeffs)
    : lo_(lo), hi_(hi), scale_(2.0 / (hi - lo)), coeffs_(std::move(coeffs)) {
  if (!(hi > lo)) throw InvalidArgument("ChebSeries needs hi > lo");
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  d1_ = derivative_coeffs(coeffs_);
  d2_ = derivative_coeffs(d1_);
}

double ChebSeries::eval(const std::vector<double>& c, double u) const {
  const double t = (2.0 * u - lo_ - hi_) / (hi_ - lo_);
  double b1 = 0.0;
  double b2 = 0.0;
  for (size_t k = c.size(); k-- > 1;) {
    const double b0 = 2.0 * t * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + c[0];
}

ChebSeries ChebSeries::fit(std::span<const double> u, std::span<const double> v, int degree,
                           double lo, double hi) {
  if (u.size() != v.size() || u.size() < static_cast<size_t>(degree + 1))
    throw InvalidArgument("ChebSeries::fit needs at least degree + 1 samples");
  const auto n = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd a(n, degree + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = (2.0 * u[static_cast<size_t>(i)] - lo - hi) / (hi - lo);
    double tkm1 = 1.0;
    double tk = t;
    a(i, 0) = 1.0;
    if (degree >= 1) a(i, 1) = t;
    for (int k = 2; k <= degree; ++k) {
      const double tkp1 = 2.0 * t * tk - tkm1;
      a(i, k) = tkp1;
      tkm1 = tk;
      tk = tkp1;
    }
    b(i) = v[static_cast<size_t>(i)];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  return ChebSeries(lo, hi, std::vector<double>(c.data(), c.data() + c.size()));
}

}  // namespace causwave
