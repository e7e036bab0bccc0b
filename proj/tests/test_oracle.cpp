#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "causwave/errors.hpp"
#include "causwave/oracle.hpp"
#include "fixtures.hpp"

using namespace causwave;

namespace {

const Spectrum& barbanis_spectrum() {
  static const Spectrum s = diagonalize(fx::barbanis(), 30, 30);
  return s;
}

// unit-norm oscillator states from the unnormalized shapes
double ho_normed(int n, double x, double omega) {
  const double c = std::pow(omega / std::numbers::pi, 0.25);
  const double k[] = {1.0, std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  return c * k[n] * fx::ho(n, x, omega);
}

int raster_lobes(const Raster& r) {
  double mx = 0;
  for (double v : r.values) mx = std::max(mx, std::abs(v));
  int count = 0;
  for (int j = 1; j < r.ny - 1; ++j)
    for (int i = 1; i < r.nx - 1; ++i) {
      const double v = r.at(i, j);
      if (std::abs(v) < 0.2 * mx) continue;
      bool peak = true;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di)
          if ((di || dj) && (v > 0 ? r.at(i + di, j + dj) > v : r.at(i + di, j + dj) < v)) peak = false;
      if (peak) ++count;
    }
  return count;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("Hermite functions match the closed forms") {
    for (double x : {-2.3, -0.4, 0.0, 1.7}) {
      const auto h = hermite_functions(2, x, 1.0, 1.1, 1.0);
      for (int n = 0; n <= 2; ++n) CHECK(h[static_cast<size_t>(n)] == doctest::Approx(ho_normed(n, x, 1.1)).epsilon(1e-12));
    }
  }

  TEST_CASE("x^2 y elements match quadrature") {
    const Model m = fx::barbanis();
    // Gauss-Hermite-free check: trapezoid on a wide grid is spectrally accurate here
    auto quad = [&](int a1, int b1, int a, int b) {
      double sx = 0, sy = 0;
      const int n = 4000;
      const double L = 12, d = 2 * L / n;
      for (int k = 0; k <= n; ++k) {
        const double t = -L + d * k;
        const auto hx = hermite_functions(4, t, 1.0, m.omega_x, 1.0);
        const auto hy = hermite_functions(4, t, 1.0, m.omega_y, 1.0);
        sx += hx[static_cast<size_t>(a1)] * t * t * hx[static_cast<size_t>(a)] * d;
        sy += hy[static_cast<size_t>(b1)] * t * hy[static_cast<size_t>(b)] * d;
      }
      return sx * sy;
    };
    for (auto [a1, b1, a, b] : {std::array{2, 1, 0, 0}, std::array{0, 2, 2, 1}, std::array{4, 3, 2, 2}, std::array{1, 1, 1, 0}})
      CHECK(x2y_element(m, a1, b1, a, b) == doctest::Approx(quad(a1, b1, a, b)).epsilon(1e-9));
    CHECK(x2y_element(m, 1, 0, 0, 1) == 0.0);
  }

  TEST_CASE("separable spectrum is exact") {
    const Spectrum s = diagonalize(fx::separable(), 12, 12);
    std::vector<double> exact;
    for (int a = 0; a < 12; ++a)
      for (int b = 0; b < 12; ++b) exact.push_back(1.1 * (a + 0.5) + (b + 0.5));
    std::sort(exact.begin(), exact.end());
    for (int k = 0; k < 20; ++k) CHECK(s.energies[k] == doctest::Approx(exact[static_cast<size_t>(k)]).epsilon(1e-12));
    const int k = s.find_state(2, 2);
    REQUIRE(k >= 0);
    CHECK(s.energies[k] == doctest::Approx(5.25).epsilon(1e-12));
  }

  TEST_CASE("separable ground state is the Gaussian") {
    const Spectrum s = diagonalize(fx::separable(), 8, 8);
    const Raster r = oracle_wavefunction(s, 0, -3, 3, -3, 3, 31, 31);
    double err = 0;
    for (int j = 0; j < r.ny; ++j)
      for (int i = 0; i < r.nx; ++i)
        err = std::max(err, std::abs(std::abs(r.at(i, j)) - ho_normed(0, r.x(i), 1.1) * ho_normed(0, r.y(j), 1.0)));
    CHECK(err <= 1e-10);
  }

  TEST_CASE("Barbanis (2,2) level") {
    const Spectrum& s = barbanis_spectrum();
    const int k = s.find_state(2, 2);
    REQUIRE(k >= 0);
    CHECK(s.energies[k] == doctest::Approx(5.18266).epsilon(1e-3 / 5.18266));
    CHECK(s.dominant(k) == std::array{2, 2});
    // basis convergence
    const Spectrum big = diagonalize(fx::barbanis(), 40, 40);
    CHECK(big.energies[k] == doctest::Approx(s.energies[k]).epsilon(1e-8));
  }

  TEST_CASE("spectrum is invariant under lambda -> -lambda") {
    Model m = fx::barbanis();
    m.lambda = -m.lambda;
    const Spectrum a = diagonalize(m, 20, 20);
    const Spectrum b = diagonalize(fx::barbanis(), 20, 20);
    for (int k = 0; k < 30; ++k) CHECK(a.energies[k] == doctest::Approx(b.energies[k]).epsilon(1e-10));
  }

  TEST_CASE("Barbanis (2,2) state has nine lobes") {
    const Spectrum& s = barbanis_spectrum();
    const Raster r = oracle_wavefunction(s, s.find_state(2, 2), -4, 4, -4, 4, 121, 121);
    CHECK(raster_lobes(r) == 9);
  }

  TEST_CASE("field comparison") {
    const Region reg{-2, 2, -2, 2, 81, 81, {}};
    const Sampler f = [](const Point2& q) { return std::exp(-q.x * q.x) * (q.y + 0.3); };
    const Comparison same = compare_fields(f, f, reg);
    CHECK(same.rel_l2 == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(same.sign == 1);
    const Comparison flipped = compare_fields(f, [&](const Point2& q) { return -3.0 * f(q); }, reg);
    CHECK(flipped.rel_l2 <= 1e-14);
    CHECK(flipped.sign == -1);
    const Sampler nan = [](const Point2&) { return std::nan(""); };
    CHECK_THROWS_AS(compare_fields(f, nan, reg), EmptyOverlap);
    Region masked = reg;
    masked.polygon = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    CHECK(compare_fields(f, f, masked).samples < same.samples);
  }
}
