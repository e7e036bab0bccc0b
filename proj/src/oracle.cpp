#include "causwave/oracle.hpp"

#include <cmath>
#include <numbers>

#include "causwave/caustic.hpp"
#include "causwave/errors.hpp"

namespace causwave {

namespace {

// <a'| x^2 |a> in units where the oscillator length scale is applied by the caller
double x2_unit(int a1, int a) {
  if (a1 == a) return 2.0 * a + 1.0;
  if (a1 == a + 2) return std::sqrt((a + 1.0) * (a + 2.0));
  if (a1 == a - 2) return std::sqrt(a * (a - 1.0));
  return 0.0;
}

double x1_unit(int b1, int b) {
  if (b1 == b + 1) return std::sqrt(b + 1.0);
  if (b1 == b - 1) return std::sqrt(static_cast<double>(b));
  return 0.0;
}

}  // namespace

double x2y_element(const Model& m, int a1, int b1, int a, int b) {
  const double lx2 = m.hbar / (2.0 * m.mass * m.omega_x);
  const double ly = std::sqrt(m.hbar / (2.0 * m.mass * m.omega_y));
  return lx2 * x2_unit(a1, a) * ly * x1_unit(b1, b);
}

Spectrum diagonalize(const Model& model, int nx, int ny) {
  model.validate();
  if (nx < 1 || ny < 1) throw InvalidArgument("basis size must be positive");
  const int n = nx * ny;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < nx; ++a)
    for (int b = 0; b < ny; ++b) {
      const int i = a * ny + b;
      h(i, i) = model.hbar * (model.omega_x * (a + 0.5) + model.omega_y * (b + 0.5));
      if (model.lambda == 0.0) continue;
      for (int a1 = a - 2; a1 <= a + 2; a1 += 2)
        for (int b1 = b - 1; b1 <= b + 1; b1 += 2) {
          if (a1 < 0 || a1 >= nx || b1 < 0 || b1 >= ny) continue;
          h(a1 * ny + b1, i) += model.lambda * x2y_element(model, a1, b1, a, b);
        }
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw InvalidArgument("eigen-decomposition failed");
  Spectrum s;
  s.model = model;
  s.nx = nx;
  s.ny = ny;
  s.energies = es.eigenvalues();
  s.vectors = es.eigenvectors();
  return s;
}

std::array<int, 2> Spectrum::dominant(int k) const {
  Eigen::Index idx = 0;
  vectors.col(k).cwiseAbs().maxCoeff(&idx);
  return {static_cast<int>(idx) / ny, static_cast<int>(idx) % ny};
}

double Spectrum::dominant_weight(int k) const {
  const double c = vectors.col(k).cwiseAbs().maxCoeff();
  return c * c;
}

int Spectrum::find_state(int n1, int n2) const {
  for (int k = 0; k < energies.size(); ++k) {
    const auto d = dominant(k);
    if (d[0] == n1 && d[1] == n2) return k;
  }
  return -1;
}

std::vector<double> hermite_functions(int nmax, double x, double mass, double omega, double hbar) {
  const double alpha = std::sqrt(mass * omega / hbar);
  const double xi = alpha * x;
  std::vector<double> phi(static_cast<size_t>(nmax + 1));
  phi[0] = std::sqrt(alpha) * std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi);
  if (nmax >= 1) phi[1] = std::sqrt(2.0) * xi * phi[0];
  for (int n = 1; n < nmax; ++n)
    phi[static_cast<size_t>(n + 1)] =
        std::sqrt(2.0 / (n + 1)) * xi * phi[static_cast<size_t>(n)] - std::sqrt(n / (n + 1.0)) * phi[static_cast<size_t>(n - 1)];
  return phi;
}

Raster oracle_wavefunction(const Spectrum& s, int k, double x0, double x1, double y0, double y1, int nx, int ny) {
  if (k < 0 || k >= s.energies.size()) throw InvalidArgument("state index out of range");
  Raster r = Raster::make(x0, x1, y0, y1, nx, ny);
  const Model& m = s.model;
  std::vector<std::vector<double>> hx(static_cast<size_t>(nx)), hy(static_cast<size_t>(ny));
  for (int i = 0; i < nx; ++i) hx[static_cast<size_t>(i)] = hermite_functions(s.nx - 1, r.x(i), m.mass, m.omega_x, m.hbar);
  for (int j = 0; j < ny; ++j) hy[static_cast<size_t>(j)] = hermite_functions(s.ny - 1, r.y(j), m.mass, m.omega_y, m.hbar);
  // psi(x, y) = sum_a phi_a(x) sum_b c_ab phi_b(y)
  const Eigen::Map<const Eigen::MatrixXd> c(s.vectors.col(k).data(), s.ny, s.nx);  // c(b, a)
  for (int j = 0; j < ny; ++j) {
    const Eigen::Map<const Eigen::VectorXd> py(hy[static_cast<size_t>(j)].data(), s.ny);
    const Eigen::VectorXd t = c.transpose() * py;  // per a
    for (int i = 0; i < nx; ++i) {
      const Eigen::Map<const Eigen::VectorXd> px(hx[static_cast<size_t>(i)].data(), s.nx);
      r.at(i, j) = px.dot(t);
    }
  }
  return r;
}

Comparison compare_fields(const Sampler& a, const Sampler& b, const Region& region) {
  Raster grid = Raster::make(region.x0, region.x1, region.y0, region.y1, region.nx, region.ny);
  std::vector<double> va, vb;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const Point2 q{grid.x(i), grid.y(j)};
      if (!region.polygon.empty() && !inside_caustic(region.polygon, q)) continue;
      const double fa = a(q), fb = b(q);
      if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
      va.push_back(fa);
      vb.push_back(fb);
    }
  if (va.empty()) throw EmptyOverlap("fields share no sample points in the region");
  const Eigen::Map<Eigen::VectorXd> ea(va.data(), static_cast<Eigen::Index>(va.size()));
  const Eigen::Map<Eigen::VectorXd> eb(vb.data(), static_cast<Eigen::Index>(vb.size()));
  const double na = ea.norm(), nb = eb.norm();
  Comparison out;
  out.samples = va.size();
  if (na == 0.0 && nb == 0.0) return out;
  if (na == 0.0 || nb == 0.0) {
    out.rel_l2 = 1.0;
    return out;
  }
  Eigen::Index imax = 0;
  ea.cwiseAbs().maxCoeff(&imax);
  out.sign = (ea[imax] * eb[imax] < 0.0) ? -1 : 1;
  out.rel_l2 = (ea / na - out.sign * eb / nb).norm();
  return out;
}

}  // namespace causwave
