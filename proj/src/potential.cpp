#include "causwave/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "causwave/errors.hpp"

namespace causwave {

void Model::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(omega_x) || !positive(omega_y) || !positive(mass) || !positive(hbar) ||
      !std::isfinite(lambda)) {
    std::ostringstream os;
    os << "model requires positive finite omega_x, omega_y, mass, hbar (got " << omega_x << ", "
       << omega_y << ", " << mass << ", " << hbar << ")";
    throw InvalidArgument(os.str());
  }
}

double eval_potential(const Model& m, const Point2& q) {
  const double x2 = q.x * q.x;
  return 0.5 * (m.omega_x * m.omega_x * x2 + m.omega_y * m.omega_y * q.y * q.y) + m.lambda * x2 * q.y;
}

Vec2 grad_potential(const Model& m, const Point2& q) {
  return {m.omega_x * m.omega_x * q.x + 2.0 * m.lambda * q.x * q.y,
          m.omega_y * m.omega_y * q.y + m.lambda * q.x * q.x};
}

Sym2 hessian_potential(const Model& m, const Point2& q) {
  return {m.omega_x * m.omega_x + 2.0 * m.lambda * q.y, 2.0 * m.lambda * q.x, m.omega_y * m.omega_y};
}

double kinetic_energy(const Model& m, const Vec2& p) { return dot(p, p) / (2.0 * m.mass); }

double hamiltonian(const Model& m, const PhaseState& s) {
  return kinetic_energy(m, s.p) + eval_potential(m, s.q);
}

double default_search_radius(const Model& m, double energy) {
  const double a = std::sqrt(2.0 * energy);
  return 10.0 * std::max(a / m.omega_x, a / m.omega_y);
}

Point2 equipotential_point(const Model& m, double energy, Vec2 direction, double radius) {
  if (!(energy > 0.0)) throw InvalidArgument("equipotential_point needs E > 0");
  const double len = norm(direction);
  if (!(len > 0.0)) throw InvalidArgument("equipotential_point needs a nonzero direction");
  direction = direction / len;
  if (radius <= 0.0) radius = default_search_radius(m, energy);

  auto f = [&](double t) { return eval_potential(m, direction * t) - energy; };

  // March outward until the first sign change; the step is small against the
  // scale of the quadratic well so a cubic-induced turn-over cannot be skipped.
  const double step = std::min(radius, std::sqrt(2.0 * energy) / m.max_omega()) / 64.0;
  double lo = 0.0;
  double flo = f(lo);
  double hi = lo;
  bool found = false;
  while (hi < radius) {
    hi = std::min(radius, lo + step);
    const double fhi = f(hi);
    if (fhi >= 0.0) {
      found = true;
      break;
    }
    lo = hi;
    flo = fhi;
  }
  if (!found) {
    std::ostringstream os;
    os << "U never reaches E = " << energy << " along direction (" << direction.x << ", "
       << direction.y << ") within radius " << radius;
    throw NoCrossing(os.str());
  }
  (void)flo;

  // Safeguarded Newton inside the bracket.
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double ft = f(t);
    if (std::abs(ft) <= 1e-13 * energy) break;
    if (ft < 0.0) lo = t; else hi = t;
    const double dft = dot(grad_potential(m, direction * t), direction);
    double next = dft != 0.0 ? t - ft / dft : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-16 * std::max(1.0, t)) {
      t = next;
      break;
    }
    t = next;
  }
  return direction * t;
}

Point2 equipotential_point_at_angle(const Model& m, double energy, double theta) {
  return equipotential_point(m, energy, {std::cos(theta), std::sin(theta)});
}

}  // namespace causwave
