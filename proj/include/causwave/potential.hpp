#pragma once

#include "causwave/geometry.hpp"

namespace causwave {

/// Barbanis family U(x, y) = (wx^2 x^2 + wy^2 y^2) / 2 + lambda x^2 y.
/// lambda = 0 is the separable two-dimensional harmonic oscillator.
struct Model {
  double omega_x = 1.1;
  double omega_y = 1.0;
  double lambda = -0.11;
  double mass = 1.0;
  double hbar = 1.0;

  /// Throws InvalidArgument unless frequencies, mass and hbar are positive and finite.
  void validate() const;
  bool separable() const { return lambda == 0.0; }
  double max_omega() const { return omega_x > omega_y ? omega_x : omega_y; }
};

double eval_potential(const Model& model, const Point2& q);
Vec2 grad_potential(const Model& model, const Point2& q);
Sym2 hessian_potential(const Model& model, const Point2& q);

double kinetic_energy(const Model& model, const Vec2& p);
double hamiltonian(const Model& model, const PhaseState& s);

// Default bracketing radius: 10 max(sqrt(2E)/wx, sqrt(2E)/wy).
double default_search_radius(const Model& model, double energy);

/// First point t * direction (t > 0) on the equipotential U = E, refined to
/// |U - E| <= 1e-10 E. A non-positive radius selects the default.
/// Throws NoCrossing when U never reaches E along the ray inside the radius.
Point2 equipotential_point(const Model& model, double energy, Vec2 direction, double radius = 0.0);

/// Equipotential point on the ray of polar angle theta from the origin.
Point2 equipotential_point_at_angle(const Model& model, double energy, double theta);

}  // namespace causwave
