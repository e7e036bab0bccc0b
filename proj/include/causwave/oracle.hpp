#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "causwave/potential.hpp"
#include "causwave/raster.hpp"

namespace causwave {

/// Eigenpairs of the Hamiltonian in the harmonic product basis |a>|b>,
/// flattened as a * ny + b.
struct Spectrum {
  Model model;
  int nx = 0, ny = 0;
  Eigen::VectorXd energies;   // ascending
  Eigen::MatrixXd vectors;    // columns are states

  /// Basis quantum numbers (a, b) with the largest |coefficient| in state k.
  std::array<int, 2> dominant(int k) const;
  double dominant_weight(int k) const;
  /// Lowest state whose dominant basis function is (n1, n2); -1 if none.
  int find_state(int n1, int n2) const;
};

Spectrum diagonalize(const Model& model, int nx, int ny);

/// Normalized harmonic-oscillator eigenfunctions phi_0..phi_{nmax} at x.
std::vector<double> hermite_functions(int nmax, double x, double mass, double omega, double hbar);

/// Analytic product-basis matrix element <a' b'| x^2 y |a b>.
double x2y_element(const Model& model, int a1, int b1, int a, int b);

/// psi_k on a raster.
Raster oracle_wavefunction(const Spectrum& s, int k, double x0, double x1, double y0, double y1, int nx, int ny);

/// Region for field comparison: a box sampled nx by ny, optionally masked
/// by a closed polygon.
struct Region {
  double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
  int nx = 201, ny = 201;
  std::vector<Point2> polygon;
};

struct Comparison {
  double rel_l2 = 0.0;
  int sign = 1;          // applied to b
  size_t samples = 0;
};

using Sampler = std::function<double(const Point2&)>;

/// Resamples both fields on the region raster, normalizes each to unit
/// discrete L2, aligns the sign of b at the max-|a| point and returns the
/// relative L2 distance. Throws EmptyOverlap.
Comparison compare_fields(const Sampler& a, const Sampler& b, const Region& region);

}  // namespace causwave
