#pragma once

#include <functional>
#include <vector>

#include "causwave/geometry.hpp"

namespace causwave {

/// Regular grid of values over [x0, x1] x [y0, y1], row-major in y (index
/// j * nx + i). NaN marks points outside a field's domain.
struct Raster {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  int nx = 2, ny = 2;
  std::vector<double> values;

  static Raster make(double x0, double x1, double y0, double y1, int nx, int ny);
  double x(int i) const { return x0 + (x1 - x0) * i / (nx - 1); }
  double y(int j) const { return y0 + (y1 - y0) * j / (ny - 1); }
  double dx() const { return (x1 - x0) / (nx - 1); }
  double dy() const { return (y1 - y0) / (ny - 1); }
  double& at(int i, int j) { return values[static_cast<size_t>(j) * nx + i]; }
  double at(int i, int j) const { return values[static_cast<size_t>(j) * nx + i]; }
  /// Bilinear interpolation; NaN outside the box or next to a NaN node.
  double sample(const Point2& q) const;
  void fill(const std::function<double(const Point2&)>& f);
};

}  // namespace causwave
