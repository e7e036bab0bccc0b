#include "causwave/raster.hpp"

#include <cmath>
#include <limits>

#include "causwave/errors.hpp"

namespace causwave {

Raster Raster::make(double x0, double x1, double y0, double y1, int nx, int ny) {
  if (nx < 2 || ny < 2 || !(x1 > x0) || !(y1 > y0)) throw InvalidArgument("degenerate raster");
  Raster r;
  r.x0 = x0;
  r.x1 = x1;
  r.y0 = y0;
  r.y1 = y1;
  r.nx = nx;
  r.ny = ny;
  r.values.assign(static_cast<size_t>(nx) * ny, 0.0);
  return r;
}

double Raster::sample(const Point2& q) const {
  const double fx = (q.x - x0) / dx();
  const double fy = (q.y - y0) / dy();
  if (!(fx >= 0.0 && fy >= 0.0 && fx <= nx - 1 && fy <= ny - 1)) return std::numeric_limits<double>::quiet_NaN();
  const int i = std::min(static_cast<int>(fx), nx - 2);
  const int j = std::min(static_cast<int>(fy), ny - 2);
  const double tx = fx - i, ty = fy - j;
  return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) + (1 - tx) * ty * at(i, j + 1) +
         tx * ty * at(i + 1, j + 1);
}

void Raster::fill(const std::function<double(const Point2&)>& f) {
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) at(i, j) = f({x(i), y(j)});
}

}  // namespace causwave
