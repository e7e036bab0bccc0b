#pragma once

#include <array>
#include <string>
#include <vector>

#include "causwave/caustic.hpp"
#include "causwave/potential.hpp"

namespace causwave {

struct BoundaryTag {
  enum Kind { None, Caustic, Outer };
  Kind kind = None;
  int arc = -1;      // caustic arc for Kind::Caustic
  double u = 0.0;    // arc parameter
};

struct Mesh {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryTag> tags;              // one per vertex
  double h = 0.0;

  size_t size() const { return vertices.size(); }
  bool on_boundary(size_t i) const { return tags[i].kind != BoundaryTag::None; }
  double area() const;
  double min_signed_area() const;
  /// Signed area of triangle t (positive for counterclockwise).
  double triangle_area(size_t t) const;
};

struct Box {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
};

/// Structured triangulation of a rectangle, all boundary vertices tagged outer.
Mesh mesh_rectangle(const Box& box, double h);

/// Boundary nodes along each caustic arc, equally spaced in arc length.
/// Opposite arcs get the same count so the interior patch is structured.
struct CausticNodes {
  std::array<std::vector<double>, 4> u;  // from u_lo to u_hi
};
CausticNodes caustic_nodes(const Model& model, const Caustic& caustic, double h);

/// Transfinite (Coons) patch on the four caustic arcs, split into triangles.
/// Throws MeshingFailed on folded or self-intersecting input.
Mesh mesh_interior(const Model& model, const Caustic& caustic, double h);

/// Outer rectangle on whose edges U >= E + delta_factor * hbar * max(omega).
Box outer_box(const Model& model, const Caustic& caustic, double delta_factor = 5.0);

/// Four Coons patches between the caustic and the outer rectangle, joined by
/// straight connectors from each vertex to the box corner.
Mesh mesh_exterior(const Model& model, const Caustic& caustic, double h, const Box& box);

/// Union of two meshes sharing boundary vertices (matched by exact
/// position). Shared vertices keep the tag from `a`. map_b receives the index
/// in the union of every vertex of b.
Mesh merge_meshes(const Mesh& a, const Mesh& b, std::vector<int>* map_b = nullptr);

/// Point location on a bucket grid.
class MeshLocator {
 public:
  explicit MeshLocator(const Mesh& mesh);
  /// Triangle containing q and barycentric weights; tri = -1 when outside.
  struct Hit {
    int tri = -1;
    std::array<double, 3> w{0, 0, 0};
  };
  Hit locate(const Point2& q) const;
  /// Linear interpolation of vertex values; NaN outside.
  double interpolate(const std::vector<double>& values, const Point2& q) const;

 private:
  const Mesh* mesh_;
  double x0_ = 0, y0_ = 0, cell_ = 1;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

void write_mesh(const Mesh& mesh, const std::string& path);
Mesh read_mesh(const std::string& path);

}  // namespace causwave
