#pragma once

#include <array>
#include <span>
#include <vector>

#include "causwave/chebyshev.hpp"
#include "causwave/dynamics.hpp"
#include "causwave/geometry.hpp"
#include "causwave/potential.hpp"

namespace causwave {

// Arc and vertex labelling used throughout:
//   vertices 0 lower-left, 1 upper-left, 2 upper-right, 3 lower-right
//   arcs     0 left (v0-v1), 1 upper (v1-v2), 2 right (v2-v3), 3 lower (v3-v0)
enum class ArcSide { Left = 0, Upper = 1, Right = 2, Lower = 3 };
constexpr std::array<std::array<int, 2>, 4> kArcVertices = {{{0, 1}, {1, 2}, {3, 2}, {0, 3}}};

enum class ArcAxis {
  X,  // y = f(x)
  Y,  // x = f(y)
};

struct CausticArc {
  int k = 0;                 // 0..3, see ArcSide
  ArcAxis axis = ArcAxis::X;
  ChebSeries f;
  double u_lo = 0.0;         // span in the parameter, u_lo < u_hi
  double u_hi = 0.0;
  std::array<int, 2> vertex{0, 0};  // vertex at u_lo, vertex at u_hi
  int orientation = +1;      // +1: traversed with increasing u
  double fit_rms = 0.0;

  Point2 point(double u) const;
  Vec2 tangent(double u) const;  // d point / du
  double f_prime(double u) const { return f.deriv(u); }
  /// Parameter of the start / end of the arc in traversal order.
  double u_start() const { return orientation > 0 ? u_lo : u_hi; }
  double u_end() const { return orientation > 0 ? u_hi : u_lo; }
  double span() const { return u_hi - u_lo; }
  /// Continuation limit: the fitted polynomial is trusted up to 30% of the span beyond each end.
  double poly_extension() const { return 0.3 * span(); }
};

struct TraversalStep {
  int arc = 0;
  int from_vertex = 0;
  int to_vertex = 0;
  int predecessor = -1;  // arc whose final action seeds this one, -1 for arcs leaving the start
};

struct Caustic {
  std::array<CausticArc, 4> arcs;
  std::array<Point2, 4> vertices;
  double energy = 0.0;
  int start_vertex = 0;
  std::array<TraversalStep, 4> traversal;

  /// Closed boundary polygon (counterclockwise) sampled with about n points per arc.
  std::vector<Point2> polygon(int per_arc = 200) const;
  /// Max distance between the two fitted-arc crossings meeting at each vertex.
  double closure_gap = 0.0;
};

struct ArcClusters {
  std::array<std::vector<CausticPoint>, 4> clusters;
  std::array<Point2, 4> vertex_estimates;
};

/// Splits caustic touch points into the four arcs. The tangent direction
/// (momentum) separates upper/lower from lateral arcs and the side relative
/// to the centroid separates the pair. Throws ClusterCountMismatch when fewer
/// than four well-populated clusters emerge.
ArcClusters cluster_arcs(std::span<const CausticPoint> points, double energy, const Model& model,
                         size_t min_points = 200);

struct FitOptions {
  int min_degree = 0;
  int max_degree = 32;
  int folds = 5;
  double max_rms = 1e-3;
};

/// Cross-validated least-squares Chebyshev fit; the parameter axis follows the
/// longer extent of the cluster. Span is the cluster extent until vertices are
/// refined by assemble_caustic. Throws FitResidualExceeded.
CausticArc fit_arc(std::span<const CausticPoint> cluster, const FitOptions& opts = {});
CausticArc fit_arc_points(std::span<const Point2> cluster, const FitOptions& opts = {});

/// g(u) = sqrt(1 + f'(u)^2).
double arc_scale_factor(const CausticArc& arc, double u);

/// U restricted to the arc, U(u, f(u)) or U(f(u), u).
double restrict_potential(const Model& model, const CausticArc& arc, double u);

/// Arc length between parameters a and b (signed).
double arc_length(const CausticArc& arc, double a, double b);

/// Fits the four arcs, refines the vertices by intersecting each arc's
/// extension with U = E, and closes the caustic.
Caustic assemble_caustic(const ArcClusters& clusters, const Model& model, double energy,
                         const FitOptions& opts = {});

/// Orients arcs away from `start_vertex` and records the action traversal.
Caustic orient_caustic(Caustic caustic, int start_vertex);

/// Full chain from touch points: cluster, fit, close, orient.
Caustic build_caustic(std::span<const CausticPoint> points, const Model& model, double energy,
                      int start_vertex, const FitOptions& opts = {});

/// Angle between the touch momentum and the fitted arc tangent, in degrees.
double tangency_angle_deg(const CausticArc& arc, const CausticPoint& p);

/// Parameter u of point q along the arc axis.
double arc_parameter(const CausticArc& arc, const Point2& q);

/// Point-in-polygon test against the closed caustic.
bool inside_caustic(const std::vector<Point2>& polygon, const Point2& q);

/// Vertex index nearest to a point.
int nearest_vertex(const Caustic& caustic, const Point2& q);

}  // namespace causwave
