#include "causwave/caustic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "causwave/errors.hpp"

namespace causwave {

Point2 CausticArc::point(double u) const {
  return axis == ArcAxis::X ? Point2{u, f(u)} : Point2{f(u), u};
}

Vec2 CausticArc::tangent(double u) const {
  const double d = f.deriv(u);
  return axis == ArcAxis::X ? Vec2{1.0, d} : Vec2{d, 1.0};
}

double arc_scale_factor(const CausticArc& arc, double u) {
  const double d = arc.f.deriv(u);
  return std::sqrt(1.0 + d * d);
}

double restrict_potential(const Model& model, const CausticArc& arc, double u) {
  return eval_potential(model, arc.point(u));
}

double arc_length(const CausticArc& arc, double a, double b) {
  if (a == b) return 0.0;
  auto g = [&](double u) { return arc_scale_factor(arc, u); };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, a, b, 8, 1e-13);
}

double arc_parameter(const CausticArc& arc, const Point2& q) {
  return arc.axis == ArcAxis::X ? q.x : q.y;
}

double tangency_angle_deg(const CausticArc& arc, const CausticPoint& p) {
  const Vec2 t = arc.tangent(arc_parameter(arc, p.position));
  const double pn = norm(p.momentum);
  if (pn == 0.0) return 0.0;
  const double c = std::abs(dot(t, p.momentum)) / (norm(t) * pn);
  return std::acos(std::min(1.0, c)) * 180.0 / std::numbers::pi;
}

ArcClusters cluster_arcs(std::span<const CausticPoint> points, double energy, const Model& model,
                         size_t min_points) {
  if (points.size() < min_points) {
    std::ostringstream os;
    os << "need at least " << min_points << " caustic points, got " << points.size();
    throw ClusterCountMismatch(os.str());
  }
  Point2 c{0, 0};
  for (const auto& p : points) c += p.position;
  c = c / static_cast<double>(points.size());

  ArcClusters out;
  for (const auto& p : points) {
    const bool horizontal = std::abs(p.momentum.x) >= std::abs(p.momentum.y);
    int k;
    if (horizontal)
      k = p.position.y >= c.y ? static_cast<int>(ArcSide::Upper) : static_cast<int>(ArcSide::Lower);
    else
      k = p.position.x >= c.x ? static_cast<int>(ArcSide::Right) : static_cast<int>(ArcSide::Left);
    CausticPoint q = p;
    q.arc_hint = k;
    out.clusters[static_cast<size_t>(k)].push_back(q);
  }
  const size_t min_cluster = std::max<size_t>(8, points.size() / 50);
  int populated = 0;
  for (const auto& cl : out.clusters)
    if (cl.size() >= min_cluster) ++populated;
  if (populated != 4) {
    std::ostringstream os;
    os << "expected 4 arcs, found " << populated << " well-populated clusters (sizes";
    for (const auto& cl : out.clusters) os << ' ' << cl.size();
    os << ")";
    throw ClusterCountMismatch(os.str());
  }

  // Vertex candidates: the point of the two adjacent clusters, in the matching
  // quadrant about the centroid, closest to the equipotential.
  const std::array<std::array<int, 2>, 4> corner_arcs = {{{0, 3}, {0, 1}, {2, 1}, {2, 3}}};
  const std::array<Vec2, 4> corner_sign = {{{-1, -1}, {-1, 1}, {1, 1}, {1, -1}}};
  for (int v = 0; v < 4; ++v) {
    double best = std::numeric_limits<double>::infinity();
    Point2 bp = c;
    for (int a : corner_arcs[static_cast<size_t>(v)]) {
      for (const auto& p : out.clusters[static_cast<size_t>(a)]) {
        const Vec2 d = p.position - c;
        if (d.x * corner_sign[static_cast<size_t>(v)].x < 0 || d.y * corner_sign[static_cast<size_t>(v)].y < 0) continue;
        const double gap = std::abs(energy - eval_potential(model, p.position));
        if (gap < best) {
          best = gap;
          bp = p.position;
        }
      }
    }
    if (!std::isfinite(best)) throw ClusterCountMismatch("no vertex candidate for corner " + std::to_string(v));
    out.vertex_estimates[static_cast<size_t>(v)] = bp;
  }
  return out;
}

CausticArc fit_arc_points(std::span<const Point2> cluster, const FitOptions& opts) {
  if (cluster.size() < 4) throw FitResidualExceeded("cluster too small to fit");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& p : cluster) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  CausticArc arc;
  arc.axis = (xmax - xmin) >= (ymax - ymin) ? ArcAxis::X : ArcAxis::Y;
  std::vector<double> u, v;
  u.reserve(cluster.size());
  v.reserve(cluster.size());
  for (const auto& p : cluster) {
    u.push_back(arc.axis == ArcAxis::X ? p.x : p.y);
    v.push_back(arc.axis == ArcAxis::X ? p.y : p.x);
  }
  const double lo = arc.axis == ArcAxis::X ? xmin : ymin;
  const double hi = arc.axis == ArcAxis::X ? xmax : ymax;
  if (!(hi > lo)) throw FitResidualExceeded("degenerate cluster extent");

  const int n = static_cast<int>(u.size());
  const int max_deg = std::min(opts.max_degree, n / 4);
  const int folds = std::max(2, opts.folds);
  std::vector<double> cv(static_cast<size_t>(max_deg + 1), std::numeric_limits<double>::infinity());
  for (int deg = opts.min_degree; deg <= max_deg; ++deg) {
    double sse = 0.0;
    int count = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<double> tu, tv;
      for (int i = 0; i < n; ++i)
        if (i % folds != f) {
          tu.push_back(u[static_cast<size_t>(i)]);
          tv.push_back(v[static_cast<size_t>(i)]);
        }
      if (static_cast<int>(tu.size()) <= deg) continue;
      const auto s = ChebSeries::fit(tu, tv, deg, lo, hi);
      for (int i = f; i < n; i += folds) {
        const double r = s(u[static_cast<size_t>(i)]) - v[static_cast<size_t>(i)];
        sse += r * r;
        ++count;
      }
    }
    if (count > 0) cv[static_cast<size_t>(deg)] = std::sqrt(sse / count);
  }
  const double best = *std::min_element(cv.begin(), cv.end());
  int chosen = max_deg;
  for (int deg = opts.min_degree; deg <= max_deg; ++deg)
    if (cv[static_cast<size_t>(deg)] <= 1.1 * best + 1e-12) {
      chosen = deg;
      break;
    }
  arc.f = ChebSeries::fit(u, v, chosen, lo, hi);
  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = arc.f(u[static_cast<size_t>(i)]) - v[static_cast<size_t>(i)];
    sse += r * r;
  }
  arc.fit_rms = std::sqrt(sse / n);
  arc.u_lo = lo;
  arc.u_hi = hi;
  if (!(arc.fit_rms <= opts.max_rms)) {
    std::ostringstream os;
    os << "fit RMS " << arc.fit_rms << " exceeds " << opts.max_rms << " at degree " << chosen;
    throw FitResidualExceeded(os.str());
  }
  return arc;
}

CausticArc fit_arc(std::span<const CausticPoint> cluster, const FitOptions& opts) {
  std::vector<Point2> pts;
  pts.reserve(cluster.size());
  for (const auto& p : cluster) pts.push_back(p.position);
  return fit_arc_points(pts, opts);
}

namespace {

// Parameter where the arc extension crosses U = E nearest to `u_guess`,
// searching from the arc interior outward.
double equipotential_crossing(const Model& model, const CausticArc& arc, double energy,
                              double u_inner, double u_guess) {
  auto f = [&](double u) { return restrict_potential(model, arc, u) - energy; };
  const double dir = u_guess >= u_inner ? 1.0 : -1.0;
  const double reach = std::abs(u_guess - u_inner) + arc.poly_extension();
  const int nsteps = 400;
  double a = u_inner;
  double fa = f(a);
  if (fa >= 0.0) throw FitResidualExceeded("arc interior lies outside the equipotential");
  for (int i = 1; i <= nsteps; ++i) {
    const double b = u_inner + dir * reach * i / nsteps;
    const double fb = f(b);
    if (fb >= 0.0) {
      double lo = a, hi = b;
      for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double m = 0.5 * (lo + hi);
        if (f(m) < 0.0) lo = m; else hi = m;
      }
      return 0.5 * (lo + hi);
    }
    a = b;
    fa = fb;
  }
  throw FitResidualExceeded("arc extension does not reach the equipotential");
}

}  // namespace

Caustic assemble_caustic(const ArcClusters& clusters, const Model& model, double energy,
                         const FitOptions& opts) {
  Caustic c;
  c.energy = energy;
  std::array<std::array<Point2, 2>, 4> crossing{};
  for (int k = 0; k < 4; ++k) {
    CausticArc arc = fit_arc(clusters.clusters[static_cast<size_t>(k)], opts);
    arc.k = k;
    // which of the two adjacent vertices sits at the low-parameter end
    const auto [va, vb] = kArcVertices[static_cast<size_t>(k)];
    const double ua = arc_parameter(arc, clusters.vertex_estimates[static_cast<size_t>(va)]);
    const double ub = arc_parameter(arc, clusters.vertex_estimates[static_cast<size_t>(vb)]);
    arc.vertex = ua <= ub ? std::array<int, 2>{va, vb} : std::array<int, 2>{vb, va};
    const double u_mid = 0.5 * (arc.u_lo + arc.u_hi);
    const double lo = equipotential_crossing(model, arc, energy, u_mid, std::min(ua, ub));
    const double hi = equipotential_crossing(model, arc, energy, u_mid, std::max(ua, ub));
    arc.u_lo = lo;
    arc.u_hi = hi;
    crossing[static_cast<size_t>(k)] = {arc.point(lo), arc.point(hi)};
    c.arcs[static_cast<size_t>(k)] = arc;
  }
  std::array<Point2, 4> sum{};
  std::array<int, 4> cnt{};
  std::array<std::vector<Point2>, 4> per_vertex;
  for (int k = 0; k < 4; ++k)
    for (int e = 0; e < 2; ++e) {
      const int v = c.arcs[static_cast<size_t>(k)].vertex[static_cast<size_t>(e)];
      sum[static_cast<size_t>(v)] += crossing[static_cast<size_t>(k)][static_cast<size_t>(e)];
      ++cnt[static_cast<size_t>(v)];
      per_vertex[static_cast<size_t>(v)].push_back(crossing[static_cast<size_t>(k)][static_cast<size_t>(e)]);
    }
  c.closure_gap = 0.0;
  for (int v = 0; v < 4; ++v) {
    if (cnt[static_cast<size_t>(v)] != 2) throw ClusterCountMismatch("vertex not shared by two arcs");
    c.vertices[static_cast<size_t>(v)] = sum[static_cast<size_t>(v)] / 2.0;
    c.closure_gap = std::max(c.closure_gap, norm(per_vertex[static_cast<size_t>(v)][0] -
                                                 per_vertex[static_cast<size_t>(v)][1]));
  }
  return orient_caustic(std::move(c), 0);
}

Caustic orient_caustic(Caustic c, int start) {
  if (start < 0 || start > 3) throw InvalidArgument("start vertex must be 0..3");
  c.start_vertex = start;
  const int opposite = (start + 2) % 4;
  int slot = 0;
  std::array<int, 4> first{-1, -1, -1, -1};  // arc leaving each vertex on the first leg
  // arcs leaving the start vertex
  for (int k = 0; k < 4; ++k) {
    auto& arc = c.arcs[static_cast<size_t>(k)];
    if (arc.vertex[0] == start || arc.vertex[1] == start) {
      arc.orientation = arc.vertex[0] == start ? +1 : -1;
      const int to = arc.vertex[0] == start ? arc.vertex[1] : arc.vertex[0];
      c.traversal[static_cast<size_t>(slot++)] = {k, start, to, -1};
      first[static_cast<size_t>(to)] = k;
    }
  }
  // arcs arriving at the opposite vertex
  for (int k = 0; k < 4; ++k) {
    auto& arc = c.arcs[static_cast<size_t>(k)];
    if (arc.vertex[0] == opposite || arc.vertex[1] == opposite) {
      arc.orientation = arc.vertex[1] == opposite ? +1 : -1;
      const int from = arc.vertex[1] == opposite ? arc.vertex[0] : arc.vertex[1];
      c.traversal[static_cast<size_t>(slot++)] = {k, from, opposite, first[static_cast<size_t>(from)]};
    }
  }
  if (slot != 4) throw InvalidArgument("caustic arcs do not form a closed quadrilateral");
  return c;
}

Caustic build_caustic(std::span<const CausticPoint> points, const Model& model, double energy,
                      int start_vertex, const FitOptions& opts) {
  const auto clusters = cluster_arcs(points, energy, model);
  return orient_caustic(assemble_caustic(clusters, model, energy, opts), start_vertex);
}

std::vector<Point2> Caustic::polygon(int per_arc) const {
  // counterclockwise: lower (v0 -> v3), right (v3 -> v2), upper (v2 -> v1), left (v1 -> v0)
  const std::array<std::array<int, 2>, 4> legs = {{{3, 0}, {2, 3}, {1, 2}, {0, 1}}};
  std::vector<Point2> poly;
  for (const auto& [k, from] : legs) {
    const auto& arc = arcs[static_cast<size_t>(k)];
    const bool fwd = arc.vertex[0] == from;
    for (int i = 0; i < per_arc; ++i) {
      const double s = static_cast<double>(i) / per_arc;
      const double u = fwd ? arc.u_lo + s * arc.span() : arc.u_hi - s * arc.span();
      poly.push_back(arc.point(u));
    }
  }
  return poly;
}

bool inside_caustic(const std::vector<Point2>& poly, const Point2& q) {
  bool in = false;
  for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y > q.y) != (b.y > q.y) && q.x < (b.x - a.x) * (q.y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

int nearest_vertex(const Caustic& c, const Point2& q) {
  int best = 0;
  for (int v = 1; v < 4; ++v)
    if (norm(c.vertices[static_cast<size_t>(v)] - q) < norm(c.vertices[static_cast<size_t>(best)] - q)) best = v;
  return best;
}

}  // namespace causwave
