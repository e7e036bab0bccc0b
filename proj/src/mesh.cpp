#include "causwave/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "causwave/arc1d.hpp"
#include "causwave/errors.hpp"

namespace causwave {

double Mesh::triangle_area(size_t t) const {
  const auto& tr = triangles[t];
  const Point2& a = vertices[static_cast<size_t>(tr[0])];
  const Point2& b = vertices[static_cast<size_t>(tr[1])];
  const Point2& c = vertices[static_cast<size_t>(tr[2])];
  return 0.5 * cross(b - a, c - a);
}

double Mesh::area() const {
  double s = 0.0;
  for (size_t t = 0; t < triangles.size(); ++t) s += triangle_area(t);
  return s;
}

double Mesh::min_signed_area() const {
  double m = std::numeric_limits<double>::infinity();
  for (size_t t = 0; t < triangles.size(); ++t) m = std::min(m, triangle_area(t));
  return m;
}

namespace {

// Discrete Coons patch: bottom/top have N+1 nodes, left/right M+1; corners
// shared. Returns (N+1)*(M+1) points, index j*(N+1)+i.
std::vector<Point2> coons(const std::vector<Point2>& B, const std::vector<Point2>& T, const std::vector<Point2>& L,
                          const std::vector<Point2>& R) {
  const size_t n = B.size() - 1, m = L.size() - 1;
  std::vector<Point2> P((n + 1) * (m + 1));
  for (size_t j = 0; j <= m; ++j) {
    const double eta = static_cast<double>(j) / static_cast<double>(m);
    for (size_t i = 0; i <= n; ++i) {
      const double xi = static_cast<double>(i) / static_cast<double>(n);
      Point2 p = (1 - eta) * B[i] + eta * T[i] + (1 - xi) * L[j] + xi * R[j] -
                 ((1 - xi) * (1 - eta) * B[0] + xi * (1 - eta) * B[n] + (1 - xi) * eta * T[0] + xi * eta * T[n]);
      if (j == 0) p = B[i];
      if (j == m) p = T[i];
      if (i == 0) p = L[j];
      if (i == n) p = R[j];
      P[j * (n + 1) + i] = p;
    }
  }
  return P;
}

void triangulate_grid(Mesh& mesh, const std::vector<int>& idx, size_t n, size_t m) {
  auto id = [&](size_t i, size_t j) { return idx[j * (n + 1) + i]; };
  auto add = [&](int a, int b, int c) {
    const Point2& pa = mesh.vertices[static_cast<size_t>(a)];
    const Point2& pb = mesh.vertices[static_cast<size_t>(b)];
    const Point2& pc = mesh.vertices[static_cast<size_t>(c)];
    if (cross(pb - pa, pc - pa) < 0.0) std::swap(b, c);
    mesh.triangles.push_back({a, b, c});
  };
  for (size_t j = 0; j < m; ++j)
    for (size_t i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      const double d1 = norm(mesh.vertices[static_cast<size_t>(a)] - mesh.vertices[static_cast<size_t>(c)]);
      const double d2 = norm(mesh.vertices[static_cast<size_t>(b)] - mesh.vertices[static_cast<size_t>(d)]);
      if (d1 <= d2) {
        add(a, b, c);
        add(a, c, d);
      } else {
        add(a, b, d);
        add(b, c, d);
      }
    }
}

// Orientation-independent check that a patch did not fold: the signed
// areas of all triangles must share a sign before reorientation.
void check_patch(const std::vector<Point2>& P, size_t n, size_t m, const char* what) {
  int pos = 0, neg = 0;
  for (size_t j = 0; j < m; ++j)
    for (size_t i = 0; i < n; ++i) {
      const Point2& a = P[j * (n + 1) + i];
      const Point2& b = P[j * (n + 1) + i + 1];
      const Point2& c = P[(j + 1) * (n + 1) + i + 1];
      const Point2& d = P[(j + 1) * (n + 1) + i];
      for (double ar : {cross(b - a, c - a), cross(c - a, d - a), cross(b - a, d - a), cross(c - b, d - b)}) {
        if (ar > 0) ++pos;
        else if (ar < 0) ++neg;
        else ++neg, ++pos;
      }
    }
  if (pos > 0 && neg > 0) throw MeshingFailed(std::string(what) + " patch folds over itself");
}

// Appends a patch; returns the vertex indices.
std::vector<int> add_patch(Mesh& mesh, const std::vector<Point2>& P, const std::vector<BoundaryTag>& tags,
                           std::map<std::pair<double, double>, int>& seen) {
  std::vector<int> idx(P.size());
  for (size_t k = 0; k < P.size(); ++k) {
    const auto key = std::make_pair(P[k].x, P[k].y);
    auto it = seen.find(key);
    if (it != seen.end()) {
      idx[k] = it->second;
      continue;
    }
    idx[k] = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(P[k]);
    mesh.tags.push_back(tags[k]);
    seen.emplace(key, idx[k]);
  }
  return idx;
}

std::vector<Point2> line(const Point2& a, const Point2& b, size_t n) {
  std::vector<Point2> out(n + 1);
  for (size_t i = 0; i <= n; ++i) out[i] = a + (static_cast<double>(i) / static_cast<double>(n)) * (b - a);
  return out;
}

// Points of arc k from vertex `from` to the other end, with exact vertex
// coordinates at the ends, plus their tags.
struct Side {
  std::vector<Point2> pts;
  std::vector<BoundaryTag> tags;
};

Side arc_side(const Caustic& c, const CausticNodes& nodes, int k, int from) {
  const CausticArc& arc = c.arcs[static_cast<size_t>(k)];
  std::vector<double> u = nodes.u[static_cast<size_t>(k)];
  int v_start = arc.vertex[0], v_end = arc.vertex[1];
  if (from != arc.vertex[0]) {
    std::reverse(u.begin(), u.end());
    std::swap(v_start, v_end);
  }
  Side s;
  for (size_t i = 0; i < u.size(); ++i) {
    Point2 p = arc.point(u[i]);
    if (i == 0) p = c.vertices[static_cast<size_t>(v_start)];
    if (i + 1 == u.size()) p = c.vertices[static_cast<size_t>(v_end)];
    s.pts.push_back(p);
    s.tags.push_back({BoundaryTag::Caustic, k, u[i]});
  }
  return s;
}

}  // namespace

Mesh mesh_rectangle(const Box& box, double h) {
  if (!(h > 0.0) || !(box.x1 > box.x0) || !(box.y1 > box.y0)) throw InvalidArgument("bad rectangle or h");
  const auto n = static_cast<size_t>(std::max(1.0, std::ceil((box.x1 - box.x0) / h - 1e-9)));
  const auto m = static_cast<size_t>(std::max(1.0, std::ceil((box.y1 - box.y0) / h - 1e-9)));
  Mesh mesh;
  mesh.h = h;
  std::vector<int> idx;
  for (size_t j = 0; j <= m; ++j)
    for (size_t i = 0; i <= n; ++i) {
      idx.push_back(static_cast<int>(mesh.vertices.size()));
      mesh.vertices.push_back({box.x0 + (box.x1 - box.x0) * static_cast<double>(i) / static_cast<double>(n),
                               box.y0 + (box.y1 - box.y0) * static_cast<double>(j) / static_cast<double>(m)});
      const bool b = i == 0 || j == 0 || i == n || j == m;
      mesh.tags.push_back({b ? BoundaryTag::Outer : BoundaryTag::None, -1, 0.0});
    }
  triangulate_grid(mesh, idx, n, m);
  return mesh;
}

CausticNodes caustic_nodes(const Model& model, const Caustic& caustic, double h) {
  if (!(h > 0.0)) throw InvalidArgument("mesh size must be positive");
  std::array<std::unique_ptr<ArcPath>, 4> paths;
  for (int k = 0; k < 4; ++k) paths[static_cast<size_t>(k)] = std::make_unique<ArcPath>(model, caustic.arcs[static_cast<size_t>(k)]);
  auto count = [&](int a, int b) {
    const double l = std::max(paths[static_cast<size_t>(a)]->length(), paths[static_cast<size_t>(b)]->length());
    return static_cast<size_t>(std::max(2.0, std::ceil(l / h)));
  };
  const size_t n_h = count(1, 3), n_v = count(0, 2);
  CausticNodes out;
  for (int k = 0; k < 4; ++k) {
    const size_t n = (k == 1 || k == 3) ? n_h : n_v;
    const ArcPath& p = *paths[static_cast<size_t>(k)];
    auto& u = out.u[static_cast<size_t>(k)];
    u.resize(n + 1);
    for (size_t i = 0; i <= n; ++i) u[i] = p.u_of_s(p.length() * static_cast<double>(i) / static_cast<double>(n));
    u.front() = caustic.arcs[static_cast<size_t>(k)].u_lo;
    u.back() = caustic.arcs[static_cast<size_t>(k)].u_hi;
  }
  return out;
}

Mesh mesh_interior(const Model& model, const Caustic& caustic, double h) {
  const CausticNodes nodes = caustic_nodes(model, caustic, h);
  const Side bottom = arc_side(caustic, nodes, 3, 0);
  const Side top = arc_side(caustic, nodes, 1, 1);
  const Side left = arc_side(caustic, nodes, 0, 0);
  const Side right = arc_side(caustic, nodes, 2, 3);
  const size_t n = bottom.pts.size() - 1, m = left.pts.size() - 1;
  const auto P = coons(bottom.pts, top.pts, left.pts, right.pts);
  check_patch(P, n, m, "interior");
  std::vector<BoundaryTag> tags(P.size());
  for (size_t i = 0; i <= n; ++i) {
    tags[i] = bottom.tags[i];
    tags[m * (n + 1) + i] = top.tags[i];
  }
  for (size_t j = 1; j < m; ++j) {
    tags[j * (n + 1)] = left.tags[j];
    tags[j * (n + 1) + n] = right.tags[j];
  }
  Mesh mesh;
  mesh.h = h;
  std::map<std::pair<double, double>, int> seen;
  const auto idx = add_patch(mesh, P, tags, seen);
  triangulate_grid(mesh, idx, n, m);
  if (!(mesh.min_signed_area() > 0.0)) throw MeshingFailed("interior mesh has degenerate triangles");
  return mesh;
}

Box outer_box(const Model& model, const Caustic& caustic, double delta_factor) {
  const double target = caustic.energy + delta_factor * model.hbar * model.max_omega();
  Box b{caustic.vertices[0].x, caustic.vertices[0].x, caustic.vertices[0].y, caustic.vertices[0].y};
  for (const Point2& p : caustic.polygon(64)) {
    b.x0 = std::min(b.x0, p.x);
    b.x1 = std::max(b.x1, p.x);
    b.y0 = std::min(b.y0, p.y);
    b.y1 = std::max(b.y1, p.y);
  }
  auto edge_min = [&](Point2 a, Point2 c) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400; ++i) m = std::min(m, eval_potential(model, a + (i / 400.0) * (c - a)));
    return m;
  };
  const double step = 0.02 * std::max(b.x1 - b.x0, b.y1 - b.y0);
  for (int iter = 0; iter < 2000; ++iter) {
    bool ok = true;
    if (edge_min({b.x0, b.y0}, {b.x1, b.y0}) < target) b.y0 -= step, ok = false;
    if (edge_min({b.x0, b.y1}, {b.x1, b.y1}) < target) b.y1 += step, ok = false;
    if (edge_min({b.x0, b.y0}, {b.x0, b.y1}) < target) b.x0 -= step, ok = false;
    if (edge_min({b.x1, b.y0}, {b.x1, b.y1}) < target) b.x1 += step, ok = false;
    if (ok) return b;
  }
  throw MeshingFailed("no bounding box reaches the exterior potential threshold");
}

Mesh mesh_exterior(const Model& model, const Caustic& caustic, double h, const Box& box) {
  const CausticNodes nodes = caustic_nodes(model, caustic, h);
  const std::array<Point2, 4> corner{Point2{box.x0, box.y0}, Point2{box.x0, box.y1}, Point2{box.x1, box.y1},
                                     Point2{box.x1, box.y0}};
  for (const Point2& p : caustic.polygon(64))
    if (!(p.x > box.x0 && p.x < box.x1 && p.y > box.y0 && p.y < box.y1))
      throw MeshingFailed("caustic reaches the outer box");
  // radial node count from the widest gap between caustic and box
  double gap = 0.0;
  for (int v = 0; v < 4; ++v) gap = std::max(gap, norm(corner[static_cast<size_t>(v)] - caustic.vertices[static_cast<size_t>(v)]));
  const auto m = static_cast<size_t>(std::max(2.0, std::ceil(gap / h)));

  Mesh mesh;
  mesh.h = h;
  std::map<std::pair<double, double>, int> seen;
  // (arc, from-vertex, to-vertex) for bottom, top, left, right
  const std::array<std::array<int, 3>, 4> patches{{{3, 0, 3}, {1, 1, 2}, {0, 0, 1}, {2, 3, 2}}};
  for (const auto& [k, va, vb] : patches) {
    const Side inner = arc_side(caustic, nodes, k, va);
    const size_t n = inner.pts.size() - 1;
    const auto outer = line(corner[static_cast<size_t>(va)], corner[static_cast<size_t>(vb)], n);
    const auto la = line(corner[static_cast<size_t>(va)], caustic.vertices[static_cast<size_t>(va)], m);
    const auto lb = line(corner[static_cast<size_t>(vb)], caustic.vertices[static_cast<size_t>(vb)], m);
    const auto P = coons(outer, inner.pts, la, lb);
    check_patch(P, n, m, "exterior");
    std::vector<BoundaryTag> tags(P.size());
    for (size_t i = 0; i <= n; ++i) {
      tags[i] = {BoundaryTag::Outer, -1, 0.0};
      tags[m * (n + 1) + i] = inner.tags[i];
    }
    const auto idx = add_patch(mesh, P, tags, seen);
    triangulate_grid(mesh, idx, n, m);
  }
  if (!(mesh.min_signed_area() > 0.0)) throw MeshingFailed("exterior mesh has degenerate triangles");
  const double expect = (box.x1 - box.x0) * (box.y1 - box.y0);
  Mesh inner = mesh_interior(model, caustic, h);
  if (std::abs(mesh.area() + inner.area() - expect) > 1e-6 * expect)
    throw MeshingFailed("exterior patches overlap the interior or each other");
  return mesh;
}

Mesh merge_meshes(const Mesh& a, const Mesh& b, std::vector<int>* map_b) {
  Mesh out = a;
  out.h = std::max(a.h, b.h);
  std::map<std::pair<double, double>, int> seen;
  for (size_t i = 0; i < a.vertices.size(); ++i)
    if (a.on_boundary(i)) seen.emplace(std::make_pair(a.vertices[i].x, a.vertices[i].y), static_cast<int>(i));
  std::vector<int> map(b.vertices.size());
  for (size_t i = 0; i < b.vertices.size(); ++i) {
    auto it = b.on_boundary(i) ? seen.find({b.vertices[i].x, b.vertices[i].y}) : seen.end();
    if (it != seen.end()) {
      map[i] = it->second;
      continue;
    }
    map[i] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(b.vertices[i]);
    out.tags.push_back(b.tags[i]);
  }
  for (const auto& t : b.triangles)
    out.triangles.push_back({map[static_cast<size_t>(t[0])], map[static_cast<size_t>(t[1])], map[static_cast<size_t>(t[2])]});
  if (map_b) *map_b = std::move(map);
  return out;
}

MeshLocator::MeshLocator(const Mesh& mesh) : mesh_(&mesh) {
  if (mesh.triangles.empty()) throw InvalidArgument("empty mesh");
  double x0 = mesh.vertices[0].x, x1 = x0, y0 = mesh.vertices[0].y, y1 = y0;
  for (const auto& p : mesh.vertices) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double area = std::max((x1 - x0) * (y1 - y0), 1e-300);
  cell_ = std::sqrt(area / static_cast<double>(mesh.triangles.size())) * 2.0;
  x0_ = x0 - 1e-9;
  y0_ = y0 - 1e-9;
  nx_ = static_cast<int>((x1 - x0_) / cell_) + 1;
  ny_ = static_cast<int>((y1 - y0_) / cell_) + 1;
  buckets_.resize(static_cast<size_t>(nx_) * static_cast<size_t>(ny_));
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    double bx0 = 1e300, bx1 = -1e300, by0 = 1e300, by1 = -1e300;
    for (int v : mesh.triangles[t]) {
      const Point2& p = mesh.vertices[static_cast<size_t>(v)];
      bx0 = std::min(bx0, p.x);
      bx1 = std::max(bx1, p.x);
      by0 = std::min(by0, p.y);
      by1 = std::max(by1, p.y);
    }
    const int i0 = std::clamp(static_cast<int>((bx0 - x0_) / cell_), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((bx1 - x0_) / cell_), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((by0 - y0_) / cell_), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((by1 - y0_) / cell_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<size_t>(j * nx_ + i)].push_back(static_cast<int>(t));
  }
}

MeshLocator::Hit MeshLocator::locate(const Point2& q) const {
  Hit hit;
  const int i = static_cast<int>(std::floor((q.x - x0_) / cell_));
  const int j = static_cast<int>(std::floor((q.y - y0_) / cell_));
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return hit;
  double best = -std::numeric_limits<double>::infinity();
  for (int t : buckets_[static_cast<size_t>(j * nx_ + i)]) {
    const auto& tr = mesh_->triangles[static_cast<size_t>(t)];
    const Point2& a = mesh_->vertices[static_cast<size_t>(tr[0])];
    const Point2& b = mesh_->vertices[static_cast<size_t>(tr[1])];
    const Point2& c = mesh_->vertices[static_cast<size_t>(tr[2])];
    const double det = cross(b - a, c - a);
    const double w1 = cross(q - a, c - a) / det;
    const double w2 = cross(b - a, q - a) / det;
    const double w0 = 1.0 - w1 - w2;
    const double mn = std::min({w0, w1, w2});
    if (mn > best) {
      best = mn;
      hit.tri = t;
      hit.w = {w0, w1, w2};
    }
    if (mn >= 0.0) return hit;
  }
  if (best < -1e-10) hit.tri = -1;
  return hit;
}

double MeshLocator::interpolate(const std::vector<double>& values, const Point2& q) const {
  const Hit h = locate(q);
  if (h.tri < 0) return std::numeric_limits<double>::quiet_NaN();
  const auto& tr = mesh_->triangles[static_cast<size_t>(h.tri)];
  return h.w[0] * values[static_cast<size_t>(tr[0])] + h.w[1] * values[static_cast<size_t>(tr[1])] +
         h.w[2] * values[static_cast<size_t>(tr[2])];
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f.precision(17);
  f << "causwave-mesh 1\nh " << mesh.h << "\nvertices " << mesh.vertices.size() << "\n";
  for (size_t i = 0; i < mesh.vertices.size(); ++i)
    f << mesh.vertices[i].x << ' ' << mesh.vertices[i].y << ' ' << static_cast<int>(mesh.tags[i].kind) << ' '
      << mesh.tags[i].arc << ' ' << mesh.tags[i].u << '\n';
  f << "triangles " << mesh.triangles.size() << "\n";
  for (const auto& t : mesh.triangles) f << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!f) throw IoError("write failed for " + path);
}

Mesh read_mesh(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  std::string word;
  int version = 0;
  Mesh mesh;
  size_t nv = 0, nt = 0;
  f >> word >> version;
  if (word != "causwave-mesh" || version != 1) throw IoError(path + " is not a mesh file");
  f >> word >> mesh.h >> word >> nv;
  mesh.vertices.resize(nv);
  mesh.tags.resize(nv);
  for (size_t i = 0; i < nv; ++i) {
    int kind = 0;
    f >> mesh.vertices[i].x >> mesh.vertices[i].y >> kind >> mesh.tags[i].arc >> mesh.tags[i].u;
    mesh.tags[i].kind = static_cast<BoundaryTag::Kind>(kind);
  }
  f >> word >> nt;
  mesh.triangles.resize(nt);
  for (auto& t : mesh.triangles) f >> t[0] >> t[1] >> t[2];
  if (!f) throw IoError("truncated mesh file " + path);
  for (const auto& t : mesh.triangles)
    for (int v : t)
      if (v < 0 || static_cast<size_t>(v) >= nv) throw IoError("bad vertex index in " + path);
  return mesh;
}

}  // namespace causwave
