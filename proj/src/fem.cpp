#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>

#include <Eigen/SparseLU>

#include "causwave/errors.hpp"
#include "causwave/field2d.hpp"

namespace causwave {

std::string to_string(FieldKind k) {
  switch (k) {
    case FieldKind::Psi: return "psi";
    case FieldKind::X: return "X";
    case FieldKind::Y: return "Y";
    case FieldKind::A: return "A";
  }
  return "?";
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::SE: return "se";
    case Provenance::WKB: return "wkb";
    case Provenance::QHJE: return "qhje";
    case Provenance::Oracle: return "oracle";
  }
  return "?";
}

Sampler FieldSolution::sampler() const {
  if (!mesh) throw InvalidArgument("field has no mesh");
  auto loc = std::make_shared<MeshLocator>(*mesh);
  auto vals = std::make_shared<std::vector<double>>(values);
  auto keep = mesh;
  return [loc, vals, keep](const Point2& q) { return loc->interpolate(*vals, q); };
}

ArcSampler::ArcSampler(const ArcWave& wave, const std::vector<double>& field) {
  if (field.size() != wave.grid.s.size()) throw InvalidArgument("arc field size does not match its grid");
  for (size_t i = wave.grid.i_lo; i <= wave.grid.i_hi; ++i) {
    u_.push_back(wave.u[i]);
    v_.push_back(field[i]);
  }
}

double ArcSampler::operator()(double u) const {
  if (u <= u_.front()) return v_.front();
  if (u >= u_.back()) return v_.back();
  const auto it = std::upper_bound(u_.begin(), u_.end(), u);
  const auto i = static_cast<size_t>(std::distance(u_.begin(), it)) - 1;
  const double t = (u - u_[i]) / (u_[i + 1] - u_[i]);
  return (1 - t) * v_[i] + t * v_[i + 1];
}

FemMatrices assemble_fem(const Mesh& mesh, const Model& model, double energy) {
  const auto n = static_cast<Eigen::Index>(mesh.size());
  std::vector<Eigen::Triplet<double>> tl, tm;
  tl.reserve(mesh.triangles.size() * 9);
  tm.reserve(mesh.triangles.size() * 9);
  FemMatrices f;
  f.lumped.assign(mesh.size(), 0.0);
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tr = mesh.triangles[t];
    std::array<Point2, 3> p;
    for (int i = 0; i < 3; ++i) p[static_cast<size_t>(i)] = mesh.vertices[static_cast<size_t>(tr[static_cast<size_t>(i)])];
    const double area = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
    if (!(area > 0.0)) throw MeshingFailed("inverted or degenerate triangle");
    std::array<Vec2, 3> g;
    for (int i = 0; i < 3; ++i) {
      const Vec2 e = p[static_cast<size_t>((i + 2) % 3)] - p[static_cast<size_t>((i + 1) % 3)];
      g[static_cast<size_t>(i)] = Vec2{-e.y, e.x} / (2.0 * area);
    }
    // edge midpoints m_k opposite vertex k: phi_i(m_k) = 1/2 for i != k
    std::array<double, 3> um;
    for (int k = 0; k < 3; ++k) {
      const Point2 m = 0.5 * (p[static_cast<size_t>((k + 1) % 3)] + p[static_cast<size_t>((k + 2) % 3)]);
      um[static_cast<size_t>(k)] = eval_potential(model, m) - energy;
    }
    for (int i = 0; i < 3; ++i) {
      f.lumped[static_cast<size_t>(tr[static_cast<size_t>(i)])] += area / 3.0;
      for (int j = 0; j < 3; ++j) {
        tl.emplace_back(tr[static_cast<size_t>(i)], tr[static_cast<size_t>(j)], area * dot(g[static_cast<size_t>(i)], g[static_cast<size_t>(j)]));
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
          if (k == i || k == j) continue;
          s += 0.25 * um[static_cast<size_t>(k)];
        }
        tm.emplace_back(tr[static_cast<size_t>(i)], tr[static_cast<size_t>(j)], area / 3.0 * s);
      }
    }
  }
  f.laplace.resize(n, n);
  f.shifted.resize(n, n);
  f.laplace.setFromTriplets(tl.begin(), tl.end());
  f.shifted.setFromTriplets(tm.begin(), tm.end());
  return f;
}

Eigen::SparseMatrix<double> FemMatrices::operator_matrix(const Model& model) const {
  return (model.hbar * model.hbar / (2.0 * model.mass)) * laplace + shifted;
}

namespace {

struct Partition {
  std::vector<int> index;  // position among unknowns, -1 for boundary
  std::vector<size_t> unknowns;
};

Partition partition(const Mesh& mesh) {
  Partition p;
  p.index.assign(mesh.size(), -1);
  for (size_t i = 0; i < mesh.size(); ++i)
    if (!mesh.on_boundary(i)) {
      p.index[i] = static_cast<int>(p.unknowns.size());
      p.unknowns.push_back(i);
    }
  return p;
}

template <typename Scalar>
std::vector<Scalar> dirichlet_solve(const Mesh& mesh, const Eigen::SparseMatrix<double>& K,
                                    const std::vector<Scalar>& boundary, double* residual) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Partition part = partition(mesh);
  const auto nu = static_cast<Eigen::Index>(part.unknowns.size());
  std::vector<Eigen::Triplet<Scalar>> trip;
  Vec rhs = Vec::Zero(nu);
  for (int k = 0; k < K.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, k); it; ++it) {
      const int r = part.index[static_cast<size_t>(it.row())];
      if (r < 0) continue;
      const int c = part.index[static_cast<size_t>(it.col())];
      if (c >= 0)
        trip.emplace_back(r, c, Scalar(it.value()));
      else
        rhs[r] -= it.value() * boundary[static_cast<size_t>(it.col())];
    }
  std::vector<Scalar> out = boundary;
  if (nu == 0) {
    if (residual) *residual = 0.0;
    return out;
  }
  Eigen::SparseMatrix<Scalar> A(nu, nu);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SingularSystem("interior operator is singular: " + lu.lastErrorMessage());
  const Vec x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw SingularSystem("Dirichlet solve failed");
  double bmax = 0.0;
  for (size_t i = 0; i < mesh.size(); ++i)
    if (mesh.on_boundary(i)) bmax = std::max(bmax, std::abs(boundary[i]));
  if (bmax > 0.0 && x.cwiseAbs().maxCoeff() > 1e8 * bmax)
    throw SingularSystem("energy is at an interior Dirichlet eigenvalue (solution blows up)");
  const double res = (A * x - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (residual) *residual = res;
  for (Eigen::Index i = 0; i < nu; ++i) out[part.unknowns[static_cast<size_t>(i)]] = x[i];
  return out;
}

std::array<ArcSampler, 4> psi_samplers(const std::array<ArcWave, 4>& waves) {
  return {ArcSampler(waves[0], waves[0].psi), ArcSampler(waves[1], waves[1].psi), ArcSampler(waves[2], waves[2].psi),
          ArcSampler(waves[3], waves[3].psi)};
}

// Area-weighted P1 gradient at each vertex from the triangles of one mesh.
std::vector<Vec2> vertex_gradients(const Mesh& mesh, const std::vector<double>& v, double* max_tri) {
  std::vector<Vec2> g(mesh.size(), Vec2{0, 0});
  std::vector<double> w(mesh.size(), 0.0);
  double mx = 0.0;
  for (size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tr = mesh.triangles[t];
    const Point2& a = mesh.vertices[static_cast<size_t>(tr[0])];
    const Point2& b = mesh.vertices[static_cast<size_t>(tr[1])];
    const Point2& c = mesh.vertices[static_cast<size_t>(tr[2])];
    const double area = 0.5 * cross(b - a, c - a);
    Vec2 grad{0, 0};
    const std::array<Point2, 3> p{a, b, c};
    for (int i = 0; i < 3; ++i) {
      const Vec2 e = p[static_cast<size_t>((i + 2) % 3)] - p[static_cast<size_t>((i + 1) % 3)];
      grad += v[static_cast<size_t>(tr[static_cast<size_t>(i)])] * (Vec2{-e.y, e.x} / (2.0 * area));
    }
    mx = std::max(mx, norm(grad));
    for (int i : tr) {
      g[static_cast<size_t>(i)] += area * grad;
      w[static_cast<size_t>(i)] += area;
    }
  }
  for (size_t i = 0; i < mesh.size(); ++i)
    if (w[i] > 0) g[i] = g[i] / w[i];
  if (max_tri) *max_tri = mx;
  return g;
}

}  // namespace

std::vector<double> solve_dirichlet(const Mesh& mesh, const Model& model, double energy,
                                    const std::function<double(size_t)>& bc, double* residual) {
  const FemMatrices f = assemble_fem(mesh, model, energy);
  std::vector<double> boundary(mesh.size(), 0.0);
  for (size_t i = 0; i < mesh.size(); ++i)
    if (mesh.on_boundary(i)) boundary[i] = bc(i);
  return dirichlet_solve<double>(mesh, f.operator_matrix(model), boundary, residual);
}

FieldSolution solve_dirichlet_se(std::shared_ptr<const Mesh> mesh, const Model& model, double energy,
                                 const std::array<ArcWave, 4>& waves, double* residual) {
  const auto samplers = psi_samplers(waves);
  FieldSolution out;
  out.mesh = mesh;
  out.kind = FieldKind::Psi;
  out.provenance = Provenance::SE;
  out.energy = energy;
  out.values = solve_dirichlet(*mesh, model, energy, [&](size_t i) {
    const BoundaryTag& t = mesh->tags[i];
    return t.kind == BoundaryTag::Caustic ? samplers[static_cast<size_t>(t.arc)](t.u) : 0.0;
  }, residual);
  return out;
}

namespace detail {
// shared with the QHJE solver
std::vector<std::complex<double>> complex_dirichlet(const Mesh& mesh, const Eigen::SparseMatrix<double>& K,
                                                    const std::vector<std::complex<double>>& boundary,
                                                    double* residual) {
  return dirichlet_solve<std::complex<double>>(mesh, K, boundary, residual);
}
}  // namespace detail

WeldResult weld(const FieldSolution& interior, const FieldSolution& exterior) {
  if (!interior.mesh || !exterior.mesh) throw InvalidArgument("weld needs meshed fields");
  std::vector<int> map;
  auto merged = std::make_shared<Mesh>(merge_meshes(*interior.mesh, *exterior.mesh, &map));
  WeldResult r;
  r.field = interior;
  r.field.mesh = merged;
  r.field.values.resize(merged->size());
  double scale = 0.0;
  for (double v : interior.values) scale = std::max(scale, std::abs(v));
  for (size_t i = 0; i < exterior.values.size(); ++i) {
    const auto j = static_cast<size_t>(map[i]);
    if (j < interior.values.size()) {
      if (std::abs(interior.values[j] - exterior.values[i]) > 1e-8 * std::max(1.0, scale)) {
        throw BoundaryMismatch("interior and exterior disagree on the caustic by " +
                               std::to_string(std::abs(interior.values[j] - exterior.values[i])));
      }
      continue;
    }
    r.field.values[j] = exterior.values[i];
  }
  double gmax = 0.0;
  const auto gin = vertex_gradients(*interior.mesh, interior.values, &gmax);
  const auto gout = vertex_gradients(*exterior.mesh, exterior.values, nullptr);
  double jump = 0.0;
  for (size_t i = 0; i < exterior.values.size(); ++i) {
    const auto j = static_cast<size_t>(map[i]);
    if (j >= interior.values.size() || exterior.mesh->tags[i].kind != BoundaryTag::Caustic) continue;
    jump = std::max(jump, norm(gin[j] - gout[i]));
  }
  r.c1_jump = gmax > 0.0 ? jump / gmax : 0.0;
  return r;
}

double parity_defect(const Sampler& psi, const Region& region, int parity) {
  const Raster grid = Raster::make(region.x0, region.x1, region.y0, region.y1, region.nx, region.ny);
  double dmax = 0.0, vmax = 0.0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      const Point2 q{grid.x(i), grid.y(j)};
      if (!region.polygon.empty() && !inside_caustic(region.polygon, q)) continue;
      const double a = psi(q), b = psi({-q.x, q.y});
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      dmax = std::max(dmax, std::abs(a - parity * b));
      vmax = std::max(vmax, std::abs(a));
    }
  if (vmax == 0.0) throw EmptyOverlap("no mirrored samples in the region");
  return dmax / vmax;
}

TurningSurface turning_surface(const Sampler& psi, const Caustic& caustic, double step, double bound, int per_arc) {
  auto d2 = [&](const Point2& q, const Vec2& dir) {
    std::array<double, 5> v{};
    for (int k = -2; k <= 2; ++k) {
      v[static_cast<size_t>(k + 2)] = psi(q + (k * step) * dir);
      if (!std::isfinite(v[static_cast<size_t>(k + 2)])) return std::numeric_limits<double>::quiet_NaN();
    }
    return (2 * v[0] - v[1] - 2 * v[2] - v[3] + 2 * v[4]) / (7.0 * step * step);
  };
  TurningSurface ts;
  const auto poly = caustic.polygon(200);
  double x0 = poly[0].x, x1 = x0, y0 = poly[0].y, y1 = y0;
  for (const auto& p : poly) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const int n = 120;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const Point2 q{x0 + (x1 - x0) * i / n, y0 + (y1 - y0) * j / n};
      if (!inside_caustic(poly, q)) continue;
      for (const Vec2& dir : {Vec2{1, 0}, Vec2{0, 1}}) {
        const double v = d2(q, dir);
        if (std::isfinite(v)) ts.max_interior = std::max(ts.max_interior, std::abs(v));
      }
    }
  size_t ok = 0;
  for (const CausticArc& arc : caustic.arcs)
    for (int i = 0; i < per_arc; ++i) {
      const double u = arc.u_lo + arc.span() * (i + 0.5) / per_arc;
      const Vec2 t = normalized(arc.tangent(u));
      const double v = d2(arc.point(u), Vec2{-t.y, t.x});
      if (!std::isfinite(v)) continue;
      ++ts.samples;
      ts.max_normal = std::max(ts.max_normal, std::abs(v));
      if (std::abs(v) <= bound * ts.max_interior) ++ok;
    }
  ts.fraction = ts.samples ? static_cast<double>(ok) / static_cast<double>(ts.samples) : 0.0;
  return ts;
}

}  // namespace causwave
