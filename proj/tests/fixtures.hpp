#pragma once

#include <cmath>
#include <array>
#include <limits>
#include <map>
#include <memory>
#include <utility>
#include <numbers>
#include <vector>

#include "causwave/arc1d.hpp"
#include "causwave/field2d.hpp"

namespace fx {

using namespace causwave;

inline Model barbanis() { return Model{}; }

inline Model separable() {
  Model m;
  m.lambda = 0.0;
  return m;
}

/// Corner (-x_A, -y_A) of the separable (n1, n2) caustic.
inline Point2 separable_vertex(const Model& m, int n1, int n2) {
  const double ex = m.hbar * m.omega_x * (n1 + 0.5), ey = m.hbar * m.omega_y * (n2 + 0.5);
  return {-std::sqrt(2.0 * ex / m.mass) / m.omega_x, -std::sqrt(2.0 * ey / m.mass) / m.omega_y};
}

/// Exact separable (2,2) candidate, no search.
inline const EigenState& separable_state(ArcMethod method) {
  static std::map<ArcMethod, EigenState> cache;
  auto it = cache.find(method);
  if (it != cache.end()) return it->second;
  const Model m = separable();
  const Point2 v = separable_vertex(m, 2, 2);
  EigenSearchOptions o;
  o.n1 = 2;
  o.n2 = 2;
  o.method = method;
  return cache[method] = evaluate_candidate(m, eval_potential(m, v), std::atan2(v.y, v.x) + 2.0 * std::numbers::pi, o);
}

inline const EigenState& barbanis_state(ArcMethod method) {
  static std::map<ArcMethod, EigenState> cache;
  auto it = cache.find(method);
  if (it != cache.end()) return it->second;
  EigenSearchOptions o;
  o.n1 = 2;
  o.n2 = 2;
  o.method = method;
  o.accept_unconverged = true;
  return cache[method] = search_eigenstate(barbanis(), o);
}

/// Closed-form harmonic-oscillator eigenfunctions 0..2, unnormalized.
inline double ho(int n, double x, double omega, double mass = 1.0, double hbar = 1.0) {
  const double xi = std::sqrt(mass * omega / hbar) * x;
  const double g = std::exp(-0.5 * xi * xi);
  switch (n) {
    case 0: return g;
    case 1: return xi * g;
    default: return (2.0 * xi * xi - 1.0) * g;
  }
}

/// Relative L2 distance after normalizing both and aligning the sign.
inline double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double na = 0, nb = 0, dot = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    na += a[i] * a[i];
    nb += b[i] * b[i];
    dot += a[i] * b[i];
  }
  const double s = dot < 0 ? -1.0 : 1.0;
  double d = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double e = a[i] / std::sqrt(na) - s * b[i] / std::sqrt(nb);
    d += e * e;
  }
  return std::sqrt(d);
}

}  // namespace fx

namespace fx {

struct SweepPoint {
  double hbar = 0.0;
  int n = 0;
  double energy = 0.0;
  double max_dx = 0.0;  // max |X - X_cl| on the upper arc span
};

/// Same classical family at shrinking hbar: (n + 1/2) hbar stays near 2.5.
inline std::vector<SweepPoint> classical_limit_sweep() {
  std::vector<SweepPoint> out;
  const std::array<std::pair<double, int>, 3> pts{{{1.0, 2}, {0.5, 4}, {0.25, 9}}};
  for (const auto& [hbar, n] : pts) {
    Model m;
    m.hbar = hbar;
    EigenSearchOptions o;
    o.n1 = o.n2 = n;
    o.method = ArcMethod::WKB;
    o.accept_unconverged = true;
    const EigenState st = search_eigenstate(m, o);
    const auto q = solve_arcs(m, st.caustic, st.energy, ArcMethod::QHJE, n, n);
    const auto w = solve_arcs(m, st.caustic, st.energy, ArcMethod::WKB, n, n);
    double d = 0.0;
    for (size_t i = q[1].grid.i_lo; i <= q[1].grid.i_hi; ++i) d = std::max(d, std::abs(q[1].X[i] - w[1].X_cl[i]));
    out.push_back({hbar, n, st.energy, d});
  }
  return out;
}

using MeshPtr = std::shared_ptr<const Mesh>;

inline std::array<ArcWave, 4> matched_se(const Model& m, const Caustic& c, double e) {
  auto w = solve_arcs(m, c, e, ArcMethod::SE, 2, 2);
  match_arc_constants(w);
  return w;
}

inline WeldResult welded(const Model& m, const Caustic& c, double e, double h) {
  const auto waves = matched_se(m, c, e);
  auto in = std::make_shared<Mesh>(mesh_interior(m, c, h));
  auto ex = std::make_shared<Mesh>(mesh_exterior(m, c, h, outer_box(m, c)));
  return weld(solve_dirichlet_se(in, m, e, waves), solve_dirichlet_se(ex, m, e, waves));
}

inline Region interior_region(const Caustic& c) {
  const Box b = outer_box(barbanis(), c);
  return Region{b.x0, b.x1, b.y0, b.y1, 201, 201, c.polygon(200)};
}

inline std::array<ClassicalAction, 2> actions(const Model& m, const EigenState& st, MeshPtr mesh) {
  std::array<ClassicalAction, 2> out;
  const std::array<int, 2> starts{0, 3};
  for (size_t j = 0; j < 2; ++j) {
    const Caustic c = orient_caustic(st.caustic, starts[j]);
    out[j] = solve_classical_action(m, st.energy, c, mesh, solve_arcs(m, c, st.energy, ArcMethod::WKB, 2, 2));
  }
  return out;
}

inline std::array<QhjeField, 2> qhje_fields(const Model& m, const EigenState& st, MeshPtr mesh) {
  std::array<QhjeField, 2> out;
  const std::array<int, 2> starts{0, 3};
  for (size_t j = 0; j < 2; ++j) {
    const Caustic c = orient_caustic(st.caustic, starts[j]);
    ClassicalActionOptions co;
    co.max_boundary_mismatch = std::numeric_limits<double>::infinity();
    const auto ca = solve_classical_action(m, st.energy, c, mesh, solve_arcs(m, c, st.energy, ArcMethod::WKB, 2, 2), co);
    out[j] = solve_qhje_field(mesh, m, st.energy, solve_arcs(m, c, st.energy, ArcMethod::QHJE, 2, 2), &ca.X.values);
  }
  return out;
}

}  // namespace fx
