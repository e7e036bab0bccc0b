#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "causwave/errors.hpp"
#include "causwave/field2d.hpp"

namespace causwave {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool lateral(int k) { return k == 0 || k == 2; }

// Offset of q from the arc measured across its parameter axis; NaN off the
// span (touches lie between the vertices).
double arc_offset(const CausticArc& arc, const Point2& q) {
  const double u = arc_parameter(arc, q);
  const double ext = 0.0;
  if (u < arc.u_lo - ext || u > arc.u_hi + ext) return kNaN;
  return arc.axis == ArcAxis::X ? q.y - arc.f(u) : q.x - arc.f(u);
}

// Near a vertex the orbit passes close to both arcs; only the one it
// actually grazes is parallel to its velocity.
// Arrivals at a vertex have no direction and count as touches.
bool tangent_to(const CausticArc& arc, const Point2& q, const Vec2& p, double p_ref) {
  const Vec2 t = arc.tangent(arc_parameter(arc, q));
  const double np = norm(p), nt = norm(t);
  if (np < 0.05 * p_ref || nt == 0.0) return true;
  return std::abs(cross(t, p)) / (np * nt) < 0.5;
}

struct Sample {
  Point2 q;
  Vec2 p;
  double X;
  double A;  // NaN where the ray-tube width is unknown
};

// Uniform bucket grid over the samples for k-nearest queries.
class SampleGrid {
 public:
  SampleGrid(const std::vector<Sample>& s, double cell) : s_(s), cell_(cell) {
    x0_ = y0_ = 1e300;
    double x1 = -1e300, y1 = -1e300;
    for (const auto& a : s) {
      x0_ = std::min(x0_, a.q.x);
      y0_ = std::min(y0_, a.q.y);
      x1 = std::max(x1, a.q.x);
      y1 = std::max(y1, a.q.y);
    }
    nx_ = std::max(1, static_cast<int>((x1 - x0_) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((y1 - y0_) / cell_) + 1);
    b_.resize(static_cast<size_t>(nx_ * ny_));
    for (size_t i = 0; i < s.size(); ++i) b_[static_cast<size_t>(index(s[i].q))].push_back(static_cast<int>(i));
  }

  /// The k nearest samples, searching rings of buckets outward.
  std::vector<int> nearest(const Point2& q, size_t k, double max_radius) const {
    const int cx = std::clamp(static_cast<int>((q.x - x0_) / cell_), 0, nx_ - 1);
    const int cy = std::clamp(static_cast<int>((q.y - y0_) / cell_), 0, ny_ - 1);
    std::vector<std::pair<double, int>> found;
    const int rmax = static_cast<int>(max_radius / cell_) + 1;
    for (int r = 0; r <= rmax; ++r) {
      for (int j = cy - r; j <= cy + r; ++j)
        for (int i = cx - r; i <= cx + r; ++i) {
          if (std::max(std::abs(i - cx), std::abs(j - cy)) != r) continue;
          if (i < 0 || j < 0 || i >= nx_ || j >= ny_) continue;
          for (int id : b_[static_cast<size_t>(j * nx_ + i)])
            found.emplace_back(norm(s_[static_cast<size_t>(id)].q - q), id);
        }
      // everything within r * cell is now known
      const size_t inside = static_cast<size_t>(std::count_if(
          found.begin(), found.end(), [&](const auto& f) { return f.first <= r * cell_; }));
      if (inside >= k) break;
    }
    std::sort(found.begin(), found.end());
    std::vector<int> out;
    for (size_t i = 0; i < found.size() && i < k; ++i)
      if (found[i].first <= max_radius) out.push_back(found[i].second);
    return out;
  }

  size_t count_within(const Point2& q, double r) const {
    size_t n = 0;
    const int cx0 = static_cast<int>(std::floor((q.x - r - x0_) / cell_));
    const int cx1 = static_cast<int>(std::floor((q.x + r - x0_) / cell_));
    const int cy0 = static_cast<int>(std::floor((q.y - r - y0_) / cell_));
    const int cy1 = static_cast<int>(std::floor((q.y + r - y0_) / cell_));
    for (int j = std::max(cy0, 0); j <= std::min(cy1, ny_ - 1); ++j)
      for (int i = std::max(cx0, 0); i <= std::min(cx1, nx_ - 1); ++i)
        for (int id : b_[static_cast<size_t>(j * nx_ + i)])
          if (norm(s_[static_cast<size_t>(id)].q - q) <= r) ++n;
    return n;
  }

 private:
  int index(const Point2& q) const {
    const int i = std::clamp(static_cast<int>((q.x - x0_) / cell_), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>((q.y - y0_) / cell_), 0, ny_ - 1);
    return j * nx_ + i;
  }
  const std::vector<Sample>& s_;
  double cell_, x0_, y0_;
  int nx_, ny_;
  std::vector<std::vector<int>> b_;
};

// Weighted least squares for a local quadratic through the sample values and
// momenta (the action gradient): X = c + g.d + d^T H d / 2.
double fit_action(const std::vector<Sample>& s, const std::vector<int>& ids, const Point2& q) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(3 * ids.size()), 6);
  Eigen::VectorXd b(static_cast<Eigen::Index>(3 * ids.size()));
  double scale = 0.0;
  for (int id : ids) scale = std::max(scale, norm(s[static_cast<size_t>(id)].q - q));
  scale = std::max(scale, 1e-12);
  for (size_t r = 0; r < ids.size(); ++r) {
    const Sample& sm = s[static_cast<size_t>(ids[r])];
    const Vec2 d = sm.q - q;
    const double w = 1.0 / (dot(d, d) / (scale * scale) + 1e-2);
    const auto i = static_cast<Eigen::Index>(3 * r);
    // unknowns c, gx, gy, hxx, hxy, hyy
    a.row(i) << 1, d.x, d.y, 0.5 * d.x * d.x, d.x * d.y, 0.5 * d.y * d.y;
    b[i] = sm.X;
    a.row(i + 1) << 0, 1, 0, d.x, d.y, 0;
    b[i + 1] = sm.p.x;
    a.row(i + 2) << 0, 0, 1, 0, d.x, d.y;
    b[i + 2] = sm.p.y;
    a.row(i) *= w;
    b[i] *= w;
    a.row(i + 1) *= w * scale;
    b[i + 1] *= w * scale;
    a.row(i + 2) *= w * scale;
    b[i + 2] *= w * scale;
  }
  // mild ridge on the curvature keeps collinear neighbourhoods solvable
  Eigen::MatrixXd n = a.transpose() * a;
  for (int k = 3; k < 6; ++k) n(k, k) += 1e-8 * std::max(1.0, n(0, 0));
  const Eigen::VectorXd x = n.ldlt().solve(a.transpose() * b);
  return x[0];
}

}  // namespace

namespace detail {

std::vector<Vec2> fitted_gradients(const Mesh& mesh, const std::vector<double>& v, double radius) {
  std::vector<std::vector<int>> nb(mesh.size());
  for (const auto& t : mesh.triangles)
    for (int a : t)
      for (int b : t)
        if (a != b) nb[static_cast<size_t>(a)].push_back(b);
  std::vector<Vec2> g(mesh.size(), Vec2{kNaN, kNaN});
  for (size_t i = 0; i < mesh.size(); ++i) {
    // two rings of neighbours
    std::vector<int> ring = nb[i];
    for (int j : nb[i]) ring.insert(ring.end(), nb[static_cast<size_t>(j)].begin(), nb[static_cast<size_t>(j)].end());
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    std::erase(ring, static_cast<int>(i));
    if (ring.size() < 5) continue;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ring.size()), 5);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ring.size()));
    for (size_t r = 0; r < ring.size(); ++r) {
      const Vec2 d = mesh.vertices[static_cast<size_t>(ring[r])] - mesh.vertices[i];
      if (norm(d) > radius) continue;
      a.row(static_cast<Eigen::Index>(r)) << d.x, d.y, 0.5 * d.x * d.x, d.x * d.y, 0.5 * d.y * d.y;
      b[static_cast<Eigen::Index>(r)] = v[static_cast<size_t>(ring[r])] - v[i];
    }
    const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
    g[i] = Vec2{x[0], x[1]};
  }
  return g;
}

}  // namespace detail

ClassicalAction solve_classical_action(const Model& model, double energy, const Caustic& oriented,
                                       std::shared_ptr<const Mesh> interior, const std::array<ArcWave, 4>& wkb_waves,
                                       const ClassicalActionOptions& opts) {
  model.validate();
  if (!interior) throw InvalidArgument("classical action needs a mesh");
  for (const auto& w : wkb_waves)
    if (w.method != ArcMethod::WKB || w.X_cl.empty()) throw InvalidArgument("classical action needs WKB arc data");
  const Mesh& mesh = *interior;
  const double h = mesh.h > 0 ? mesh.h : 0.05;
  const int v = oriented.start_vertex;
  int lat0 = -1, hor0 = -1;
  for (int k = 0; k < 4; ++k)
    for (int e : kArcVertices[static_cast<size_t>(k)])
      if (e == v) (lateral(k) ? lat0 : hor0) = k;

  std::array<ArcSampler, 4> xcl{ArcSampler(wkb_waves[0], wkb_waves[0].X_cl), ArcSampler(wkb_waves[1], wkb_waves[1].X_cl),
                                ArcSampler(wkb_waves[2], wkb_waves[2].X_cl), ArcSampler(wkb_waves[3], wkb_waves[3].X_cl)};
  auto boundary_action = [&](int k, const Point2& q) {
    const CausticArc& arc = oriented.arcs[static_cast<size_t>(k)];
    return xcl[static_cast<size_t>(k)](std::clamp(arc_parameter(arc, q), arc.u_lo, arc.u_hi));
  };

  Point2 centre{0, 0};
  double size = 0.0;
  for (const auto& p : oriented.vertices) centre += 0.25 * p;
  for (const auto& p : oriented.vertices) size = std::max(size, norm(p - centre));
  const double touch_tol = 0.02 * size;
  const double p_ref = std::sqrt(2.0 * model.mass * energy);
  std::array<double, 4> side{};
  for (int k = 0; k < 4; ++k) side[static_cast<size_t>(k)] = arc_offset(oriented.arcs[static_cast<size_t>(k)], centre) > 0 ? 1.0 : -1.0;

  const double dt = opts.trace.dt > 0 ? opts.trace.dt : default_time_step(model);
  const int stride = std::max(1, opts.record_stride);
  const double t_max = 0.75 * 2.0 * std::numbers::pi / std::min(model.omega_x, model.omega_y);
  auto f = [&](const PhaseState& s) { return dot(s.p, s.p) / model.mass; };
  auto fdot = [&](const PhaseState& s) { return -2.0 * dot(s.p, grad_potential(model, s.q)) / model.mass; };

  ClassicalAction out;
  std::vector<Sample> samples;
  // Characteristics leave the two arcs through the start vertex tangentially,
  // carry the arc's action, and end where they touch one of the far arcs.
  for (int k0 : {lat0, hor0}) {
    const CausticArc& arc = oriented.arcs[static_cast<size_t>(k0)];
    const ArcPath path(model, arc);
    const double len = path.length();
    const double ds = opts.seed_spacing * h;
    const int n = std::max(3, static_cast<int>(std::ceil(len / ds)));
    const double step = len / n;
    auto launch = [&](double s) {
      const Point2 q0 = path.point(s);
      const Vec2 tan = normalized(path.point(s + 1e-6) - path.point(s - 1e-6)) * static_cast<double>(arc.orientation);
      const double pk = std::sqrt(std::max(0.0, 2.0 * model.mass * (energy - eval_potential(model, q0))));
      return integrate_trajectory(model, q0, pk * tan, t_max, dt, stride, opts.trace.energy_tol);
    };
    for (int j = 0; j < n; ++j) {
      // arc length measured from the start vertex
      const double sv = (j + 0.5) * step;
      const double s = arc.orientation > 0 ? sv : len - sv;
      const Trajectory tr = launch(s);
      // a twin ray a little further along the arc gives the ray-tube width
      const double delta = 1e-4 * step;
      const Trajectory twin = launch(s + delta);
      const auto& os = tr.samples;
      const double p0 = norm(os[0].state.p);
      double x = boundary_action(k0, os[0].state.q);
      std::vector<Sample> ray{{os[0].state.q, os[0].state.p, x, kNaN}};
      std::array<std::array<double, 3>, 4> g{};  // last three inward offsets per far arc
      bool closed = false;
      for (size_t i = 1; i < os.size() && !closed; ++i) {
        const double dh = os[i].t - os[i - 1].t;
        x += 0.5 * dh * (f(os[i - 1].state) + f(os[i].state)) + dh * dh / 12.0 * (fdot(os[i - 1].state) - fdot(os[i].state));
        for (int k = 0; k < 4 && !closed; ++k) {
          if (k == lat0 || k == hor0) continue;
          auto& gk = g[static_cast<size_t>(k)];
          gk = {gk[1], gk[2], side[static_cast<size_t>(k)] * arc_offset(oriented.arcs[static_cast<size_t>(k)], os[i].state.q)};
          if (i >= 2 && gk[1] <= gk[0] && gk[1] < gk[2] && std::abs(gk[1]) < touch_tol &&
              tangent_to(oriented.arcs[static_cast<size_t>(k)], ray.back().q, ray.back().p, p_ref)) {
            // the previous sample is the touch
            const Sample& last = ray.back();
            out.boundary_mismatch = std::max(out.boundary_mismatch, std::abs(last.X - boundary_action(k, last.q)));
            ++out.segments;
            closed = true;
          }
        }
        if (closed) break;
        // A^2 |p_seed| |qdot x dq/ds| is constant along a ray
        double a = kNaN;
        if (i < twin.samples.size()) {
          const Vec2 dq = (twin.samples[i].state.q - os[i].state.q) / delta;
          const double jac = std::abs(cross(os[i].state.p / model.mass, dq));
          if (jac > 0) a = 1.0 / std::sqrt(p0 * jac);
        }
        ray.push_back({os[i].state.q, os[i].state.p, x, a});
      }
      // a ray that never meets a far arc has left the sheet unnoticed
      if (closed)
        samples.insert(samples.end(), ray.begin(), ray.end());
      else
        ++out.open_rays;
    }
  }
  out.samples = samples.size();
  if (out.boundary_mismatch > opts.max_boundary_mismatch) {
    std::ostringstream s;
    s << "action carried along the characteristics misses the arc data by " << out.boundary_mismatch;
    throw CharacteristicCrossing(s.str());
  }
  if (samples.size() < static_cast<size_t>(opts.min_neighbours)) throw CharacteristicCrossing("too few characteristic samples");

  const SampleGrid grid(samples, h);
  std::vector<double> X(mesh.size(), kNaN), amp(mesh.size(), kNaN);
  for (size_t i = 0; i < mesh.size(); ++i) {
    const BoundaryTag& t = mesh.tags[i];
    const auto ids = grid.nearest(mesh.vertices[i], static_cast<size_t>(opts.min_neighbours), 20.0 * h);
    if (ids.size() < 6) throw CharacteristicCrossing("mesh vertex not reached by the characteristics");
    X[i] = t.kind == BoundaryTag::Caustic ? xcl[static_cast<size_t>(t.arc)](t.u) : fit_action(samples, ids, mesh.vertices[i]);
    double sw = 0.0, sa = 0.0;
    for (int id : ids) {
      const Sample& sm = samples[static_cast<size_t>(id)];
      if (!std::isfinite(sm.A)) continue;
      const double w = 1.0 / (dot(sm.q - mesh.vertices[i], sm.q - mesh.vertices[i]) + 1e-4 * h * h);
      sw += w;
      sa += w * sm.A;
    }
    if (sw > 0) amp[i] = sa / sw;
  }

  // eikonal self-check on the interpolated field
  const auto g = detail::fitted_gradients(mesh, X, 4.0 * h);
  size_t pass = 0, tested = 0;
  for (size_t i = 0; i < mesh.size(); ++i) {
    if (mesh.on_boundary(i) || !std::isfinite(g[i].x)) continue;
    ++tested;
    const double r = dot(g[i], g[i]) - 2.0 * model.mass * (energy - eval_potential(model, mesh.vertices[i]));
    if (std::abs(r) <= 1e-2 * 2.0 * model.mass * energy) ++pass;
  }
  out.eikonal_pass_fraction = tested ? static_cast<double>(pass) / static_cast<double>(tested) : 0.0;

  // the amplitude diverges on the caustic; cap it at a quantile of the interior values
  std::vector<double> inner;
  for (size_t i = 0; i < mesh.size(); ++i)
    if (!mesh.on_boundary(i) && std::isfinite(amp[i])) inner.push_back(amp[i]);
  double cap = 1.0;
  if (!inner.empty()) {
    const auto q = static_cast<size_t>(opts.amplitude_clip_quantile * static_cast<double>(inner.size() - 1));
    std::nth_element(inner.begin(), inner.begin() + static_cast<std::ptrdiff_t>(q), inner.end());
    cap = inner[q] > 0 ? inner[q] : 1.0;
  }
  for (auto& a : amp) a = std::isfinite(a) ? std::min(a, cap) / cap : 1.0;

  out.X = FieldSolution{interior, FieldKind::X, Provenance::WKB, energy, v, std::move(X)};
  out.A = FieldSolution{interior, FieldKind::A, Provenance::WKB, energy, v, std::move(amp)};
  return out;
}

FieldSolution wkb_partial(const ClassicalAction& action, AmplitudeMode mode, double hbar) {
  FieldSolution out = action.X;
  out.kind = FieldKind::Psi;
  for (size_t i = 0; i < out.values.size(); ++i) {
    const double a = mode == AmplitudeMode::Transported ? action.A.values[i] : 1.0;
    out.values[i] = a * std::sin(action.X.values[i] / hbar);
  }
  return out;
}

FieldSolution wkb_field(const ClassicalAction& v1, const ClassicalAction& v2, AmplitudeMode mode, int parity,
                        double hbar) {
  if (v1.X.mesh != v2.X.mesh) throw InvalidArgument("both orientations must share one mesh");
  FieldSolution a = wkb_partial(v1, mode, hbar);
  const FieldSolution b = wkb_partial(v2, mode, hbar);
  const double sgn = parity < 0 ? -1.0 : 1.0;
  for (size_t i = 0; i < a.values.size(); ++i) a.values[i] += sgn * b.values[i];
  a.orientation_vertex = -1;
  return a;
}

}  // namespace causwave
