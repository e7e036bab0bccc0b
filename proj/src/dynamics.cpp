#include "causwave/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "causwave/errors.hpp"

namespace causwave {

namespace {

// Yoshida (1990) sixth-order composition, solution A.
constexpr double kW1 = -1.17767998417887;
constexpr double kW2 = 0.235573213359357;
constexpr double kW3 = 0.784513610477560;
constexpr double kW0 = 1.0 - 2.0 * (kW1 + kW2 + kW3);
constexpr std::array<double, 7> kWeights = {kW3, kW2, kW1, kW0, kW1, kW2, kW3};

void check_energy(const Model& m, const PhaseState& s, double energy, double tol, double t,
                  double& max_err) {
  const double err = std::abs(hamiltonian(m, s) - energy);
  max_err = std::max(max_err, err);
  if (err > tol * std::max(1.0, std::abs(energy))) {
    std::ostringstream os;
    os << "|H - E| = " << err << " at t = " << t << " exceeds " << tol
       << " * max(1, E); reduce dt";
    throw EnergyDriftExceeded(os.str());
  }
}

double hermite(double y0, double d0, double y1, double d1, double h, double s) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * d1;
}

Vec2 hermite2(const Vec2& y0, const Vec2& d0, const Vec2& y1, const Vec2& d1, double h, double s) {
  return {hermite(y0.x, d0.x, y1.x, d1.x, h, s), hermite(y0.y, d0.y, y1.y, d1.y, h, s)};
}

double fundamental_det(const std::array<Variation, 4>& v) {
  double a[4][4];
  for (int c = 0; c < 4; ++c) {
    a[0][c] = v[c].dq.x;
    a[1][c] = v[c].dq.y;
    a[2][c] = v[c].dp.x;
    a[3][c] = v[c].dp.y;
  }
  double det = 1.0;
  for (int c = 0; c < 4; ++c) {
    int piv = c;
    for (int r = c + 1; r < 4; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      for (int k = 0; k < 4; ++k) std::swap(a[c][k], a[piv][k]);
      det = -det;
    }
    det *= a[c][c];
    for (int r = c + 1; r < 4; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return det;
}

std::array<Variation, 2> initial_pair() {
  return {Variation{{0, 0}, {1, 0}}, Variation{{0, 0}, {0, 1}}};
}

}  // namespace

double min_period(const Model& m) { return 2.0 * std::numbers::pi / m.max_omega(); }

double default_time_step(const Model& m) { return min_period(m) / 2000.0; }

namespace detail {

void symplectic_step(const Model& m, PhaseState& s, Variation* vars, int nvars, double dt) {
  const double inv_m = 1.0 / m.mass;
  for (double w : kWeights) {
    const double h = w * dt;
    // kick-drift-kick and its exact tangent map
    Vec2 g = grad_potential(m, s.q);
    Sym2 hess = hessian_potential(m, s.q);
    s.p -= 0.5 * h * g;
    for (int i = 0; i < nvars; ++i) vars[i].dp -= 0.5 * h * (hess * vars[i].dq);
    s.q += h * inv_m * s.p;
    for (int i = 0; i < nvars; ++i) vars[i].dq += h * inv_m * vars[i].dp;
    g = grad_potential(m, s.q);
    hess = hessian_potential(m, s.q);
    s.p -= 0.5 * h * g;
    for (int i = 0; i < nvars; ++i) vars[i].dp -= 0.5 * h * (hess * vars[i].dq);
  }
}

PhaseState HermiteStep::state_at(double t) const {
  const double s = (t - t0) / h;
  PhaseState out;
  out.q = hermite2(s0.q, qdot0, s1.q, qdot1, h, s);
  out.p = hermite2(s0.p, a0 * mass, s1.p, a1 * mass, h, s);
  return out;
}

std::array<Vec2, 2> HermiteStep::dq_at(double t) const {
  const double s = (t - t0) / h;
  return {hermite2(v0[0].dq, v0[0].dp / mass, v1[0].dq, v1[0].dp / mass, h, s),
          hermite2(v0[1].dq, v0[1].dp / mass, v1[1].dq, v1[1].dp / mass, h, s)};
}

double HermiteStep::det_at(double t) const {
  const auto dq = dq_at(t);
  return cross(dq[0], dq[1]);
}

HermiteStep make_hermite_step(const Model& m, double t0, double h, const PhaseState& s0,
                              const PhaseState& s1, const std::array<Variation, 2>& v0,
                              const std::array<Variation, 2>& v1) {
  HermiteStep st;
  st.t0 = t0;
  st.h = h;
  st.mass = m.mass;
  st.s0 = s0;
  st.s1 = s1;
  st.v0 = v0;
  st.v1 = v1;
  st.qdot0 = s0.p / m.mass;
  st.qdot1 = s1.p / m.mass;
  st.a0 = -grad_potential(m, s0.q) / m.mass;
  st.a1 = -grad_potential(m, s1.q) / m.mass;
  return st;
}

std::optional<CausticPoint> refine_det_zero(const HermiteStep& st, double det_tol) {
  auto normalized_det = [&](double t) {
    const auto dq = st.dq_at(t);
    const double scale = norm(dq[0]) * norm(dq[1]);
    return scale > 0.0 ? cross(dq[0], dq[1]) / scale : 0.0;
  };
  double lo = st.t0;
  double hi = st.t0 + st.h;
  double flo = normalized_det(lo);
  const double fhi = normalized_det(hi);
  if (flo == 0.0 || fhi == 0.0 || (flo > 0) == (fhi > 0)) return std::nullopt;
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double fm = normalized_det(mid);
    if (std::abs(fm) <= det_tol && hi - lo < 1e-12 * std::max(1.0, std::abs(mid))) break;
    if (fm == 0.0) break;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4e-16 * std::max(1.0, std::abs(mid))) break;
  }
  CausticPoint cp;
  const PhaseState s = st.state_at(mid);
  cp.position = s.q;
  cp.momentum = s.p;
  cp.t = mid;
  return cp;
}

}  // namespace detail

Trajectory integrate_trajectory(const Model& m, const Point2& q0, const Vec2& p0, double t_max,
                                double dt, int stride, double energy_tol) {
  m.validate();
  if (!(dt > 0.0) || !(t_max >= 0.0)) throw InvalidArgument("integrate_trajectory needs dt > 0, t_max >= 0");
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  if (!std::isfinite(q0.x) || !std::isfinite(q0.y) || !std::isfinite(p0.x) || !std::isfinite(p0.y))
    throw InvalidArgument("non-finite initial state");

  Trajectory traj;
  traj.model = m;
  traj.dt = dt;
  traj.stride = stride;
  PhaseState s{q0, p0};
  traj.energy = hamiltonian(m, s);
  const auto nsteps = static_cast<long>(std::ceil(t_max / dt - 1e-9));
  traj.samples.reserve(static_cast<size_t>(nsteps / stride + 2));
  traj.samples.push_back({0.0, s});
  double max_err = 0.0;
  for (long k = 1; k <= nsteps; ++k) {
    detail::symplectic_step(m, s, nullptr, 0, dt);
    const double t = static_cast<double>(k) * dt;
    check_energy(m, s, traj.energy, energy_tol, t, max_err);
    if (k % stride == 0 || k == nsteps) traj.samples.push_back({t, s});
  }
  return traj;
}

JacobiPair integrate_jacobi(const Trajectory& traj) {
  if (traj.stride != 1) throw InvalidArgument("integrate_jacobi requires a trajectory stored with stride 1");
  JacobiPair out;
  if (traj.samples.empty()) return out;
  out.samples.reserve(traj.samples.size());
  std::array<Variation, 4> v = {Variation{{0, 0}, {1, 0}}, Variation{{0, 0}, {0, 1}},
                                Variation{{1, 0}, {0, 0}}, Variation{{0, 1}, {0, 0}}};
  auto record = [&]() {
    JacobiSample js;
    js.v = {v[0], v[1]};
    js.det = cross(v[0].dq, v[1].dq);
    js.wronskian = fundamental_det(v);
    if (!std::isfinite(js.det) || !std::isfinite(js.wronskian))
      throw PropagationFailure("non-finite Jacobi solution");
    out.samples.push_back(js);
  };
  record();
  for (size_t k = 1; k < traj.samples.size(); ++k) {
    PhaseState s = traj.samples[k - 1].state;
    const double h = traj.samples[k].t - traj.samples[k - 1].t;
    detail::symplectic_step(traj.model, s, v.data(), 4, h);
    record();
  }
  return out;
}

std::vector<CausticPoint> detect_caustic_points(const Trajectory& traj, const JacobiPair& jac) {
  std::vector<CausticPoint> pts;
  const size_t n = std::min(traj.samples.size(), jac.samples.size());
  for (size_t k = 1; k < n; ++k) {
    const double d0 = jac.samples[k - 1].det;
    const double d1 = jac.samples[k].det;
    if (d0 == 0.0 || d1 == 0.0 || (d0 > 0) == (d1 > 0)) continue;
    const auto& a = traj.samples[k - 1];
    const auto& b = traj.samples[k];
    const auto st = detail::make_hermite_step(traj.model, a.t, b.t - a.t, a.state, b.state,
                                              jac.samples[k - 1].v, jac.samples[k].v);
    if (auto cp = detail::refine_det_zero(st, 1e-8)) pts.push_back(*cp);
  }
  return pts;
}

CausticTrace trace_caustic(const Model& m, const Point2& q0, const Vec2& p0,
                           const CausticTraceOptions& opts, const KeepGoing& keep_going) {
  m.validate();
  const double dt = opts.dt > 0.0 ? opts.dt : default_time_step(m);
  const double t_max = opts.t_max > 0.0 ? opts.t_max : 400.0 * min_period(m);
  CausticTrace out;
  PhaseState s{q0, p0};
  const double energy = hamiltonian(m, s);
  if (opts.record_stride > 0) {
    out.orbit.model = m;
    out.orbit.energy = energy;
    out.orbit.dt = dt;
    out.orbit.stride = opts.record_stride;
    out.orbit.samples.push_back({0.0, s});
  }
  std::array<Variation, 2> v = initial_pair();
  const auto nsteps = static_cast<long>(std::ceil(t_max / dt - 1e-9));
  double det_prev = 0.0;
  for (long k = 1; k <= nsteps; ++k) {
    const PhaseState s_prev = s;
    const auto v_prev = v;
    detail::symplectic_step(m, s, v.data(), 2, dt);
    const double t = static_cast<double>(k) * dt;
    check_energy(m, s, energy, opts.energy_tol, t, out.max_energy_error);
    const double det = cross(v[0].dq, v[1].dq);
    bool stop = false;
    if (det_prev != 0.0 && det != 0.0 && (det_prev > 0) != (det > 0)) {
      const auto st = detail::make_hermite_step(m, t - dt, dt, s_prev, s, v_prev, v);
      if (auto cp = detail::refine_det_zero(st, opts.det_tol)) {
        out.points.push_back(*cp);
        if (keep_going && !keep_going(out.points)) stop = true;
      }
    }
    det_prev = det;
    if (opts.record_stride > 0 && k % opts.record_stride == 0) out.orbit.samples.push_back({t, s});
    // Keep the Jacobi fields O(1): the determinant's sign is scale invariant,
    // and both fields grow linearly in time.
    const double scale = std::max(norm(v[0].dq) + norm(v[0].dp), norm(v[1].dq) + norm(v[1].dp));
    if (scale > 1e6) {
      for (auto& vi : v) {
        vi.dq *= 1.0 / scale;
        vi.dp *= 1.0 / scale;
      }
      det_prev = cross(v[0].dq, v[1].dq);
    }
    out.t_end = t;
    if (stop) break;
  }
  return out;
}

}  // namespace causwave
