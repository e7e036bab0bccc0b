#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/roots.hpp>

#include "causwave/arc1d.hpp"
#include "causwave/errors.hpp"

namespace causwave {

namespace {

constexpr double kPi = std::numbers::pi;

// Numerov from index a towards b (either direction) with y(a), y'(a) given in
// the direction of travel. The first step uses a Taylor expansion.
std::vector<double> numerov_ivp(const std::vector<double>& k2, double h, size_t a, size_t b, double y0,
                                double d0) {
  std::vector<double> y(k2.size(), 0.0);
  const long step = b > a ? 1 : -1;
  auto at = [&](size_t i, long off) { return k2[static_cast<size_t>(static_cast<long>(i) + off * step)]; };
  // derivatives of k2 along the travel direction, one-sided
  const double q0 = k2[a];
  const double q1 = (-3.0 * q0 + 4.0 * at(a, 1) - at(a, 2)) / (2.0 * h);
  const double q2 = (q0 - 2.0 * at(a, 1) + at(a, 2)) / (h * h);
  const double y2 = -q0 * y0;
  const double y3 = -q1 * y0 - q0 * d0;
  const double y4 = -q2 * y0 - 2.0 * q1 * d0 - q0 * y2;
  const double y5 = -3.0 * q2 * d0 - 3.0 * q1 * y2 - q0 * y3;
  y[a] = y0;
  const auto a1 = static_cast<size_t>(static_cast<long>(a) + step);
  y[a1] = y0 + h * d0 + h * h / 2 * y2 + std::pow(h, 3) / 6 * y3 + std::pow(h, 4) / 24 * y4 +
          std::pow(h, 5) / 120 * y5;
  const double h2 = h * h;
  auto f = [&](size_t i) { return 1.0 + h2 * k2[i] / 12.0; };
  size_t prev = a, cur = a1;
  while (cur != b) {
    const auto next = static_cast<size_t>(static_cast<long>(cur) + step);
    y[next] = ((12.0 - 10.0 * f(cur)) * y[cur] - f(prev) * y[prev]) / f(next);
    prev = cur;
    cur = next;
  }
  return y;
}

double fd_derivative(const std::vector<double>& y, const std::vector<double>& k2, double h, size_t i) {
  return (y[i + 1] - y[i - 1]) / (2.0 * h) + (h / 12.0) * (k2[i + 1] * y[i + 1] - k2[i - 1] * y[i - 1]);
}

// Log-derivative psi'/psi of the solution decaying towards grid index `far`,
// integrated by RK4 on the Riccati equation eta' = -k2 - eta^2 up to `to`.
std::vector<double> riccati_decay(const std::vector<double>& k2, double h, size_t far, size_t to) {
  std::vector<double> eta(k2.size(), std::numeric_limits<double>::quiet_NaN());
  const long step = to > far ? 1 : -1;
  const double ds = step * h;
  const double kap = std::sqrt(std::max(0.0, -k2[far]));
  eta[far] = step > 0 ? kap : -kap;
  auto rhs = [&](double q, double e) { return -q - e * e; };
  size_t i = far;
  while (i != to) {
    const auto j = static_cast<size_t>(static_cast<long>(i) + step);
    const double qa = k2[i], qb = k2[j], qm = 0.5 * (qa + qb);
    const double e = eta[i];
    const double r1 = rhs(qa, e);
    const double r2 = rhs(qm, e + 0.5 * ds * r1);
    const double r3 = rhs(qm, e + 0.5 * ds * r2);
    const double r4 = rhs(qb, e + ds * r3);
    eta[j] = e + ds / 6.0 * (r1 + 2 * r2 + 2 * r3 + r4);
    i = j;
  }
  return eta;
}

struct Frame {
  std::vector<double> rho, drho, theta;
  double theta_end = 0.0;
};

// rho, rho' and the continuous phase on [a, b] from two fundamental solutions.
Frame build_frame(const std::vector<double>& ya, const std::vector<double>& yb, const std::vector<double>& dya,
                  const std::vector<double>& dyb, size_t a, size_t b, double rho0, double drho0) {
  Frame fr;
  const size_t n = b - a + 1;
  fr.rho.resize(n);
  fr.drho.resize(n);
  fr.theta.resize(n);
  double prev = 0.0, wraps = 0.0;
  for (size_t j = 0; j < n; ++j) {
    const size_t i = a + j;
    const double u1 = rho0 * ya[i] + drho0 * yb[i];
    const double u2 = yb[i] / rho0;
    const double d1 = rho0 * dya[i] + drho0 * dyb[i];
    const double d2 = dyb[i] / rho0;
    const double r = std::hypot(u1, u2);
    fr.rho[j] = r;
    fr.drho[j] = (u1 * d1 + u2 * d2) / r;
    double ang = std::atan2(u2, u1);
    if (j > 0 && ang + wraps < prev - kPi) wraps += 2 * kPi;
    ang += wraps;
    fr.theta[j] = ang;
    prev = ang;
  }
  fr.theta_end = fr.theta.back();
  return fr;
}

}  // namespace

ArcWave solve_arc_qhje(const Model& model, const CausticArc& arc, double energy, int target_n, double offset,
                       const ArcGridOptions& opts) {
  if (target_n < 0) throw InvalidArgument("target quantum number must be non-negative");
  model.validate();
  const ArcPath path(model, arc);
  ArcWave w;
  w.k = arc.k;
  w.method = ArcMethod::QHJE;
  w.energy = energy;
  w.hbar = model.hbar;
  w.length = path.length();
  w.vertex = arc.vertex;
  w.orientation = arc.orientation;
  w.grid = make_arc_grid(path, energy, opts);
  w.quantum_number = target_n;
  w.action_offset = offset;
  const ArcGrid& g = w.grid;
  const size_t n = g.s.size();
  {
    w.u.assign(n, std::numeric_limits<double>::quiet_NaN());
    w.x.resize(n);
    w.y.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const Point2 p = path.point(g.s[i]);
      w.x[i] = p.x;
      w.y[i] = p.y;
      if (i >= g.i_lo && i <= g.i_hi) w.u[i] = path.u_of_s(g.s[i]);
    }
  }

  // Work in traversal order: index 0 is the far end behind the start vertex.
  const bool fwd = arc.orientation > 0;
  std::vector<double> k2 = g.k2;
  if (!fwd) std::reverse(k2.begin(), k2.end());
  const size_t a = fwd ? g.i_lo : n - 1 - g.i_hi;
  const size_t b = fwd ? g.i_hi : n - 1 - g.i_lo;
  const double h = g.h;
  const double hbar = model.hbar;

  const auto eta_in = riccati_decay(k2, h, 0, a);
  const auto eta_out = riccati_decay(k2, h, n - 1, b);
  const double eta_s = eta_in[a];
  const double eta_e = eta_out[b];

  const auto ya = numerov_ivp(k2, h, a, b + 1, 1.0, 0.0);
  const auto yb = numerov_ivp(k2, h, a, b + 1, 0.0, 1.0);
  std::vector<double> dya(n, 0.0), dyb(n, 0.0);
  dya[a] = 0.0;
  dyb[a] = 1.0;
  for (size_t i = a + 1; i <= b; ++i) {
    dya[i] = fd_derivative(ya, k2, h, i);
    dyb[i] = fd_derivative(yb, k2, h, i);
  }

  const double target = (target_n + 0.5) * kPi;
  auto frame_for = [&](double t) {
    const double r0 = std::exp(t);
    return build_frame(ya, yb, dya, dyb, a, b, r0, r0 * (eta_s - 1.0 / (r0 * r0)));
  };
  auto theta_gap = [&](double t) { return frame_for(t).theta_end - target; };

  // bracket the pinned end phase on a log-spaced scan of rho0
  const int nscan = 161;
  double best_t = 0.0, best_gap = std::numeric_limits<double>::infinity();
  double prev_t = -8.0, prev_g = theta_gap(prev_t);
  bool found = false;
  double root = 0.0;
  for (int i = 1; i < nscan && !found; ++i) {
    const double t = -8.0 + 16.0 * i / (nscan - 1);
    const double gv = theta_gap(t);
    if (std::abs(gv) < std::abs(best_gap)) {
      best_gap = gv;
      best_t = t;
    }
    if ((gv > 0) != (prev_g > 0)) {
      boost::uintmax_t iters = 200;
      auto r = boost::math::tools::toms748_solve(theta_gap, prev_t, t, prev_g, gv,
                                                 boost::math::tools::eps_tolerance<double>(50), iters);
      root = 0.5 * (r.first + r.second);
      found = true;
    }
    prev_t = t;
    prev_g = gv;
  }
  const double t_star = found ? root : best_t;
  const Frame fr = frame_for(t_star);
  w.rho0 = std::exp(t_star);

  // end-vertex phase required by the decaying exterior, in (n pi, (n+1) pi)
  const double rho_e = fr.rho.back();
  const double cot_phi = rho_e * rho_e * (eta_e - fr.drho.back() / rho_e);
  const double phi_star = target_n * kPi + (0.5 * kPi - std::atan(cot_phi));
  const double phi = fr.theta_end + 0.25 * kPi;
  w.mismatch = (phi_star - phi) / kPi;
  // without a pinned frame the start-matched wave has the wrong node count
  w.regularity = found ? std::abs(std::sin(kPi * w.mismatch)) : 1.0;

  // fields in traversal order, then mapped back to grid order
  std::vector<double> X(n, std::numeric_limits<double>::quiet_NaN()), Y(n), A(n), psi(n);
  const double sq = std::sqrt(hbar);
  for (size_t i = a; i <= b; ++i) {
    const double r = fr.rho[i - a];
    X[i] = offset + hbar * fr.theta[i - a];
    Y[i] = hbar * std::log(sq / r);
    A[i] = r / sq;
    psi[i] = r * std::sin(fr.theta[i - a] + 0.25 * kPi);
  }
  // exterior: |psi| continues with the decaying log-derivatives
  const double psi_a = psi[a], psi_b = psi[b];
  for (size_t i = a; i-- > 0;) Y[i] = Y[i + 1] + 0.5 * hbar * h * (eta_in[i] + eta_in[i + 1]);
  for (size_t i = b + 1; i < n; ++i) Y[i] = Y[i - 1] - 0.5 * hbar * h * (eta_out[i] + eta_out[i - 1]);
  for (size_t i = 0; i < a; ++i) {
    A[i] = std::exp(-Y[i] / hbar);
    psi[i] = std::copysign(A[i] * std::abs(psi_a) / A[a], psi_a);
  }
  for (size_t i = b + 1; i < n; ++i) {
    A[i] = std::exp(-Y[i] / hbar);
    psi[i] = std::copysign(A[i] * std::abs(psi_b) / A[b], psi_b);
  }
  if (!fwd) {
    std::reverse(X.begin(), X.end());
    std::reverse(Y.begin(), Y.end());
    std::reverse(A.begin(), A.end());
    std::reverse(psi.begin(), psi.end());
  }
  w.X = std::move(X);
  w.Y = std::move(Y);
  w.A = std::move(A);
  w.psi = std::move(psi);
  w.c = 1.0;
  w.action_total = hbar * (fr.theta_end - fr.theta.front());
  int nodes = 0;
  for (size_t i = g.i_lo + 1; i <= g.i_hi; ++i)
    if ((w.psi[i] > 0) != (w.psi[i - 1] > 0) && w.psi[i] != 0.0) ++nodes;
  w.nodes = nodes;
  return w;
}

ArcResiduals qhje_residuals(const ArcWave& w, const Model& model) {
  if (w.method != ArcMethod::QHJE) throw InvalidArgument("residuals need a QHJE arc wave");
  const ArcGrid& g = w.grid;
  const double h = g.h;
  const double hbar = model.hbar;
  const double two_m = 2.0 * model.mass;
  auto d1 = [&](const std::vector<double>& f, size_t i) {
    return (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * h);
  };
  auto d2 = [&](const std::vector<double>& f, size_t i) {
    return (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1] - f[i + 2]) / (12 * h * h);
  };
  auto d3 = [&](const std::vector<double>& f, size_t i) {
    return (f[i - 3] - 8 * f[i - 2] + 13 * f[i - 1] - 13 * f[i + 1] + 8 * f[i + 2] - f[i + 3]) /
           (8 * h * h * h);
  };
  ArcResiduals r;
  double scale = 0.0;
  for (size_t i = g.i_lo + 3; i + 3 <= g.i_hi; ++i) {
    const double xs = d1(w.X, i);
    scale = std::max({scale, xs * xs, two_m * std::abs(w.energy - g.potential[i])});
  }
  for (size_t i = g.i_lo + 3; i + 3 <= g.i_hi; ++i) {
    const double xs = d1(w.X, i), xss = d2(w.X, i), xsss = d3(w.X, i);
    const double ys = d1(w.Y, i), yss = d2(w.Y, i);
    const double q = two_m * (w.energy - g.potential[i]);
    r.real_part = std::max(r.real_part, std::abs(-xs * xs + ys * ys - hbar * yss + q) / scale);
    r.imag_part = std::max(r.imag_part, std::abs(hbar * xss - 2.0 * xs * ys) / scale);
    const double rhs = q + hbar * hbar * (0.75 * xss * xss / (xs * xs) - 0.5 * xsss / xs);
    r.action = std::max(r.action, std::abs(xs * xs - rhs) / scale);
  }
  return r;
}

}  // namespace causwave
