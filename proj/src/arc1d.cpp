#include "causwave/arc1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "causwave/errors.hpp"

namespace causwave {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPathIntervals = 4096;

double gauss_g(const CausticArc& arc, double a, double b) {
  return boost::math::quadrature::gauss<double, 7>::integrate(
      [&](double u) { return arc_scale_factor(arc, u); }, a, b);
}

}  // namespace

std::string to_string(ArcMethod m) {
  switch (m) {
    case ArcMethod::SE: return "se";
    case ArcMethod::WKB: return "wkb";
    case ArcMethod::QHJE: return "qhje";
  }
  return "?";
}

ArcPath::ArcPath(const Model& model, const CausticArc& arc) : model_(model), arc_(arc) {
  if (!(arc.u_hi > arc.u_lo)) throw InvalidArgument("arc span is empty");
  u_tab_.resize(kPathIntervals + 1);
  s_tab_.resize(kPathIntervals + 1);
  s_tab_[0] = 0.0;
  for (int i = 0; i <= kPathIntervals; ++i)
    u_tab_[static_cast<size_t>(i)] = arc.u_lo + arc.span() * i / kPathIntervals;
  for (int i = 1; i <= kPathIntervals; ++i)
    s_tab_[static_cast<size_t>(i)] =
        s_tab_[static_cast<size_t>(i - 1)] + gauss_g(arc, u_tab_[static_cast<size_t>(i - 1)], u_tab_[static_cast<size_t>(i)]);
  length_ = s_tab_.back();
  t_lo_ = normalized(arc.tangent(arc.u_lo));
  t_hi_ = normalized(arc.tangent(arc.u_hi));
}

double ArcPath::s_of_u(double u) const {
  u = std::clamp(u, arc_.u_lo, arc_.u_hi);
  const double pos = (u - arc_.u_lo) / arc_.span() * kPathIntervals;
  const auto i = std::min<size_t>(static_cast<size_t>(pos), kPathIntervals - 1);
  return s_tab_[i] + gauss_g(arc_, u_tab_[i], u);
}

double ArcPath::u_of_s(double s) const {
  if (s <= 0.0) return arc_.u_lo;
  if (s >= length_) return arc_.u_hi;
  const auto it = std::upper_bound(s_tab_.begin(), s_tab_.end(), s);
  const auto i = static_cast<size_t>(std::distance(s_tab_.begin(), it)) - 1;
  const double frac = (s - s_tab_[i]) / (s_tab_[i + 1] - s_tab_[i]);
  double u = u_tab_[i] + frac * (u_tab_[i + 1] - u_tab_[i]);
  for (int it2 = 0; it2 < 3; ++it2) {
    const double err = s_tab_[i] + gauss_g(arc_, u_tab_[i], u) - s;
    u -= err / arc_scale_factor(arc_, u);
    if (std::abs(err) < 1e-15) break;
  }
  return u;
}

Point2 ArcPath::point(double s) const {
  if (s < 0.0) return arc_.point(arc_.u_lo) + s * t_lo_;
  if (s > length_) return arc_.point(arc_.u_hi) + (s - length_) * t_hi_;
  return arc_.point(u_of_s(s));
}

ArcGrid make_arc_grid(const ArcPath& path, double energy, const ArcGridOptions& opts) {
  const Model& m = path.model();
  const double L = path.length();
  ArcGrid g;
  g.h = L / opts.span_intervals;
  const double c = 2.0 * m.mass / (m.hbar * m.hbar);
  auto tail_steps = [&](double sign) {
    double acc = 0.0;
    double kprev = 0.0;
    int j = 0;
    const int jmax = static_cast<int>(opts.max_tail_factor * opts.span_intervals);
    while (acc < opts.tail_decay && j < jmax) {
      ++j;
      const double s = sign < 0 ? -j * g.h : L + j * g.h;
      const double kap = std::sqrt(std::max(0.0, c * (path.potential(s) - energy)));
      acc += 0.5 * (kap + kprev) * g.h;
      kprev = kap;
    }
    return j + 2;
  };
  const int nl = tail_steps(-1.0);
  const int nr = tail_steps(+1.0);
  const int n = nl + opts.span_intervals + nr + 1;
  g.s.resize(static_cast<size_t>(n));
  g.k2.resize(static_cast<size_t>(n));
  g.potential.resize(static_cast<size_t>(n));
  g.i_lo = static_cast<size_t>(nl);
  g.i_hi = static_cast<size_t>(nl + opts.span_intervals);
  for (int i = 0; i < n; ++i) {
    const double s = (i < nl + opts.span_intervals) ? (i - nl) * g.h : L + (i - nl - opts.span_intervals) * g.h;
    g.s[static_cast<size_t>(i)] = s;
    const double u = path.potential(s);
    g.potential[static_cast<size_t>(i)] = u;
    g.k2[static_cast<size_t>(i)] = c * (energy - u);
  }
  // vertices sit on U = E to within the vertex refinement tolerance
  g.k2[g.i_lo] = 0.0;
  g.k2[g.i_hi] = 0.0;
  return g;
}

double ArcWave::at_s(const std::vector<double>& field, double s) const {
  const double pos = (s - grid.s.front()) / grid.h;
  const auto n = field.size();
  if (pos <= 0.0) return field.front();
  if (pos >= static_cast<double>(n - 1)) return field.back();
  const auto i = static_cast<size_t>(pos);
  const double fr = pos - static_cast<double>(i);
  return (1.0 - fr) * field[i] + fr * field[i + 1];
}

double ArcWave::at_u(const std::vector<double>& field, const ArcPath& path, double u) const {
  return at_s(field, path.s_of_u(u));
}

namespace {

void fill_geometry(ArcWave& w, const ArcPath& path) {
  const auto n = w.grid.s.size();
  w.u.assign(n, std::numeric_limits<double>::quiet_NaN());
  w.x.resize(n);
  w.y.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const double s = w.grid.s[i];
    const Point2 p = path.point(s);
    w.x[i] = p.x;
    w.y[i] = p.y;
    if (i >= w.grid.i_lo && i <= w.grid.i_hi) w.u[i] = path.u_of_s(s);
  }
}

ArcWave base_wave(const Model& model, const CausticArc& arc, double energy, ArcMethod method,
                  const ArcPath& path, const ArcGridOptions& opts) {
  model.validate();
  ArcWave w;
  w.k = arc.k;
  w.method = method;
  w.energy = energy;
  w.hbar = model.hbar;
  w.length = path.length();
  w.vertex = arc.vertex;
  w.orientation = arc.orientation;
  w.grid = make_arc_grid(path, energy, opts);
  fill_geometry(w, path);
  return w;
}

// Numerov integration of psi'' = -k2 psi from `first` towards `last` (either
// direction), seeded with a growing WKB exponential. Rescales to stay finite.
std::vector<double> numerov_inward(const ArcGrid& g, size_t first, size_t last) {
  const auto n = g.s.size();
  std::vector<double> psi(n, 0.0);
  const long step = last > first ? 1 : -1;
  const double h2 = g.h * g.h;
  auto kap = [&](size_t i) { return std::sqrt(std::max(0.0, -g.k2[i])); };
  const size_t i0 = first;
  const auto i1 = static_cast<size_t>(static_cast<long>(first) + step);
  psi[i0] = 1.0;
  const double k0 = kap(i0), k1 = kap(i1);
  psi[i1] = (k1 > 0.0 && k0 > 0.0 ? std::sqrt(k0 / k1) : 1.0) * std::exp(0.5 * g.h * (k0 + k1));
  auto f = [&](size_t i) { return 1.0 + h2 * g.k2[i] / 12.0; };
  size_t prev = i0, cur = i1;
  while (cur != last) {
    const auto next = static_cast<size_t>(static_cast<long>(cur) + step);
    psi[next] = ((12.0 - 10.0 * f(cur)) * psi[cur] - f(prev) * psi[prev]) / f(next);
    if (std::abs(psi[next]) > 1e150) {
      for (size_t j = std::min(first, next); j <= std::max(first, next); ++j) psi[j] *= 1e-150;
    }
    prev = cur;
    cur = next;
  }
  return psi;
}

double numerov_derivative(const ArcGrid& g, const std::vector<double>& psi, size_t i) {
  return (psi[i + 1] - psi[i - 1]) / (2.0 * g.h) +
         (g.h / 12.0) * (g.k2[i + 1] * psi[i + 1] - g.k2[i - 1] * psi[i - 1]);
}

// Continuous Prufer angle at node `at` for a solution started at `from`.
double prufer_angle(const std::vector<double>& psi, double dpsi_dir, size_t from, size_t at, double kbar) {
  int sign_changes = 0;
  const long step = at > from ? 1 : -1;
  double last = 0.0;
  for (auto i = static_cast<long>(from); i != static_cast<long>(at) + step; i += step) {
    const double v = psi[static_cast<size_t>(i)];
    if (v != 0.0) {
      if (last != 0.0 && (v > 0) != (last > 0)) ++sign_changes;
      last = v;
    }
  }
  const double parity = (sign_changes % 2 == 0) ? 1.0 : -1.0;
  // the seed is positive, so after j zeros the sign of psi is (-1)^j
  double ang = std::atan2(parity * psi[at], parity * dpsi_dir / kbar);
  if (ang < 0.0) ang += kPi;
  return sign_changes * kPi + ang;
}

int count_nodes(const std::vector<double>& psi, size_t lo, size_t hi) {
  int n = 0;
  double last = 0.0;
  for (size_t i = lo; i <= hi; ++i) {
    if (psi[i] == 0.0) continue;
    if (last != 0.0 && (psi[i] > 0) != (last > 0)) ++n;
    last = psi[i];
  }
  return n;
}

}  // namespace

ArcWave solve_arc_se(const Model& model, const CausticArc& arc, double energy, int target_nodes,
                     const ArcGridOptions& opts) {
  const ArcPath path(model, arc);
  ArcWave w = base_wave(model, arc, energy, ArcMethod::SE, path, opts);
  const ArcGrid& g = w.grid;
  const auto n = g.s.size();
  const size_t mid = (g.i_lo + g.i_hi) / 2;

  auto left = numerov_inward(g, 0, mid + 1);
  auto right = numerov_inward(g, n - 1, mid - 1);
  for (double v : left)
    if (!std::isfinite(v)) throw StiffnessFailure("left Numerov sweep overflowed");
  for (double v : right)
    if (!std::isfinite(v)) throw StiffnessFailure("right Numerov sweep overflowed");

  const double kbar = std::sqrt(std::max(g.k2[mid], std::pow(kPi / w.length, 2)));
  const double dl = numerov_derivative(g, left, mid);
  const double dr = numerov_derivative(g, right, mid);
  const double th_l = prufer_angle(left, dl, 0, mid, kbar);
  const double th_r = prufer_angle(right, -dr, n - 1, mid, kbar);
  w.quantum_number = target_nodes;
  w.mismatch = (th_l + th_r) / kPi - (target_nodes + 1);
  w.regularity = std::abs(std::sin(th_l + th_r));

  // Assemble: left piece up to mid, right piece scaled to agree at mid.
  const double nl = std::hypot(left[mid], dl / kbar);
  double scale;
  if (std::abs(left[mid]) / nl > std::abs(dl / kbar) / nl)
    scale = left[mid] / right[mid];
  else
    scale = dl / dr;
  w.psi.resize(n);
  for (size_t i = 0; i <= mid; ++i) w.psi[i] = left[i];
  for (size_t i = mid + 1; i < n; ++i) w.psi[i] = scale * right[i];
  double norm2 = 0.0;
  for (size_t i = 0; i < n; ++i) norm2 += w.psi[i] * w.psi[i] * g.h;
  double sc = 1.0 / std::sqrt(norm2);
  if (w.psi[g.i_lo] < 0.0) sc = -sc;
  for (auto& v : w.psi) v *= sc;
  w.nodes = count_nodes(w.psi, g.i_lo, g.i_hi);
  return w;
}

ArcWave wkb_arc(const Model& model, const CausticArc& arc, double energy, int target_n,
                double offset, const ArcGridOptions& opts) {
  const ArcPath path(model, arc);
  ArcWave w = base_wave(model, arc, energy, ArcMethod::WKB, path, opts);
  const ArcGrid& g = w.grid;
  const auto n = g.s.size();
  const double two_m = 2.0 * model.mass;
  for (size_t i = g.i_lo + 1; i < g.i_hi; ++i) {
    if (g.potential[i] > energy * (1.0 + 1e-9)) {
      std::ostringstream os;
      os << "U_k = " << g.potential[i] << " > E = " << energy << " at s = " << g.s[i] << " on arc " << arc.k;
      throw ClassicallyForbidden(os.str());
    }
  }
  auto p_of_s = [&](double s) { return std::sqrt(std::max(0.0, two_m * (energy - path.potential(s)))); };
  w.p_cl.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (size_t i = g.i_lo; i <= g.i_hi; ++i) w.p_cl[i] = std::sqrt(std::max(0.0, two_m * (energy - g.potential[i])));
  // cumulative int p ds from the u_lo vertex
  std::vector<double> cum(n, 0.0);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (size_t i = g.i_lo + 1; i <= g.i_hi; ++i) {
    const double a = g.s[i - 1], b = g.s[i];
    double piece;
    if (i == g.i_lo + 1 || i == g.i_hi)
      piece = ts.integrate(p_of_s, a, b);
    else
      piece = boost::math::quadrature::gauss<double, 4>::integrate(p_of_s, a, b);
    cum[i] = cum[i - 1] + piece;
  }
  w.action_total = cum[g.i_hi];
  w.action_offset = offset;
  w.X_cl.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (size_t i = g.i_lo; i <= g.i_hi; ++i)
    w.X_cl[i] = offset + (arc.orientation > 0 ? cum[i] : w.action_total - cum[i]);
  const double units = w.action_total / (kPi * model.hbar);
  const int nearest = std::max(0, static_cast<int>(std::lround(units - 0.5)));
  w.quantum_number = target_n >= 0 ? target_n : nearest;
  w.mismatch = units - (w.quantum_number + 0.5);
  w.regularity = std::abs(w.mismatch);
  w.nodes = nearest;
  // WKB arc wave for reference: psi ~ sin(X / hbar + pi/4) / sqrt(p)
  w.psi.assign(n, 0.0);
  for (size_t i = g.i_lo + 1; i < g.i_hi; ++i)
    w.psi[i] = std::sin((w.X_cl[i] - offset) / model.hbar + kPi / 4) / std::sqrt(w.p_cl[i]);
  return w;
}

double match_arc_constants(std::span<ArcWave> waves, int first) {
  const auto nw = static_cast<int>(waves.size());
  if (nw == 0) return 0.0;
  if (first < 0 || first >= nw) throw InvalidArgument("first arc out of range");
  auto vertex_value = [](const ArcWave& w, int v) {
    return w.vertex[0] == v ? w.psi[w.grid.i_lo] : w.psi[w.grid.i_hi];
  };
  auto max_abs = [](const ArcWave& w) {
    double m = 0.0;
    for (size_t i = w.grid.i_lo; i <= w.grid.i_hi; ++i) m = std::max(m, std::abs(w.psi[i]));
    return m;
  };
  std::vector<double> c(static_cast<size_t>(nw), 0.0);
  std::vector<bool> done(static_cast<size_t>(nw), false);
  c[static_cast<size_t>(first)] = 1.0;
  done[static_cast<size_t>(first)] = true;
  std::vector<int> queue{first};
  std::vector<std::array<int, 3>> unused;  // (arc a, arc b, vertex) links not used for propagation
  for (size_t qi = 0; qi < queue.size(); ++qi) {
    const int a = queue[qi];
    const auto& wa = waves[static_cast<size_t>(a)];
    for (int v : wa.vertex) {
      for (int b = 0; b < nw; ++b) {
        if (b == a) continue;
        const auto& wb = waves[static_cast<size_t>(b)];
        if (wb.vertex[0] != v && wb.vertex[1] != v) continue;
        const double va = c[static_cast<size_t>(a)] * vertex_value(wa, v);
        const double vb = vertex_value(wb, v);
        if (done[static_cast<size_t>(b)]) {
          if (a < b) unused.push_back({a, b, v});
          continue;
        }
        if (std::abs(vb) <= 1e-10 * max_abs(wb) || std::abs(vertex_value(wa, v)) <= 1e-10 * max_abs(wa)) {
          std::ostringstream os;
          os << "arc " << wb.k << " wave vanishes at vertex " << v;
          throw ZeroAtVertex(os.str());
        }
        c[static_cast<size_t>(b)] = va / vb;
        done[static_cast<size_t>(b)] = true;
        queue.push_back(b);
      }
    }
  }
  double closure = 0.0;
  for (const auto& [a, b, v] : unused) {
    const double va = c[static_cast<size_t>(a)] * vertex_value(waves[static_cast<size_t>(a)], v);
    const double vb = c[static_cast<size_t>(b)] * vertex_value(waves[static_cast<size_t>(b)], v);
    if (va == vb) continue;
    closure = std::max(closure, std::abs(va - vb) / std::max(std::abs(va), std::abs(vb)));
  }
  for (int i = 0; i < nw; ++i) {
    auto& w = waves[static_cast<size_t>(i)];
    const double f = c[static_cast<size_t>(i)] / w.c;
    for (auto& v : w.psi) v *= f;
    for (auto& v : w.A) v *= f;
    w.c = c[static_cast<size_t>(i)];
  }
  return closure;
}

}  // namespace causwave
