#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "causwave/arc1d.hpp"
#include "causwave/errors.hpp"

namespace causwave {

namespace {

int target_for(int k, int n1, int n2) { return (k == 1 || k == 3) ? n1 : n2; }

bool lateral(int k) { return k == 0 || k == 2; }

}  // namespace

std::array<double, 2> harmonic_guess(const Model& model, int n1, int n2) {
  model.validate();
  if (n1 < 0 || n2 < 0) throw InvalidArgument("quantum numbers must be non-negative");
  const double ex = model.hbar * model.omega_x * (n1 + 0.5);
  const double ey = model.hbar * model.omega_y * (n2 + 0.5);
  const double xa = std::sqrt(2.0 * ex / model.mass) / model.omega_x;
  const double ya = std::sqrt(2.0 * ey / model.mass) / model.omega_y;
  return {ex + ey, std::atan2(-ya, -xa) + 2.0 * std::numbers::pi};
}

std::array<ArcWave, 4> solve_arcs(const Model& model, const Caustic& caustic, double energy, ArcMethod method,
                                  int n1, int n2, const ArcGridOptions& grid) {
  std::array<ArcWave, 4> waves;
  std::array<double, 4> end_action{};
  for (const TraversalStep& step : caustic.traversal) {
    const CausticArc& arc = caustic.arcs[static_cast<size_t>(step.arc)];
    const int n = target_for(step.arc, n1, n2);
    const double offset = step.predecessor < 0 ? 0.0 : end_action[static_cast<size_t>(step.predecessor)];
    ArcWave w;
    switch (method) {
      case ArcMethod::SE:
        w = solve_arc_se(model, arc, energy, n, grid);
        break;
      case ArcMethod::WKB:
        w = wkb_arc(model, arc, energy, n, offset, grid);
        break;
      case ArcMethod::QHJE:
        w = solve_arc_qhje(model, arc, energy, n, offset, grid);
        break;
    }
    end_action[static_cast<size_t>(step.arc)] = offset + w.action_total;
    waves[static_cast<size_t>(step.arc)] = std::move(w);
  }
  return waves;
}

EigenState evaluate_candidate(const Model& model, double energy, double theta, const EigenSearchOptions& opts) {
  EigenState st;
  st.energy = energy;
  st.theta = theta;
  st.vertex = equipotential_point_at_angle(model, energy, theta);
  const CausticTrace tr = trace_caustic(model, st.vertex, {0.0, 0.0}, opts.trace);
  st.touch_points = tr.points;
  const double e_orbit = eval_potential(model, st.vertex);
  Caustic probe = build_caustic(tr.points, model, e_orbit, opts.start_vertex, opts.fit);
  const int start = nearest_vertex(probe, st.vertex);
  st.caustic = start == opts.start_vertex ? std::move(probe) : orient_caustic(std::move(probe), start);

  st.waves = solve_arcs(model, st.caustic, e_orbit, opts.method, opts.n1, opts.n2, opts.grid);
  st.max_regularity = 0.0;
  for (const auto& w : st.waves) st.max_regularity = std::max(st.max_regularity, w.regularity);
  st.energy = e_orbit;
  return st;
}

namespace {

Eigen::Vector2d mismatch_pair(const EigenState& st) {
  Eigen::Vector2d f = Eigen::Vector2d::Zero();
  for (const auto& w : st.waves) (lateral(w.k) ? f[1] : f[0]) += 0.5 * w.mismatch;
  return f;
}

Eigen::Vector4d mismatches(const EigenState& st) {
  Eigen::Vector4d f;
  for (const auto& w : st.waves) f[w.k] = w.mismatch;
  return f;
}

bool converged(const EigenState& st, const EigenSearchOptions& opts) {
  for (const auto& w : st.waves) {
    if (w.regularity > opts.tol) return false;
    if (opts.method != ArcMethod::WKB && w.nodes != target_for(w.k, opts.n1, opts.n2)) return false;
  }
  return true;
}

}  // namespace

EigenState search_eigenstate(const Model& model, const EigenSearchOptions& opts) {
  model.validate();
  if (!(opts.tol > 0.0)) throw InvalidArgument("search tolerance must be positive");
  auto guess = harmonic_guess(model, opts.n1, opts.n2);
  if (opts.method != ArcMethod::WKB && opts.e0 <= 0.0 && opts.theta0 == 0.0) {
    // the torus quantized by classical actions is a close and robust start
    EigenSearchOptions pre = opts;
    pre.method = ArcMethod::WKB;
    pre.accept_unconverged = true;
    const EigenState ws = search_eigenstate(model, pre);
    guess = {ws.energy, ws.theta};
  }
  double e = opts.e0 > 0.0 ? opts.e0 : guess[0];
  double th = opts.theta0 != 0.0 ? opts.theta0 : guess[1];
  const bool bounded = opts.e_hi > opts.e_lo;
  if (bounded && (e < opts.e_lo || e > opts.e_hi)) e = 0.5 * (opts.e_lo + opts.e_hi);

  std::vector<SearchPoint> history;
  auto record = [&](const EigenState& st) {
    const auto f = mismatch_pair(st);
    history.push_back({st.energy, st.theta, f[0], f[1]});
  };

  EigenState cur = evaluate_candidate(model, e, th, opts);
  record(cur);
  Eigen::Vector4d f = mismatches(cur);
  const double de = 1e-4, dth = 1e-4;
  for (int iter = 0; iter < opts.max_iter && !converged(cur, opts); ++iter) {
    Eigen::Matrix<double, 4, 2> jac;
    jac.col(0) = (mismatches(evaluate_candidate(model, e + de, th, opts)) - f) / de;
    jac.col(1) = (mismatches(evaluate_candidate(model, e, th + dth, opts)) - f) / dth;
    const Eigen::Vector2d step = jac.colPivHouseholderQr().solve(-f);
    if (!step.allFinite()) break;
    // trust region of a few tenths in E and theta
    double lam = std::min(1.0, 1.0 / std::max(std::abs(step[0]) / 0.3, std::abs(step[1]) / 0.2));
    bool accepted = false;
    for (int k = 0; k < 6 && !accepted; ++k, lam *= 0.5) {
      const double e_new = e + lam * step[0];
      const double th_new = th + lam * step[1];
      if (bounded && (e_new < opts.e_lo || e_new > opts.e_hi)) continue;
      try {
        EigenState trial = evaluate_candidate(model, e_new, th_new, opts);
        const Eigen::Vector4d f_new = mismatches(trial);
        if (f_new.squaredNorm() < f.squaredNorm()) {
          e = e_new;
          th = th_new;
          cur = std::move(trial);
          f = f_new;
          record(cur);
          accepted = true;
        }
      } catch (const Error&) {
        // caustic construction can fail far from the torus family; shrink
      }
    }
    // no descent left: the four arc conditions are as consistent as they get
    if (!accepted || lam * std::abs(step[0]) < 1e-10) break;
  }
  cur.converged = converged(cur, opts);
  cur.history = std::move(history);
  if (cur.converged || opts.accept_unconverged) return cur;
  std::ostringstream os;
  os << "eigen-search for (" << opts.n1 << ", " << opts.n2 << ") stopped at E = " << cur.energy
     << " with max regularity " << cur.max_regularity;
  throw NotConverged(os.str(), cur.max_regularity);
}

}  // namespace causwave
