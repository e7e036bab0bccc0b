#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "causwave/geometry.hpp"
#include "causwave/potential.hpp"

namespace causwave {

struct TrajectorySample {
  double t = 0.0;
  PhaseState state;
};

struct Trajectory {
  Model model;
  double energy = 0.0;
  double dt = 0.0;       // integrator step
  int stride = 1;        // integrator steps between stored samples
  std::vector<TrajectorySample> samples;
};

/// Variational (Jacobi) solution: a tangent vector (dq, dp) carried along the flow.
struct Variation {
  Vec2 dq;
  Vec2 dp;
};

struct JacobiSample {
  std::array<Variation, 2> v;
  double det = 0.0;         // det[dq1 | dq2]
  double wronskian = 1.0;   // det of the full 4x4 tangent map, identically 1
};

/// Two Jacobi solutions started from dq = 0, dp = e_x and dp = e_y.
struct JacobiPair {
  std::vector<JacobiSample> samples;
};

struct CausticPoint {
  Point2 position;
  Vec2 momentum;
  double t = 0.0;
  std::optional<int> arc_hint;
};

// Default step T_min / 2000 with T_min = 2 pi / max(wx, wy).
double default_time_step(const Model& model);
double min_period(const Model& model);

/// Sixth-order symplectic composition of Stormer-Verlet. Stores every
/// `stride`-th step. Throws EnergyDriftExceeded if |H - E| exceeds
/// `energy_tol` * max(1, E) at any stored or checked step.
Trajectory integrate_trajectory(const Model& model, const Point2& q0, const Vec2& p0, double t_max,
                                double dt, int stride = 1, double energy_tol = 1e-9);

/// Propagates the tangent map of the same discrete flow along `traj`.
/// Requires stride == 1 so that every integrator step is available.
JacobiPair integrate_jacobi(const Trajectory& traj);

/// Sign changes of det[dq1 | dq2], refined by bisection on cubic Hermite
/// interpolants of the orbit and of both variations.
std::vector<CausticPoint> detect_caustic_points(const Trajectory& traj, const JacobiPair& jacobi);

struct CausticTraceOptions {
  double dt = 0.0;              // <= 0 selects default_time_step
  double t_max = 0.0;           // <= 0 selects 400 T_min
  double energy_tol = 1e-9;
  int record_stride = 0;        // > 0 stores every stride-th step in `orbit`
  double det_tol = 1e-8;
};

struct CausticTrace {
  std::vector<CausticPoint> points;
  Trajectory orbit;             // empty unless record_stride > 0
  double max_energy_error = 0.0;
  double t_end = 0.0;
};

/// Fused orbit + Jacobi integration with on-the-fly caustic detection. Used by
/// the pipeline so that long orbits need not be stored in full. An optional
/// `keep_going` callback is polled after every detected point; returning false
/// stops the integration early.
using KeepGoing = std::function<bool(const std::vector<CausticPoint>&)>;
CausticTrace trace_caustic(const Model& model, const Point2& q0, const Vec2& p0,
                           const CausticTraceOptions& opts, const KeepGoing& keep_going = {});

namespace detail {

// One symplectic step of the state and (optionally) a set of tangent vectors.
void symplectic_step(const Model& model, PhaseState& s, Variation* vars, int nvars, double dt);

struct HermiteStep {
  double t0 = 0.0;
  double h = 0.0;
  double mass = 1.0;
  PhaseState s0, s1;
  std::array<Variation, 2> v0, v1;
  Vec2 qdot0, qdot1;  // p / m
  Vec2 a0, a1;        // -grad U / m

  PhaseState state_at(double t) const;
  std::array<Vec2, 2> dq_at(double t) const;
  double det_at(double t) const;
};

HermiteStep make_hermite_step(const Model& model, double t0, double h, const PhaseState& s0,
                              const PhaseState& s1, const std::array<Variation, 2>& v0,
                              const std::array<Variation, 2>& v1);

std::optional<CausticPoint> refine_det_zero(const HermiteStep& step, double det_tol);

}  // namespace detail

}  // namespace causwave
