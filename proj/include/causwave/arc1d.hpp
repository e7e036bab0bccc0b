#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "causwave/caustic.hpp"
#include "causwave/potential.hpp"

namespace causwave {

/// Arc-length parametrization of a fitted arc plus its continuation beyond
/// both vertices along the end tangents. s = 0 at the u_lo vertex, s = S at
/// the u_hi vertex; s < 0 and s > S are the continuation.
class ArcPath {
 public:
  ArcPath(const Model& model, const CausticArc& arc);

  double length() const { return length_; }
  Point2 point(double s) const;
  double u_of_s(double s) const;   // clamped to the span
  double s_of_u(double u) const;
  double potential(double s) const { return eval_potential(model_, point(s)); }
  const CausticArc& arc() const { return arc_; }
  const Model& model() const { return model_; }

 private:
  Model model_;
  CausticArc arc_;
  double length_ = 0.0;
  std::vector<double> u_tab_;
  std::vector<double> s_tab_;
  Vec2 t_lo_, t_hi_;  // unit tangents at the ends (direction of increasing u)
};

struct ArcGridOptions {
  int span_intervals = 2000;  // grid intervals between the two vertices
  double tail_decay = 16.0;   // continuation extends until int kappa ds reaches this
  double max_tail_factor = 4.0;
};

/// Uniform s grid covering the span and both continuations; the vertices are
/// grid nodes i_lo and i_hi.
struct ArcGrid {
  double h = 0.0;
  std::vector<double> s;
  std::vector<double> k2;   // 2m (E - U) / hbar^2
  std::vector<double> potential;
  size_t i_lo = 0;
  size_t i_hi = 0;
};

ArcGrid make_arc_grid(const ArcPath& path, double energy, const ArcGridOptions& opts = {});

enum class ArcMethod { SE, WKB, QHJE };
std::string to_string(ArcMethod m);

struct ArcWave {
  int k = 0;
  ArcMethod method = ArcMethod::SE;
  double energy = 0.0;
  double hbar = 1.0;
  double length = 0.0;           // arc length between the vertices
  std::array<int, 2> vertex{0, 0};  // vertex ids at s = 0 and s = length
  int orientation = +1;
  ArcGrid grid;

  std::vector<double> u, x, y;   // u is NaN on the continuation
  std::vector<double> psi;       // real, scaled by c
  int nodes = 0;
  double regularity = 0.0;       // |sin| of the phase mismatch, 0 for a bound state
  double mismatch = 0.0;         // signed, in units of pi (SE/QHJE) or pi hbar (WKB)
  int quantum_number = 0;        // n used or found for this arc

  // WKB
  std::vector<double> p_cl;      // NaN outside the span
  std::vector<double> X_cl;      // oriented classical action, includes the traversal constant
  double action_total = 0.0;     // int p ds over the span
  double action_offset = 0.0;    // traversal constant added to X and X_cl

  // QHJE
  std::vector<double> X, Y, A;   // X on the span (+ constant), Y everywhere, A = exp(-Y / hbar) * c
  double c = 1.0;
  double rho0 = 0.0;             // Ermakov amplitude at the start vertex

  std::array<double, 2> psi_at_vertex() const { return {psi[grid.i_lo], psi[grid.i_hi]}; }
  /// Linear interpolation of a per-node field at arc parameter u (inside the span).
  double at_u(const std::vector<double>& field, const ArcPath& path, double u) const;
  double at_s(const std::vector<double>& field, double s) const;
};

/// Schrodinger equation on the arc, solved in arc length (equivalent to the
/// scale-factor form in u). Integrates inward from both continuation ends with
/// decaying WKB seeds and matches Prufer phases at the arc midpoint.
ArcWave solve_arc_se(const Model& model, const CausticArc& arc, double energy, int target_nodes,
                     const ArcGridOptions& opts = {});

/// Classical momentum and action on the arc. The action runs from the arc's
/// start in traversal order and adds `offset`. quantum_number is the n
/// minimizing |int p ds - pi hbar (n + 1/2)|; mismatch is relative to `target_n`
/// (or that n when target_n < 0). Throws ClassicallyForbidden.
ArcWave wkb_arc(const Model& model, const CausticArc& arc, double energy, int target_n = -1,
                double offset = 0.0, const ArcGridOptions& opts = {});

/// Exact quantum action on the arc from the Ermakov-Pinney form of the 1D QHJE:
/// psi = c rho sin(X / hbar + pi/4), X' = hbar / rho^2 in arc length, with the
/// exterior decaying (pure imaginary action) solutions matched at the start
/// vertex and X(end) - X(start) = pi hbar (n + 1/2). The residual log-derivative
/// mismatch at the end vertex measures quantization.
ArcWave solve_arc_qhje(const Model& model, const CausticArc& arc, double energy, int target_n,
                       double offset = 0.0, const ArcGridOptions& opts = {});

/// Sets c on every wave so that neighbouring arcs agree at shared vertices.
/// The first arc keeps c = 1. Returns the worst relative disagreement at a
/// vertex not used for propagation (loop closure). Throws ZeroAtVertex.
double match_arc_constants(std::span<ArcWave> waves, int first = 0);

struct ArcResiduals {
  double real_part = 0.0;  // real part of the QHJE, max relative residual on the span interior
  double imag_part = 0.0;  // imaginary part
  double action = 0.0;  // third-order X equation
};
ArcResiduals qhje_residuals(const ArcWave& w, const Model& model);

// ----- eigen-search -----

struct EigenSearchOptions {
  ArcMethod method = ArcMethod::SE;
  double e_lo = 0.0;
  double e_hi = 0.0;
  int n1 = 0;  // nodes on the upper and lower arcs
  int n2 = 0;  // nodes on the lateral arcs
  double tol = 1e-3;
  int max_iter = 30;
  int start_vertex = 0;
  CausticTraceOptions trace;
  FitOptions fit;
  ArcGridOptions grid;
  double theta0 = 0.0;  // initial vertex angle; 0 selects the harmonic estimate
  double e0 = 0.0;      // initial energy; 0 selects the harmonic estimate
  bool accept_unconverged = false;  // return the best candidate instead of throwing
};

struct SearchPoint {
  double energy = 0.0;
  double theta = 0.0;
  double f_h = 0.0;  // mean mismatch on upper/lower arcs
  double f_v = 0.0;  // mean mismatch on lateral arcs
};

struct EigenState {
  double energy = 0.0;
  double theta = 0.0;
  Point2 vertex;
  Caustic caustic;
  std::array<ArcWave, 4> waves;
  double max_regularity = 0.0;
  bool converged = false;
  std::vector<SearchPoint> history;
  std::vector<CausticPoint> touch_points;
};

/// The four arc solutions of an oriented caustic, visited in traversal order
/// so that each arc's action continues from its predecessor.
std::array<ArcWave, 4> solve_arcs(const Model& model, const Caustic& caustic, double energy, ArcMethod method,
                                  int n1, int n2, const ArcGridOptions& grid = {});

/// Evaluates one (E, theta) candidate: orbit from the equipotential point at
/// angle theta, caustic, and the four arc solutions.
EigenState evaluate_candidate(const Model& model, double energy, double theta,
                              const EigenSearchOptions& opts);

/// Damped Gauss-Newton in (E, theta) on the four signed arc mismatches.
/// Converged when every arc is regular to opts.tol with the target node
/// counts. Otherwise throws NotConverged with the best residual, unless
/// accept_unconverged is set.
EigenState search_eigenstate(const Model& model, const EigenSearchOptions& opts);

/// Harmonic-oscillator estimate of the energy and vertex angle for (n1, n2).
std::array<double, 2> harmonic_guess(const Model& model, int n1, int n2);

}  // namespace causwave
