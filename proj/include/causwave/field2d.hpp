#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "causwave/arc1d.hpp"
#include "causwave/mesh.hpp"
#include "causwave/oracle.hpp"

namespace causwave {

enum class FieldKind { Psi, X, Y, A };
enum class Provenance { SE, WKB, QHJE, Oracle };
std::string to_string(FieldKind k);
std::string to_string(Provenance p);

struct FieldSolution {
  std::shared_ptr<const Mesh> mesh;
  FieldKind kind = FieldKind::Psi;
  Provenance provenance = Provenance::SE;
  double energy = 0.0;
  int orientation_vertex = -1;  // start vertex of the orientation, -1 for none
  std::vector<double> values;

  /// Linear interpolation on the mesh, NaN outside. Owns its locator.
  Sampler sampler() const;
};

/// Piecewise-linear arc field in the arc parameter, built from the span nodes.
class ArcSampler {
 public:
  ArcSampler(const ArcWave& wave, const std::vector<double>& field);
  double operator()(double u) const;

 private:
  std::vector<double> u_, v_;
};

struct FemMatrices {
  Eigen::SparseMatrix<double> laplace;  // int grad phi_i . grad phi_j
  Eigen::SparseMatrix<double> shifted;  // int (U - E) phi_i phi_j
  std::vector<double> lumped;           // lumped mass
  /// (hbar^2 / 2m) laplace + shifted
  Eigen::SparseMatrix<double> operator_matrix(const Model& model) const;
};

/// P1 Galerkin matrices; the potential term uses the edge-midpoint rule.
FemMatrices assemble_fem(const Mesh& mesh, const Model& model, double energy);

/// Solves -(hbar^2/2m) lap psi + (U - E) psi = 0 with psi = bc(i) at every
/// tagged boundary vertex. Throws SingularSystem.
std::vector<double> solve_dirichlet(const Mesh& mesh, const Model& model, double energy,
                                    const std::function<double(size_t)>& bc, double* residual = nullptr);

/// Dirichlet data from the matched arc waves on caustic vertices, zero on the
/// outer boundary.
FieldSolution solve_dirichlet_se(std::shared_ptr<const Mesh> mesh, const Model& model, double energy,
                                 const std::array<ArcWave, 4>& waves, double* residual = nullptr);

struct WeldResult {
  FieldSolution field;
  double c1_jump = 0.0;  // max gradient jump on the caustic / max interior gradient
};

/// Union of interior and exterior solutions. Throws BoundaryMismatch when the
/// shared caustic values differ by more than 1e-8.
WeldResult weld(const FieldSolution& interior, const FieldSolution& exterior);

// ----- classical action and WKB -----

struct ClassicalActionOptions {
  CausticTraceOptions trace;       // dt and energy_tol are used
  int record_stride = 4;
  double seed_spacing = 0.25;      // characteristic spacing on the seed arcs, in units of mesh h
  double max_boundary_mismatch = 5e-2;  // absolute, in action units
  int min_neighbours = 16;
  double amplitude_clip_quantile = 0.99;
};

struct ClassicalAction {
  FieldSolution X;
  FieldSolution A;                 // transported amplitude, clipped and scaled to max 1
  double boundary_mismatch = 0.0;  // worst end-of-segment disagreement with the arc action
  double eikonal_pass_fraction = 0.0;
  size_t samples = 0;
  size_t segments = 0;             // characteristics closed on a far arc
  size_t open_rays = 0;            // dropped: no far-arc touch within the time limit
};

/// Action of the sub-family of trajectories that belongs to the caustic's start
/// vertex. Characteristics start tangent to the two arcs through that vertex
/// with the arcs' action and accumulate p.dq until they touch a far arc, where
/// the carried action is checked against that arc's data. Mesh vertices get
/// values by local quadratic least squares on values and momenta. Throws
/// CharacteristicCrossing.
ClassicalAction solve_classical_action(const Model& model, double energy, const Caustic& oriented,
                                       std::shared_ptr<const Mesh> interior, const std::array<ArcWave, 4>& wkb_waves,
                                       const ClassicalActionOptions& opts = {});

enum class AmplitudeMode { Constant, Transported };

/// A sin(X / hbar) for one orientation.
FieldSolution wkb_partial(const ClassicalAction& action, AmplitudeMode mode, double hbar);
/// psi_v1 + parity * psi_v2 on the shared mesh.
FieldSolution wkb_field(const ClassicalAction& v1, const ClassicalAction& v2, AmplitudeMode mode, int parity,
                        double hbar);

// ----- QHJE -----

struct QhjeFieldOptions {
  int max_iter = 60;
  double tol = 1e-6;
};

struct QhjeField {
  FieldSolution X, Y, A;
  double residual_real = 0.0;   // real part, mesh norm
  double residual_imag = 0.0;   // imaginary (continuity) part, mesh norm
  int iterations = 0;
  std::vector<double> history;
  int vortices = 0;          // triangles around which the phase winds
};

/// Newton iteration on the discrete complex form phi = exp((-Y + iX)/hbar).
/// Caustic vertices carry A_k exp(i X_k / hbar); outer vertices phi = 0.
/// X0 initializes X (e.g. the classical action); NaN entries use 0.
/// Throws NewtonDivergence.
QhjeField solve_qhje_field(std::shared_ptr<const Mesh> mesh, const Model& model, double energy,
                           const std::array<ArcWave, 4>& waves, const std::vector<double>* X0 = nullptr,
                           const QhjeFieldOptions& opts = {});

FieldSolution qhje_partial(const QhjeField& f, double hbar);
FieldSolution qhje_wavefunction(const QhjeField& v1, const QhjeField& v2, int parity, double hbar);

// ----- diagnostics -----

/// max |psi(x, y) - parity psi(-x, y)| / max |psi| over the region raster.
double parity_defect(const Sampler& psi, const Region& region, int parity = 1);

struct TurningSurface {
  double fraction = 0.0;       // share of caustic samples meeting the bound
  double max_interior = 0.0;   // max |second derivative| inside
  double max_normal = 0.0;     // max |d2 psi / dn2| on the caustic
  size_t samples = 0;
};

/// Second normal derivative of psi across the caustic from quadratic fits of
/// samples spaced `step` along the normal, compared with bound * the interior
/// maximum of |psi_xx|, |psi_yy|.
TurningSurface turning_surface(const Sampler& psi, const Caustic& caustic, double step, double bound = 0.1,
                               int per_arc = 100);

namespace detail {
/// Gradient at each vertex from a quadratic least-squares fit over two rings
/// of neighbours within `radius`; NaN where too few neighbours exist.
std::vector<Vec2> fitted_gradients(const Mesh& mesh, const std::vector<double>& v, double radius);
}  // namespace detail

}  // namespace causwave
