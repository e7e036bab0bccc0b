#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>

#include "causwave/errors.hpp"
#include "causwave/field2d.hpp"

namespace causwave {

namespace detail {
std::vector<std::complex<double>> complex_dirichlet(const Mesh& mesh, const Eigen::SparseMatrix<double>& K,
                                                    const std::vector<std::complex<double>>& boundary,
                                                    double* residual);
}  // namespace detail

namespace {

using cplx = std::complex<double>;

// Phase unwrapped outward from the caustic, where X is known absolutely.
std::vector<double> unwrap_phase(const Mesh& mesh, const std::vector<cplx>& phi, const std::vector<double>& x_boundary,
                                 double hbar) {
  std::vector<std::vector<int>> nb(mesh.size());
  for (const auto& t : mesh.triangles)
    for (int a = 0; a < 3; ++a) {
      nb[static_cast<size_t>(t[static_cast<size_t>(a)])].push_back(t[static_cast<size_t>((a + 1) % 3)]);
      nb[static_cast<size_t>(t[static_cast<size_t>((a + 1) % 3)])].push_back(t[static_cast<size_t>(a)]);
    }
  std::vector<double> X(mesh.size(), std::numeric_limits<double>::quiet_NaN());
  std::deque<size_t> queue;
  for (size_t i = 0; i < mesh.size(); ++i)
    if (mesh.tags[i].kind == BoundaryTag::Caustic) {
      X[i] = x_boundary[i];
      queue.push_back(i);
    }
  while (!queue.empty()) {
    const size_t i = queue.front();
    queue.pop_front();
    for (int jj : nb[i]) {
      const auto j = static_cast<size_t>(jj);
      if (!std::isnan(X[j]) || std::abs(phi[j]) == 0.0 || std::abs(phi[i]) == 0.0) continue;
      X[j] = X[i] + hbar * std::arg(phi[j] / phi[i]);
      queue.push_back(j);
    }
  }
  return X;
}

int count_vortices(const Mesh& mesh, const std::vector<cplx>& phi) {
  int n = 0;
  for (const auto& t : mesh.triangles) {
    double w = 0.0;
    for (int a = 0; a < 3; ++a) {
      const cplx p = phi[static_cast<size_t>(t[static_cast<size_t>(a)])];
      const cplx q = phi[static_cast<size_t>(t[static_cast<size_t>((a + 1) % 3)])];
      if (std::abs(p) == 0.0 || std::abs(q) == 0.0) continue;
      w += std::arg(q / p);
    }
    if (std::abs(w) > std::numbers::pi) ++n;
  }
  return n;
}

}  // namespace

QhjeField solve_qhje_field(std::shared_ptr<const Mesh> mesh_ptr, const Model& model, double energy,
                           const std::array<ArcWave, 4>& waves, const std::vector<double>* X0,
                           const QhjeFieldOptions& opts) {
  model.validate();
  if (!mesh_ptr) throw InvalidArgument("QHJE field needs a mesh");
  const Mesh& mesh = *mesh_ptr;
  for (const auto& w : waves)
    if (w.method != ArcMethod::QHJE || w.X.empty() || w.A.empty())
      throw InvalidArgument("QHJE field needs QHJE arc data");
  if (X0 && X0->size() != mesh.size()) throw InvalidArgument("initial action does not match the mesh");
  const double hbar = model.hbar;

  std::array<ArcSampler, 4> xs{ArcSampler(waves[0], waves[0].X), ArcSampler(waves[1], waves[1].X),
                               ArcSampler(waves[2], waves[2].X), ArcSampler(waves[3], waves[3].X)};
  std::array<ArcSampler, 4> as{ArcSampler(waves[0], waves[0].A), ArcSampler(waves[1], waves[1].A),
                               ArcSampler(waves[2], waves[2].A), ArcSampler(waves[3], waves[3].A)};
  std::vector<cplx> phi(mesh.size(), cplx(0.0, 0.0));
  std::vector<double> x_boundary(mesh.size(), 0.0);
  double a_mean = 0.0;
  int n_caustic = 0;
  for (size_t i = 0; i < mesh.size(); ++i) {
    const BoundaryTag& t = mesh.tags[i];
    if (t.kind != BoundaryTag::Caustic) continue;
    const auto k = static_cast<size_t>(t.arc);
    const double a = std::abs(as[k](t.u));
    x_boundary[i] = xs[k](t.u);
    phi[i] = std::polar(a, x_boundary[i] / hbar);
    a_mean += a;
    ++n_caustic;
  }
  if (n_caustic == 0) throw InvalidArgument("mesh has no caustic boundary");
  a_mean /= n_caustic;
  for (size_t i = 0; i < mesh.size(); ++i) {
    if (mesh.on_boundary(i)) continue;
    const double x = X0 && std::isfinite((*X0)[i]) ? (*X0)[i] : 0.0;
    phi[i] = std::polar(a_mean, x / hbar);
  }

  const FemMatrices fm = assemble_fem(mesh, model, energy);
  const Eigen::SparseMatrix<double> K = fm.operator_matrix(model);
  // Newton in L = (-Y + iX) / hbar: the Jacobian K diag(phi) turns the step
  // equation into phi dL = u - phi, with u the linear Dirichlet solution.
  const std::vector<cplx> u = detail::complex_dirichlet(mesh, K, phi, nullptr);

  QhjeField out;
  auto residuals = [&](double& r_real, double& r_imag) {
    Eigen::VectorXcd p(static_cast<Eigen::Index>(mesh.size()));
    for (size_t i = 0; i < mesh.size(); ++i) p[static_cast<Eigen::Index>(i)] = phi[i];
    const Eigen::VectorXcd kp = K.cast<cplx>() * p;
    double s_real = 0.0, s_imag = 0.0, w = 0.0;
    for (size_t i = 0; i < mesh.size(); ++i) {
      if (mesh.on_boundary(i) || std::abs(phi[i]) == 0.0) continue;
      // (K phi) / (m_i phi) is the QHJE pair in energy units: real part the
      // quantum HJ equation, imaginary part the continuity equation
      const cplx z = kp[static_cast<Eigen::Index>(i)] / (fm.lumped[i] * phi[i]);
      s_real += fm.lumped[i] * z.real() * z.real();
      s_imag += fm.lumped[i] * z.imag() * z.imag();
      w += fm.lumped[i];
    }
    const double scale = std::max(std::abs(energy), 1e-300);
    r_real = w > 0 ? std::sqrt(s_real / w) / scale : 0.0;
    r_imag = w > 0 ? std::sqrt(s_imag / w) / scale : 0.0;
  };

  double r_real = 0.0, r_imag = 0.0;
  residuals(r_real, r_imag);
  out.history.push_back(std::max(r_real, r_imag));
  for (; out.iterations < opts.max_iter && std::max(r_real, r_imag) > opts.tol; ++out.iterations) {
    for (size_t i = 0; i < mesh.size(); ++i) {
      if (mesh.on_boundary(i)) continue;
      if (std::abs(phi[i]) < 1e-300) {
        phi[i] = u[i];
        continue;
      }
      cplx dl = (u[i] - phi[i]) / phi[i];
      // keep single steps within one e-fold and half a turn
      const double damp = std::min({1.0, 1.0 / std::max(std::abs(dl.real()), 1e-300),
                                    0.5 * std::numbers::pi / std::max(std::abs(dl.imag()), 1e-300)});
      phi[i] *= std::exp(damp * dl);
    }
    residuals(r_real, r_imag);
    out.history.push_back(std::max(r_real, r_imag));
    if (!std::isfinite(out.history.back()) || out.history.back() > 1e6 * out.history.front()) {
      std::ostringstream s;
      s << "QHJE Newton residual grew to " << out.history.back() << " after " << out.iterations + 1 << " steps";
      throw NewtonDivergence(s.str());
    }
  }
  if (std::max(r_real, r_imag) > opts.tol) {
    std::ostringstream s;
    s << "QHJE Newton stopped at residual " << std::max(r_real, r_imag) << "; history";
    for (double h : out.history) s << ' ' << h;
    throw NewtonDivergence(s.str());
  }
  out.residual_real = r_real;
  out.residual_imag = r_imag;
  out.vortices = count_vortices(mesh, phi);

  // the arcs leaving the start vertex carry no traversal constant
  int vtx = -1;
  for (const auto& w : waves)
    if (w.action_offset == 0.0) vtx = w.orientation > 0 ? w.vertex[0] : w.vertex[1];
  std::vector<double> X = unwrap_phase(mesh, phi, x_boundary, hbar);
  std::vector<double> A(mesh.size()), Y(mesh.size());
  for (size_t i = 0; i < mesh.size(); ++i) {
    A[i] = std::abs(phi[i]);
    Y[i] = A[i] > 0 ? -hbar * std::log(A[i]) : std::numeric_limits<double>::infinity();
    if (std::isnan(X[i])) X[i] = hbar * std::arg(phi[i]);
  }
  out.X = FieldSolution{mesh_ptr, FieldKind::X, Provenance::QHJE, energy, vtx, std::move(X)};
  out.Y = FieldSolution{mesh_ptr, FieldKind::Y, Provenance::QHJE, energy, vtx, std::move(Y)};
  out.A = FieldSolution{mesh_ptr, FieldKind::A, Provenance::QHJE, energy, vtx, std::move(A)};
  return out;
}

FieldSolution qhje_partial(const QhjeField& f, double hbar) {
  FieldSolution out = f.X;
  out.kind = FieldKind::Psi;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = f.A.values[i] * std::sin(f.X.values[i] / hbar);
  return out;
}

FieldSolution qhje_wavefunction(const QhjeField& v1, const QhjeField& v2, int parity, double hbar) {
  if (v1.X.mesh != v2.X.mesh) throw InvalidArgument("both orientations must share one mesh");
  FieldSolution a = qhje_partial(v1, hbar);
  const FieldSolution b = qhje_partial(v2, hbar);
  const double sgn = parity < 0 ? -1.0 : 1.0;
  for (size_t i = 0; i < a.values.size(); ++i) a.values[i] += sgn * b.values[i];
  a.orientation_vertex = -1;
  return a;
}

}  // namespace causwave
