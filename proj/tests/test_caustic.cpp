#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "causwave/caustic.hpp"
#include "causwave/chebyshev.hpp"
#include "causwave/errors.hpp"
#include "fixtures.hpp"

using namespace causwave;

namespace {

std::vector<Point2> semicircle_points(int n) {
  std::vector<Point2> p;
  for (int i = 0; i < n; ++i) {
    const double x = -0.9 + 1.8 * i / (n - 1);
    p.push_back({x, std::sqrt(1 - x * x)});
  }
  return p;
}

double semicircle_error(const ChebSeries& f) {
  double e = 0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = -0.9 + 1.8 * i / 2000;
    e = std::max(e, std::abs(f(x) - std::sqrt(1 - x * x)));
  }
  return e;
}

}  // namespace

TEST_SUITE("caustic") {
  TEST_CASE("separable caustic is the amplitude rectangle") {
    const EigenState& st = fx::separable_state(ArcMethod::SE);
    const Point2 v = fx::separable_vertex(fx::separable(), 2, 2);
    const Caustic& c = st.caustic;
    const std::array<Point2, 4> corners{Point2{v.x, v.y}, Point2{v.x, -v.y}, Point2{-v.x, -v.y}, Point2{-v.x, v.y}};
    for (size_t i = 0; i < 4; ++i) {
      CHECK(c.vertices[i].x == doctest::Approx(corners[i].x).epsilon(1e-3));
      CHECK(c.vertices[i].y == doctest::Approx(corners[i].y).epsilon(1e-3));
    }
    for (const auto& a : c.arcs) {
      // straight: constant f
      double dev = 0;
      for (int i = 0; i <= 50; ++i) {
        const double u = a.u_lo + a.span() * i / 50;
        dev = std::max(dev, std::abs(a.f(u) - a.f(a.u_lo)));
      }
      CHECK(dev <= 1e-6);
      CHECK(a.f.degree() == 0);
      CHECK(a.fit_rms <= 1e-10);
    }
    CHECK(c.arcs[1].axis == ArcAxis::X);
    CHECK(c.arcs[0].axis == ArcAxis::Y);
    CHECK(c.closure_gap <= 1e-3);
  }

  TEST_CASE("clusters in the separable case") {
    const Model m = fx::separable();
    const EigenState& st = fx::separable_state(ArcMethod::SE);
    const ArcClusters cl = cluster_arcs(st.touch_points, st.energy, m);
    const Point2 v = fx::separable_vertex(m, 2, 2);
    for (const auto& c : cl.clusters) CHECK(c.size() >= 8);
    // each side is one cluster: left x=-x_A, upper y=+y_A, right x=+x_A, lower y=-y_A
    auto side_error = [&](size_t k, const CausticPoint& p) {
      switch (k) {
        case 0: return std::abs(p.position.x - v.x);
        case 1: return std::abs(p.position.y + v.y);
        case 2: return std::abs(p.position.x + v.x);
        default: return std::abs(p.position.y - v.y);
      }
    };
    double worst = 0;
    for (size_t k = 0; k < 4; ++k)
      for (const auto& p : cl.clusters[k]) worst = std::max(worst, side_error(k, p));
    CHECK(worst <= 1e-4);
    CHECK(std::abs(cl.vertex_estimates[0].x - v.x) <= 0.05);
    CHECK(std::abs(cl.vertex_estimates[0].y - v.y) <= 0.05);
  }

  TEST_CASE("Barbanis caustic has four arcs") {
    const EigenState& st = fx::barbanis_state(ArcMethod::WKB);
    const ArcClusters cl = cluster_arcs(st.touch_points, st.energy, fx::barbanis());
    for (const auto& c : cl.clusters) CHECK(c.size() >= 50);
    const Caustic& c = st.caustic;
    CHECK(c.arcs[1].axis == ArcAxis::X);
    CHECK(c.arcs[3].axis == ArcAxis::X);
    CHECK(c.arcs[0].axis == ArcAxis::Y);
    CHECK(c.arcs[2].axis == ArcAxis::Y);
    CHECK(c.arcs[1].fit_rms <= 1e-3);
    CHECK(c.closure_gap <= 1e-3);
    // upper arc is mildly curved
    const auto& up = c.arcs[1];
    double fmin = 1e9, fmax = -1e9;
    for (int i = 0; i <= 50; ++i) {
      const double y = up.f(up.u_lo + up.span() * i / 50);
      fmin = std::min(fmin, y);
      fmax = std::max(fmax, y);
    }
    CHECK(fmax - fmin > 1e-2);
    CHECK(fmax - fmin < 0.5 * up.span());
  }

  TEST_CASE("touch momenta are tangent to the fitted arcs") {
    const EigenState& st = fx::barbanis_state(ArcMethod::WKB);
    const ArcClusters cl = cluster_arcs(st.touch_points, st.energy, fx::barbanis());
    size_t ok = 0, n = 0;
    for (size_t k = 0; k < 4; ++k)
      for (const auto& p : cl.clusters[k]) {
        ++n;
        if (tangency_angle_deg(st.caustic.arcs[k], p) <= 2.0) ++ok;
      }
    CHECK(static_cast<double>(ok) / n >= 0.95);
  }

  TEST_CASE("collinear points cannot form a caustic") {
    std::vector<CausticPoint> pts;
    for (int i = 0; i < 100; ++i) {
      CausticPoint p;
      p.position = {-1.0 + 0.02 * i, 0.5 * (-1.0 + 0.02 * i)};
      p.momentum = {1.0, 0.5};
      pts.push_back(p);
    }
    CHECK_THROWS_AS(cluster_arcs(pts, 5.0, fx::barbanis()), ClusterCountMismatch);
  }

  TEST_CASE("straight cluster fits at degree zero") {
    std::vector<Point2> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({-2.0 + 4.0 * i / 199, 2.236});
    const CausticArc a = fit_arc_points(pts);
    CHECK(a.axis == ArcAxis::X);
    CHECK(a.f.degree() == 0);
    CHECK(a.fit_rms <= 1e-10);
    CHECK(a.f(0.3) == doctest::Approx(2.236).epsilon(1e-12));
  }

  TEST_CASE("semicircle fit") {
    const auto pts = semicircle_points(400);
    const CausticArc a = fit_arc_points(pts);
    CHECK(semicircle_error(a.f) <= 1e-4);
    // at fixed degree 12 the least-squares error sits just above 1e-4
    std::vector<double> u, v;
    for (const auto& p : pts) {
      u.push_back(p.x);
      v.push_back(p.y);
    }
    const ChebSeries f12 = ChebSeries::fit(u, v, 12, -0.9, 0.9);
    CHECK(semicircle_error(f12) == doctest::Approx(1.03e-4).epsilon(1e-6 / 1.03e-4));
    CHECK(arc_scale_factor(a, 0.5) == doctest::Approx(1.0 / std::sqrt(0.75)).epsilon(1e-3));
  }

  TEST_CASE("noisy cluster beyond the residual bound") {
    std::vector<Point2> pts;
    for (int i = 0; i < 300; ++i) pts.push_back({-1.0 + 2.0 * i / 299, (i % 2 ? 0.1 : -0.1)});
    CHECK_THROWS_AS(fit_arc_points(pts), FitResidualExceeded);
  }

  TEST_CASE("scale factor") {
    CausticArc flat;
    flat.f = ChebSeries(-1, 1, {0.7});
    CHECK(arc_scale_factor(flat, 0.2) == doctest::Approx(1.0));
    CausticArc diag;
    diag.f = ChebSeries(-1, 1, {0.0, 1.0});
    CHECK(arc_scale_factor(diag, -0.4) == doctest::Approx(std::sqrt(2.0)));
  }

  TEST_CASE("restricted potential") {
    const Model s = fx::separable();
    const EigenState& sst = fx::separable_state(ArcMethod::SE);
    const auto& up = sst.caustic.arcs[1];
    const double ya = up.f(0.0);
    for (double x : {-1.0, 0.0, 0.8})
      CHECK(restrict_potential(s, up, x) == doctest::Approx(0.5 * 1.21 * x * x + 0.5 * ya * ya));

    const Model m = fx::barbanis();
    const EigenState& st = fx::barbanis_state(ArcMethod::WKB);
    for (const auto& a : st.caustic.arcs) {
      CHECK(restrict_potential(m, a, 0.5 * (a.u_lo + a.u_hi)) < st.energy);
      CHECK(std::abs(restrict_potential(m, a, a.u_lo) - st.energy) <= 1e-3 * st.energy);
      CHECK(std::abs(restrict_potential(m, a, a.u_hi) - st.energy) <= 1e-3 * st.energy);
    }
  }

  TEST_CASE("orientation from either lower vertex") {
    const Caustic c = fx::barbanis_state(ArcMethod::WKB).caustic;
    const Caustic v1 = orient_caustic(c, 0);
    CHECK(v1.start_vertex == 0);
    int leaving = 0;
    for (const auto& t : v1.traversal) {
      if (t.from_vertex == 0) {
        ++leaving;
        CHECK(t.predecessor == -1);
      }
      CHECK(t.to_vertex != 0);
    }
    CHECK(leaving == 2);
    // both arcs leaving v1 start there
    CHECK(v1.arcs[0].orientation == +1);
    CHECK(v1.arcs[3].orientation == +1);

    const Caustic v2 = orient_caustic(c, 3);
    CHECK(v2.start_vertex == 3);
    // mirror: lateral arcs swap roles, upper and lower reverse direction
    CHECK(v2.arcs[2].orientation == +1);
    CHECK(v2.arcs[3].orientation == -1);
    CHECK(v2.arcs[1].orientation == -v1.arcs[1].orientation);
    for (const auto& t : v2.traversal) CHECK(t.to_vertex != 3);
  }

  TEST_CASE("separable actions increase toward the opposite corner") {
    const Model m = fx::separable();
    const EigenState& st = fx::separable_state(ArcMethod::WKB);
    const auto waves = solve_arcs(m, orient_caustic(st.caustic, 0), st.energy, ArcMethod::WKB, 2, 2);
    for (const auto& w : waves) {
      std::vector<double> xs;
      for (size_t i = w.grid.i_lo; i <= w.grid.i_hi; ++i) xs.push_back(w.X_cl[i]);
      if (w.orientation < 0) std::reverse(xs.begin(), xs.end());
      for (size_t i = 1; i < xs.size(); ++i) REQUIRE(xs[i] > xs[i - 1]);
    }
    // the largest action sits at the upper-right corner
    const auto& up = waves[1];
    CHECK(up.X_cl[up.grid.i_hi] >= up.X_cl[up.grid.i_lo]);
  }

  TEST_CASE("caustic polygon and containment") {
    const Caustic& c = fx::barbanis_state(ArcMethod::WKB).caustic;
    const auto poly = c.polygon(100);
    CHECK(inside_caustic(poly, {0.0, 0.0}));
    CHECK_FALSE(inside_caustic(poly, {3.5, 0.0}));
    CHECK(nearest_vertex(c, {-2.2, -1.6}) == 0);
    CHECK(nearest_vertex(c, {2.2, -1.6}) == 3);
  }
}
