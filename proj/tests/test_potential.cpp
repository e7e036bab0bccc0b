#include <doctest.h>

#include <cmath>

#include "causwave/errors.hpp"
#include "causwave/potential.hpp"
#include "fixtures.hpp"

using namespace causwave;

TEST_SUITE("potential") {
  TEST_CASE("potential values") {
    const Model m = fx::barbanis();
    CHECK(eval_potential(m, {0, 0}) == 0.0);
    CHECK(eval_potential(m, {1, 1}) == doctest::Approx(0.995).epsilon(1e-14));
    CHECK(eval_potential(fx::separable(), {0, 2}) == doctest::Approx(2.0).epsilon(1e-14));
  }

  TEST_CASE("gradient and hessian") {
    const Model m = fx::barbanis();
    const Vec2 g = grad_potential(m, {1, 1});
    CHECK(g.x == doctest::Approx(0.99).epsilon(1e-14));
    CHECK(g.y == doctest::Approx(0.89).epsilon(1e-14));
    const Vec2 g0 = grad_potential(m, {0, 0});
    CHECK(g0.x == 0.0);
    CHECK(g0.y == 0.0);
    const Model s = fx::separable();
    for (Point2 q : {Point2{0.3, -1.7}, Point2{-2.0, 4.0}}) {
      const Sym2 h = hessian_potential(s, q);
      CHECK(h.xx == doctest::Approx(1.21));
      CHECK(h.yy == doctest::Approx(1.0));
      CHECK(h.xy == 0.0);
    }
    // finite-difference check of the Barbanis gradient
    const Point2 q{-1.3, 0.7};
    const double d = 1e-6;
    const Vec2 gq = grad_potential(m, q);
    CHECK(gq.x == doctest::Approx((eval_potential(m, {q.x + d, q.y}) - eval_potential(m, {q.x - d, q.y})) / (2 * d)).epsilon(1e-8));
    CHECK(gq.y == doctest::Approx((eval_potential(m, {q.x, q.y + d}) - eval_potential(m, {q.x, q.y - d})) / (2 * d)).epsilon(1e-8));
  }

  TEST_CASE("equipotential points") {
    const Model m = fx::barbanis();
    const Point2 a = equipotential_point(m, 5.18266, {-1, 0});
    CHECK(a.x == doctest::Approx(-std::sqrt(5.18266 / 0.605)).epsilon(1e-10));
    CHECK(a.x == doctest::Approx(-2.92684).epsilon(1e-5));
    CHECK(a.y == doctest::Approx(0.0));
    CHECK(std::abs(eval_potential(m, a) - 5.18266) <= 1e-10 * 5.18266);

    const Point2 b = equipotential_point(fx::separable(), 2.0, {0, 1});
    CHECK(b.x == doctest::Approx(0.0));
    CHECK(b.y == doctest::Approx(2.0).epsilon(1e-10));

    // the ray through the published vertex lands on it
    const Vec2 dir{-2.204, -1.650};
    const Point2 v = equipotential_point(m, 5.18266, dir);
    CHECK(std::abs(v.x + 2.204) <= 0.05);
    CHECK(std::abs(v.y + 1.650) <= 0.05);
  }

  TEST_CASE("no crossing above the saddle") {
    // along (1,1) the cubic term caps U near 16.5
    CHECK_THROWS_AS(equipotential_point(fx::barbanis(), 100.0, {1, 1}), NoCrossing);
  }

  TEST_CASE("model validation") {
    Model m;
    m.omega_x = 0.0;
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
    m = Model{};
    m.hbar = -1.0;
    CHECK_THROWS_AS(m.validate(), InvalidArgument);
  }
}
