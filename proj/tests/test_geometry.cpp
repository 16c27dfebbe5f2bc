#include <doctest.h>

#include <cmath>
#include <set>

#include "exnls/geometry.h"

using namespace exnls;

TEST_SUITE("geometry") {

TEST_CASE("make_obstacle validates its inputs") {
  CHECK_THROWS_AS(make_obstacle(2, "cube", {1.0}), InputError);
  CHECK_THROWS_AS(make_obstacle(2, "ball", {}), InputError);
  CHECK_THROWS_AS(make_obstacle(2, "ball", {-1.0}), InputError);
  CHECK_THROWS_AS(make_obstacle(2, "ellipsoid", {1.0}), InputError);
  CHECK_THROWS_AS(make_obstacle(2, "ellipsoid", {1.0, 0.0}), InputError);
  CHECK_THROWS_AS(make_obstacle(4, "ball", {1.0}), InputError);
  // The obstacle must contain the origin for the exterior identities.
  CHECK_THROWS_AS(make_obstacle(2, "ball", {1.0}, Vec3{5, 0, 0}), InputError);
}

TEST_CASE("ball geometry primitives") {
  auto ball = make_obstacle(2, "ball", {1.0});
  CHECK(ball.max_radius() == doctest::Approx(1.0));
  CHECK(ball.min_radius() == doctest::Approx(1.0));
  CHECK(ball.inside(Vec3{0.5, 0.5, 0}));
  CHECK(!ball.inside(Vec3{0.8, 0.8, 0}));

  // Segment from (2,0) to the origin meets the unit circle at x=1: t = 0.5.
  double t = ball.segment_crossing(Vec3{2, 0, 0}, Vec3{0, 0, 0});
  CHECK(t == doctest::Approx(0.5).epsilon(1e-12));
  // A segment that stays outside reports no crossing.
  CHECK(ball.segment_crossing(Vec3{2, 0, 0}, Vec3{2, 1, 0}) == -1.0);

  Vec3 nb = ball.nearest_boundary_point(Vec3{3, 4, 0});
  CHECK(nb[0] == doctest::Approx(0.6));
  CHECK(nb[1] == doctest::Approx(0.8));

  Vec3 n = ball.boundary_normal(Vec3{0.6, 0.8, 0});
  CHECK(n[0] == doctest::Approx(-0.6));  // points into the obstacle
  CHECK(n[1] == doctest::Approx(-0.8));

  CHECK(ball.reflection_symmetric());
  CHECK(!make_obstacle(2, "ball", {1.0}, Vec3{0.2, 0, 0}).reflection_symmetric());
}

TEST_CASE("ellipsoid geometry primitives") {
  auto ell = make_obstacle(2, "ellipsoid", {2.0, 1.0});
  CHECK(ell.max_radius() == doctest::Approx(2.0));
  CHECK(ell.min_radius() == doctest::Approx(1.0));
  CHECK(ell.reflection_symmetric());

  // Axis crossing from (3,0) toward the origin: boundary at x=2, t = 1/3.
  double t = ell.segment_crossing(Vec3{3, 0, 0}, Vec3{0, 0, 0});
  CHECK(t == doctest::Approx(1.0 / 3).epsilon(1e-12));

  // On the semi-axes the nearest point and normal are axial.
  Vec3 nb = ell.nearest_boundary_point(Vec3{5, 0, 0});
  CHECK(nb[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(nb[1] == doctest::Approx(0.0));
  Vec3 n = ell.boundary_normal(Vec3{0, 1, 0});
  CHECK(n[0] == doctest::Approx(0.0));
  CHECK(n[1] == doctest::Approx(-1.0));

  // Off-axis nearest point lies on the boundary and improves on the radial
  // projection.
  Vec3 q{1.9, 1.1, 0};
  Vec3 y = ell.nearest_boundary_point(q);
  CHECK(sq(y[0] / 2) + sq(y[1]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("build_grid enforces its preconditions") {
  auto ball = make_obstacle(2, "ball", {1.0});
  CHECK_THROWS_AS(build_grid(ball, 1.5, 1.0 / 16), InputError);  // R_out small
  CHECK_THROWS_AS(build_grid(ball, 6.0, 0.2), InputError);       // h coarse
}

TEST_CASE("grid classification and reflection symmetry") {
  auto g = build_grid(make_obstacle(2, "ball", {1.0}), 6.0, 1.0 / 16);
  CHECK(g->d == 2);

  std::set<long long> act(g->active.begin(), g->active.end());
  for (long long c : g->active) {
    REQUIRE(g->included(c));
    // Active cells lie outside the obstacle and inside the outer ball.
    Vec3 x = g->x(c);
    CHECK(!g->obstacle.inside(x));
    CHECK(norm3(x, 2) < g->R_out);
    // The lattice is reflection symmetric, so the active set must be too.
    for (int a = 0; a < 2; ++a) CHECK(act.count(g->reflect(c, a)) == 1);
  }

  for (long long c : g->active) {
    CHECK(g->cell_at(g->x(c)) == c);
  }
}

TEST_CASE("boundary faces sit on the wall with inward normals") {
  auto g = build_grid(make_obstacle(2, "ball", {1.0}), 6.0, 1.0 / 16);
  REQUIRE(!g->boundary_faces.empty());
  double area = 0, absn0 = 0;
  for (const auto& f : g->boundary_faces) {
    CHECK(norm3(f.x_b, 2) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(dot3(f.x_b, f.normal, 2) <= 1e-12);
    CHECK(norm3(f.normal, 2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.area > 0);
    area += f.area;
    absn0 += f.area * std::abs(f.normal[0]);
  }
  // The aperture construction telescopes exactly for the |n_j| weights
  // (total projected silhouette, 4R for a circle of radius R), while the
  // raw perimeter converges at the quadrature order.
  CHECK(absn0 == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(area == doctest::Approx(2 * M_PI).epsilon(2e-3));

  std::vector<double> ones(g->boundary_faces.size(), 1.0);
  CHECK(surface_integral(*g, ones) == doctest::Approx(area));
}

TEST_CASE("boundary faces in 3d") {
  auto g = build_grid(make_obstacle(3, "ball", {1.0}), 3.0, 1.0 / 10);
  double area = 0;
  for (const auto& f : g->boundary_faces) {
    CHECK(norm3(f.x_b, 3) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(dot3(f.x_b, f.normal, 3) <= 1e-12);
    area += f.area;
  }
  CHECK(area == doctest::Approx(4 * M_PI).epsilon(0.02));
}

TEST_CASE("plane faces cover the fluid part of each mirror plane") {
  double R_out = 6.0, h = 1.0 / 16;
  auto g = build_grid(make_obstacle(2, "ball", {1.0}), R_out, h);
  for (int ax = 0; ax < 2; ++ax) {
    double w = 0;
    for (const auto& pf : g->plane_faces[ax]) {
      REQUIRE(pf.cell >= 0);
      // The owning cell sits just on the positive side of the plane.
      Vec3 x = g->x(pf.cell);
      CHECK(x[ax] == doctest::Approx(h / 2).epsilon(1e-9));
      CHECK(pf.weight > 0);
      CHECK(pf.weight <= h + 1e-12);
      w += pf.weight;
    }
    // Fluid segment of the plane: 2 (R_out - r_ball), up to cell rounding
    // at both ends.
    CHECK(w == doctest::Approx(2 * (R_out - 1.0)).epsilon(0.02));
  }
}

TEST_CASE("face_aperture endpoints") {
  auto ball = make_obstacle(2, "ball", {1.0});
  double h = 1.0 / 16;
  // Cell face deep inside the obstacle: no fluid.
  Vec3 lo{-h / 2, 0.2, 0}, hi{h / 2, 0.2 + h, 0};
  CHECK(face_aperture(ball, 0, -h / 2, lo, hi, 2) == doctest::Approx(0.0));
  // Far outside: all fluid.
  Vec3 lo2{3, 3, 0}, hi2{3 + h, 3 + h, 0};
  CHECK(face_aperture(ball, 0, 3.0, lo2, hi2, 2) == doctest::Approx(1.0));
  // A face crossing the wall: fluid fraction strictly between.
  Vec3 lo3{1.0 - h, -h / 2, 0}, hi3{1.0, h / 2, 0};
  double a = face_aperture(ball, 1, -h / 2, lo3, hi3, 2);
  CHECK(a > 0);
  CHECK(a < 1);
  // 1d exact value: fluid part of [1-h, 1] at y = -h/2 is 1 - sqrt(1-h^2/4)
  // short of the full width... the wall sits at x = sqrt(1 - h^2/4).
  double xw = std::sqrt(1 - h * h / 4);
  CHECK(a == doctest::Approx((1.0 - xw) / h).epsilon(1e-9));
}

TEST_CASE("conductance diagonal is positive on included cells") {
  auto g = build_grid(make_obstacle(2, "ellipsoid", {1.3, 1.0}), 6.0, 1.0 / 16);
  REQUIRE(!g->active.empty());
  for (long long c : g->active) CHECK(g->diag[c] > 0);
  // Excluded cells carry an exact zero so stencils never need branches.
  for (long long c = 0; c < g->ntot; ++c)
    if (!g->included(c)) CHECK(g->diag[c] == 0.0);
}

}  // TEST_SUITE
