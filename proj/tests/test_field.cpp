#include <doctest.h>

#include <cmath>
#include <random>

#include "exnls/field.h"

using namespace exnls;

namespace {

GridPtr unit_ball_grid(int d, double R_out, double h) {
  return build_grid(make_obstacle(d, "ball", {1.0}), R_out, h);
}

// Free-space gaussian amp*exp(-|x-c|^2/w^2) exp(i k.x) with the support far
// from the obstacle and the outer box, so the smooth cutoff never bites and
// the closed-form integrals apply:
//   mass      = amp^2 (pi w^2 / 2)^{d/2}
//   grad_sq   = mass * (d / w^2 + |k|^2)
//   |u|^4 int = amp^4 (pi w^2 / 4)^{d/2}
struct GaussianCase {
  double amp, width;
  Vec3 center, k;
  double mass_exact(int d) const {
    return sq(amp) * std::pow(M_PI * sq(width) / 2, d / 2.0);
  }
  double grad_exact(int d) const {
    return mass_exact(d) * (d / sq(width) + dot3(k, k, d));
  }
  double quartic_exact(int d) const {
    return sq(sq(amp)) * std::pow(M_PI * sq(width) / 4, d / 2.0);
  }
};

}  // namespace

TEST_SUITE("field") {

TEST_CASE("gaussian functionals match closed forms in 2d") {
  GaussianCase gc{0.7, 0.8, {3.2, 2.4, 0}, {1.0, 2.0, 0}};
  auto grid = unit_ball_grid(2, 8.0, 1.0 / 16);
  ComplexField f = gaussian_bump(grid, gc.amp, gc.center, gc.width, gc.k);

  // Midpoint sums of smooth rapidly decaying integrands are far more accurate
  // than the O(h^2) stencil quantities, so the pointwise functionals can be
  // pinned tightly.
  CHECK(mass(f) == doctest::Approx(gc.mass_exact(2)).epsilon(1e-7));
  CHECK(lp1_norm(f, 3.0) == doctest::Approx(gc.quartic_exact(2)).epsilon(1e-7));
  CHECK(energy(f, 3.0) ==
        doctest::Approx(0.5 * grad_sq(f) - lp1_norm(f, 3.0) / 4).epsilon(1e-14));

  double err_h = std::abs(grad_sq(f) - gc.grad_exact(2));
  auto fine = unit_ball_grid(2, 8.0, 1.0 / 32);
  ComplexField f2 = gaussian_bump(fine, gc.amp, gc.center, gc.width, gc.k);
  double err_h2 = std::abs(grad_sq(f2) - gc.grad_exact(2));
  CHECK(err_h2 < 1e-2 * gc.grad_exact(2));
  CHECK(err_h / err_h2 > 3.5);  // second order in h
}

TEST_CASE("gaussian functionals match closed forms in 3d") {
  GaussianCase gc{1.0, 0.7, {2.4, 1.6, 1.2}, {0, 0, 0}};
  auto grid = unit_ball_grid(3, 6.0, 1.0 / 10);
  ComplexField f = gaussian_bump(grid, gc.amp, gc.center, gc.width, gc.k);
  CHECK(mass(f) == doctest::Approx(gc.mass_exact(3)).epsilon(1e-5));
  CHECK(lp1_norm(f, 3.0) == doctest::Approx(gc.quartic_exact(3)).epsilon(1e-5));
  CHECK(grad_sq(f) == doctest::Approx(gc.grad_exact(3)).epsilon(2e-2));
}

TEST_CASE("pointwise gradient is second order") {
  GaussianCase gc{0.7, 0.8, {3.2, 2.4, 0}, {1.0, 2.0, 0}};
  auto exact = [&](const Vec3& x, int a) {
    double r2 = sq(x[0] - gc.center[0]) + sq(x[1] - gc.center[1]);
    cplx u = gc.amp * std::exp(-r2 / sq(gc.width)) *
             std::exp(cplx{0, gc.k[0] * x[0] + gc.k[1] * x[1]});
    return u * (cplx{0, gc.k[a]} - 2.0 * (x[a] - gc.center[a]) / sq(gc.width));
  };
  auto worst = [&](double h) {
    auto grid = unit_ball_grid(2, 8.0, h);
    ComplexField f = gaussian_bump(grid, gc.amp, gc.center, gc.width, gc.k);
    auto gr = gradient(f);
    double m = 0;
    for (long long c : grid->active) {
      Vec3 x = grid->x(c);
      if (sq(x[0] - gc.center[0]) + sq(x[1] - gc.center[1]) > sq(1.5 * gc.width))
        continue;
      for (int a = 0; a < 2; ++a)
        m = std::max(m, std::abs(gr[a][c] - exact(x, a)));
    }
    return m;
  };
  double e1 = worst(1.0 / 16), e2 = worst(1.0 / 32);
  CHECK(e2 < 0.05);
  CHECK(e1 / e2 > 3.5);
}

TEST_CASE("apply_lc is symmetric and reproduces the Dirichlet form") {
  auto grid = unit_ball_grid(2, 4.0, 1.0 / 12);
  const ExteriorGrid& g = *grid;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u01(-1, 1);
  ComplexField a = zero_field(grid), b = zero_field(grid);
  for (long long c : g.active) {
    a.v[c] = {u01(rng), u01(rng)};
    b.v[c] = {u01(rng), u01(rng)};
  }
  CVec La(g.ntot), Lb(g.ntot);
  apply_lc(g, a.v, La);
  apply_lc(g, b.v, Lb);

  cplx lhs = dot(b.v, La);
  cplx rhs = std::conj(dot(a.v, Lb));
  CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(lhs));

  // grad_sq is the same quadratic form, assembled edge by edge.
  double quad = std::real(dot(a.v, La)) * std::pow(g.h, g.d - 2);
  CHECK(grad_sq(a) == doctest::Approx(quad).epsilon(1e-12));

  // Lc annihilates nothing on the exterior domain: wall arms give it a
  // strictly positive form. Zero field maps to zero.
  ComplexField z = zero_field(grid);
  CHECK(mass(z) == 0.0);
  CHECK(grad_sq(z) == 0.0);
  CHECK(max_abs(z) == 0.0);
}

TEST_CASE("symmetrize projects onto the odd sector") {
  auto grid = unit_ball_grid(2, 4.0, 1.0 / 12);
  ComplexField f = gaussian_bump(grid, 0.5, Vec3{1.8, 1.4, 0}, 0.6, Vec3{});
  double m_before = mass(f);
  SymmetryClass cls = SymmetryClass::all_axes(2);
  CHECK(!is_antisymmetric(f, cls, 1e-6));

  symmetrize(f, cls);
  CHECK(is_antisymmetric(f, cls, 1e-12));
  CHECK(mass(f) < m_before);  // orthogonal projection shrinks the norm
  for (long long c : grid->active) {
    CHECK(std::abs(f.v[c] + f.v[grid->reflect(c, 0)]) < 1e-15);
    CHECK(std::abs(f.v[c] + f.v[grid->reflect(c, 1)]) < 1e-15);
  }

  // Idempotent: a second projection changes nothing.
  ComplexField f2 = f;
  symmetrize(f2, cls);
  for (long long c : grid->active) CHECK(f2.v[c] == f.v[c]);

  // Odd in x only.
  ComplexField h = gaussian_bump(grid, 0.5, Vec3{1.8, 1.4, 0}, 0.6, Vec3{});
  SymmetryClass only_x;
  only_x.antisym[0] = true;
  symmetrize(h, only_x);
  CHECK(is_antisymmetric(h, only_x, 1e-12));
  CHECK(!is_antisymmetric(h, cls, 1e-6));
}

TEST_CASE("bump constructors respect the wall") {
  auto grid = unit_ball_grid(2, 4.0, 1.0 / 16);
  ComplexField f = gaussian_bump(grid, 1.0, Vec3{2.0, 0, 0}, 0.9, Vec3{});
  double peak = max_abs(f);
  CHECK(peak > 0.5);
  double near_wall = 0;
  for (long long c : grid->active) {
    Vec3 x = grid->x(c);
    if (norm3(x, 2) < 1.03) near_wall = std::max(near_wall, std::abs(f.v[c]));
  }
  // The cutoff toe pins the data to zero at the boundary.
  CHECK(near_wall < 1e-6 * peak);

  ComplexField r0 = ring_bump(grid, 1.0, 2.0, 0.4, 0);
  ComplexField r3 = ring_bump(grid, 1.0, 2.0, 0.4, 3);
  CHECK(mass(r3) == doctest::Approx(mass(r0)).epsilon(1e-13));
  // Odd winding phase conjugates under y-reflection.
  for (long long c : grid->active) {
    Vec3 x = grid->x(c);
    if (std::abs(f.v[c]) < 1e-12) continue;
    cplx mirrored = r3.v[grid->reflect(c, 1)];
    CHECK(std::abs(mirrored - std::conj(r3.v[c])) < 1e-13);
  }
}

TEST_CASE("annulus mass sees only the outer shell") {
  auto grid = unit_ball_grid(2, 8.0, 1.0 / 16);
  ComplexField inner = gaussian_bump(grid, 1.0, Vec3{2.5, 1.0, 0}, 0.6, Vec3{});
  CHECK(annulus_mass(inner) < 1e-12 * mass(inner));
  ComplexField outer = gaussian_bump(grid, 1.0, Vec3{6.8, 0, 0}, 0.3, Vec3{});
  CHECK(annulus_mass(outer) > 0.9 * mass(outer));
}

TEST_CASE("pseudoconformal ansatz keeps critical mass constant") {
  auto grid = unit_ball_grid(2, 8.0, 1.0 / 16);
  auto Q = [](double y) { return std::exp(-y * y); };
  Vec3 x0{4.5, 0, 0};
  ComplexField a = pseudoconformal_ansatz(grid, Q, 1.0, 0.0, x0, 0.8, 1.6);
  ComplexField b = pseudoconformal_ansatz(grid, Q, 1.0, 0.5, x0, 0.8, 1.6);
  // d = 2 is the L^2-critical scaling: the profile narrows but the mass is
  // invariant while the support stays clear of the cutoff region.
  CHECK(mass(b) == doctest::Approx(mass(a)).epsilon(1e-8));
  CHECK(max_abs(b) > 1.8 * max_abs(a));

  CHECK_THROWS_AS(pseudoconformal_ansatz(grid, Q, 1.0, 1.0, x0, 0.8, 1.6),
                  InputError);
  CHECK_THROWS_AS(pseudoconformal_ansatz(grid, Q, 1.0, 0.0, x0, 1.6, 0.8),
                  InputError);
  CHECK_THROWS_AS(gaussian_bump(grid, 1.0, x0, -0.5, Vec3{}), InputError);
  CHECK_THROWS_AS(ring_bump(grid, 1.0, -2.0, 0.4, 0), InputError);
}

TEST_CASE("multilinear interpolation is exact on linear fields") {
  auto grid = unit_ball_grid(2, 4.0, 1.0 / 12);
  ComplexField f = zero_field(grid);
  auto lin = [](const Vec3& x) {
    return cplx{1.0 + 2.0 * x[0] - 0.5 * x[1], 3.0 - x[0] + 0.25 * x[1]};
  };
  for (long long c : grid->active) f.v[c] = lin(grid->x(c));

  for (Vec3 p : {Vec3{2.37, 1.79, 0}, Vec3{-1.1, 2.6, 0}, Vec3{3.0, -0.4, 0}}) {
    bool clean = false;
    cplx v = interpolate(f, p, &clean);
    CHECK(clean);
    CHECK(std::abs(v - lin(p)) < 1e-12);
  }
  // Next to the wall part of the stencil is excluded; outside the box the
  // probe is clamped. Both must be flagged.
  bool clean = true;
  interpolate(f, Vec3{1.01, 0.02, 0}, &clean);
  CHECK(!clean);
  clean = true;
  interpolate(f, Vec3{4.5, 0, 0}, &clean);
  CHECK(!clean);
}

TEST_CASE("quadratic interpolation is exact on quadratics and third order") {
  auto grid = unit_ball_grid(2, 4.0, 1.0 / 12);
  ComplexField f = zero_field(grid);
  auto quad = [](const Vec3& x) {
    return cplx{sq(x[0]) - 2 * x[0] * x[1] + 3 * sq(x[1]) + x[0] - 1,
                0.5 * sq(x[0]) + x[1]};
  };
  for (long long c : grid->active) f.v[c] = quad(grid->x(c));
  for (Vec3 p : {Vec3{2.37, 1.79, 0}, Vec3{-1.6, 2.2, 0}}) {
    bool clean = false;
    cplx v = interpolate_quad(f, p, &clean);
    CHECK(clean);
    CHECK(std::abs(v - quad(p)) < 1e-10);
  }

  // On a smooth field the quadratic stencil gains one order over the
  // multilinear one.
  GaussianCase gc{0.7, 0.8, {2.2, 1.4, 0}, {1.0, 2.0, 0}};
  auto probe_err = [&](double h, bool use_quad) {
    auto g = unit_ball_grid(2, 4.0, h);
    ComplexField u = gaussian_bump(g, gc.amp, gc.center, gc.width, gc.k);
    double m = 0;
    for (Vec3 p : {Vec3{2.013, 1.247, 0}, Vec3{2.491, 1.816, 0},
                   Vec3{1.733, 1.522, 0}}) {
      double r2 = sq(p[0] - gc.center[0]) + sq(p[1] - gc.center[1]);
      cplx exact = gc.amp * std::exp(-r2 / sq(gc.width)) *
                   std::exp(cplx{0, gc.k[0] * p[0] + gc.k[1] * p[1]});
      cplx v = use_quad ? interpolate_quad(u, p) : interpolate(u, p);
      m = std::max(m, std::abs(v - exact));
    }
    return m;
  };
  double q1 = probe_err(1.0 / 12, true), q2 = probe_err(1.0 / 24, true);
  CHECK(q1 / q2 > 5.5);                          // about h^3
  CHECK(q2 < probe_err(1.0 / 24, false) / 10.0);  // beats multilinear
}

}  // TEST_SUITE("field")
