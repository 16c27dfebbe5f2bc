#include <doctest.h>

#include <cmath>

#include "exnls/ground_state.h"

using namespace exnls;

namespace {

// Independent shooting oracle for the d = 2, p = 3 profile, written against a
// plain RK4 so it shares nothing with the library solver (different stepper,
// different start, different quadrature). Returns the L^2 mass 2 pi int Q^2 r.
double townes_mass_oracle() {
  const double dr = 2e-4;  // trapezoid quadrature error ~ dr^2, keep < 1e-6
  // One trajectory: returns +1 if Q crosses zero (too much energy), -1 if Q'
  // turns positive while Q > 0 (too little), and accumulates the mass.
  auto shoot = [&](double q0, double* mass_out) {
    double r = dr;
    double a = (q0 - q0 * q0 * q0) / 4.0;  // Q''(0)/2 for d = 2
    double Q = q0 + a * r * r, P = 2 * a * r;
    double m = 0;
    auto fp = [](double r, double Q, double P) {
      return -P / r + Q - Q * Q * Q;
    };
    while (r < 30.0) {
      double k1q = P, k1p = fp(r, Q, P);
      double k2q = P + 0.5 * dr * k1p,
             k2p = fp(r + 0.5 * dr, Q + 0.5 * dr * k1q, P + 0.5 * dr * k1p);
      double k3q = P + 0.5 * dr * k2p,
             k3p = fp(r + 0.5 * dr, Q + 0.5 * dr * k2q, P + 0.5 * dr * k2p);
      double k4q = P + dr * k3p, k4p = fp(r + dr, Q + dr * k3q, P + dr * k3p);
      double Qn = Q + dr / 6 * (k1q + 2 * k2q + 2 * k3q + k4q);
      double Pn = P + dr / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
      m += M_PI * dr * (Q * Q * r + Qn * Qn * (r + dr));  // trapezoid
      r += dr;
      Q = Qn;
      P = Pn;
      // At the converged Q(0) these exits only fire deep in the tail, after
      // the mass has been collected.
      if (mass_out) *mass_out = m;
      if (Q < 0) return 1;
      if (P > 0 && Q < 1.0) return -1;
      if (Q < 1e-9) break;
    }
    return 0;
  };
  double lo = 2.0, hi = 2.5;
  for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
    double mid = 0.5 * (lo + hi);
    (shoot(mid, nullptr) > 0 ? hi : lo) = mid;
  }
  double m = 0;
  shoot(0.5 * (lo + hi), &m);
  return m;
}

// The stationary equation pairs to two integral identities; together they fix
// every norm ratio.
void check_norm_relations(const GroundStateProfile& pr) {
  double G = pr.gradsq, M = pr.mass, L = pr.lp1;
  int d = pr.d;
  double p = pr.p;
  CHECK(std::abs(G + M - L) / L < 1e-6);
  CHECK(std::abs((d / 2.0 - 1) * G + (d / 2.0) * M - d / (p + 1) * L) / L <
        1e-6);
  double cG = d * (p - 1) / (2 * (p + 1) - d * (p - 1));  // G / M
  CHECK(G == doctest::Approx(cG * M).epsilon(1e-6));
  CHECK(L == doctest::Approx((1 + cG) * M).epsilon(1e-6));
}

}  // namespace

TEST_SUITE("ground_state") {

TEST_CASE("d = 1 cubic profile is the exact sech") {
  auto pr = solve_ground_state(1, 3.0);
  CHECK(pr.q0 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  double worst = 0;
  for (double r = 0; r < 12.0; r += 0.0173)
    worst = std::max(worst,
                     std::abs(pr.value(r) - std::sqrt(2.0) / std::cosh(r)));
  CHECK(worst < 1e-8);
  check_norm_relations(pr);
  // Closed forms: mass 4, gradient 4/3, quartic 16/3.
  CHECK(pr.mass == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(pr.gradsq == doctest::Approx(4.0 / 3).epsilon(1e-7));
  CHECK(pr.lp1 == doctest::Approx(16.0 / 3).epsilon(1e-7));
}

TEST_CASE("planar cubic profile matches the independent shooting oracle") {
  auto pr = solve_ground_state(2, 3.0);
  double oracle = townes_mass_oracle();
  CHECK(oracle == doctest::Approx(11.70089652446833).epsilon(1e-6));
  CHECK(pr.mass == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(pr.q0 == doctest::Approx(2.206200864691989).epsilon(1e-9));
  check_norm_relations(pr);
  // d = 2, p = 3 degenerates to G = M, L = 2M.
  CHECK(pr.gradsq == doctest::Approx(pr.mass).epsilon(1e-6));

  // The sharp interpolation constant is 2 / mass here, computed inside from
  // the norm ratios.
  CHECK(gn_constant(pr) ==
        doctest::Approx(0.17092707347712105).epsilon(1e-8));
}

TEST_CASE("remaining acceptance pairs satisfy the norm relations") {
  check_norm_relations(solve_ground_state(2, 5.0));
  auto pr = solve_ground_state(3, 3.0);
  check_norm_relations(pr);
  // d = 3, p = 3: G = 3M and L = 4M, so E = G/2 - L/4 = M/2.
  double E = 0.5 * pr.gradsq - pr.lp1 / 4;
  CHECK(E == doctest::Approx(0.5 * pr.mass).epsilon(1e-6));
}

TEST_CASE("threshold quantities in the intercritical range") {
  auto pr = solve_ground_state(3, 3.0);
  auto tq = threshold_quantities(pr);
  CHECK(tq.s_c == doctest::Approx(0.5));
  CHECK(tq.mass_Q == doctest::Approx(pr.mass));
  CHECK(tq.l2_Q == doctest::Approx(std::sqrt(pr.mass)));
  CHECK(tq.gradnorm_Q == doctest::Approx(std::sqrt(pr.gradsq)));
  // s_c = 1/2 makes both products plain geometric means.
  CHECK(tq.me_product == doctest::Approx(tq.mass_Q * tq.energy_Q));
  CHECK(tq.gn_product ==
        doctest::Approx(std::sqrt(tq.l2_Q * tq.gradnorm_Q)));
  CHECK(tq.energy_Q > 0);

  // L^2-critical pairs have s_c = 0; the scale-invariant products blow up.
  auto crit = solve_ground_state(2, 3.0);
  CHECK_THROWS_AS(threshold_quantities(crit), InputError);
}

TEST_CASE("solver rejects unsupported exponents and dimensions") {
  CHECK_THROWS_AS(solve_ground_state(4, 3.0), InputError);
  CHECK_THROWS_AS(solve_ground_state(0, 3.0), InputError);
  CHECK_THROWS_AS(solve_ground_state(3, 5.0), InputError);  // H^1 critical
  CHECK_THROWS_AS(solve_ground_state(2, 1.0), InputError);
}

TEST_CASE("bisection tolerance is honored") {
  auto loose = solve_ground_state(2, 3.0, 1e-6);
  CHECK(loose.window <= 1e-6);
  auto tight = solve_ground_state(2, 3.0);
  CHECK(tight.window < 1e-12);
  CHECK(loose.mass == doctest::Approx(tight.mass).epsilon(1e-4));
}

TEST_CASE("sampled profile carries its mass onto the grid") {
  auto pr = solve_ground_state(2, 3.0);
  auto grid = build_grid(make_obstacle(2, "ball", {1.0}), 12.0, 1.0 / 16);
  ComplexField f = sample_profile(grid, pr, Vec3{4.0, 0, 0});
  // The obstacle carves out a little of the tail; the rest of the mass must
  // land on the grid.
  CHECK(mass(f) == doctest::Approx(pr.mass).epsilon(1e-2));
  CHECK(mass(f) < pr.mass);
  CHECK(max_abs(f) == doctest::Approx(pr.q0).epsilon(1e-2));
}

}  // TEST_SUITE("ground_state")
