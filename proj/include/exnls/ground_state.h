#pragma once

#include <vector>

#include "exnls/field.h"

// Radial ground state Q of  Q'' + (d-1)/r Q' - Q + Q^p = 0,  Q'(0) = 0,
// Q > 0 decaying, solved by bisection shooting on Q(0). Profiles carry
// uniform radial samples plus the norms needed by the threshold machinery.

namespace exnls {

struct GroundStateProfile {
  int d = 2;
  double p = 3;
  double q0 = 0;          // Q(0)
  double dr = 0;          // sample spacing
  double r_max = 0;       // last sample radius; Q(r_max) < 1e-10 q0
  double window = 0;      // final bisection bracket width
  std::vector<double> Q;  // Q(i * dr)
  std::vector<double> dQ; // Q'(i * dr)

  // sphere_area(d)-weighted radial integrals
  double mass = 0;     // |Q|_2^2
  double gradsq = 0;   // |grad Q|_2^2
  double lp1 = 0;      // |Q|_{p+1}^{p+1}

  double value(double r) const;  // cubic interpolation, 0 past r_max
};

// d in {1,2,3}; p > 1 and, for d = 3, p < 5 (H^1 subcritical). tol is the
// bisection window on Q(0); 0 means as tight as double precision allows,
// which keeps the grafted far-field tail accurate to ~1e-10 absolute.
GroundStateProfile solve_ground_state(int d, double p, double tol = 0);

// Sharp Gagliardo-Nirenberg constant from the profile. Computed two ways
// (direct norm ratio and the gradient/mass identities); they must agree to
// 1e-6 or the profile is rejected as under-resolved.
double gn_constant(const GroundStateProfile& profile);

struct ThresholdQuantities {
  double s_c = 0;        // d/2 - 2/(p-1), positive in the supercritical range
  double mass_Q = 0;
  double energy_Q = 0;
  double l2_Q = 0;       // |Q|_2
  double gradnorm_Q = 0; // |grad Q|_2
  double me_product = 0; // M[Q]^{(1-s_c)/s_c} E[Q]
  double gn_product = 0; // |Q|_2^{1-s_c} |grad Q|_2^{s_c}
};

// Requires s_c > 0 (and p < 5 when d = 3, enforced by the solver).
ThresholdQuantities threshold_quantities(const GroundStateProfile& profile);

// Q(|x - x0|) sampled on the grid (no cutoff; callers place the obstacle far
// from the profile support).
ComplexField sample_profile(const GridPtr& grid, const GroundStateProfile& pr,
                            const Vec3& x0);

}  // namespace exnls
