#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace exnls {

using cplx = std::complex<double>;

// Input-contract violations (bad parameters, incompatible objects).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical failures (solver breakdown, non-convergence).
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw InputError(msg);
}

// All emitted numbers carry 17 significant digits so output round-trips
// through text exactly.
inline std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double sq(double x) { return x * x; }

using Vec3 = std::array<double, 3>;

inline double dot3(const Vec3& a, const Vec3& b, int d) {
  double s = 0;
  for (int k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

inline double norm3(const Vec3& a, int d) { return std::sqrt(dot3(a, a, d)); }

// C^inf transition: 0 at t<=0, 1 at t>=1, all derivatives vanish at the
// joins. A finite-smoothness step leaves derivative jumps whose spectral
// tail radiates grid-speed ripples off any cutoff it shapes; this one is
// spectrally clean.
inline double smoothstep_exp(double t) {
  if (t <= 0) return 0;
  if (t >= 1) return 1;
  double g = std::exp(-1.0 / t), h = std::exp(-1.0 / (1.0 - t));
  return g / (g + h);
}

inline double smoothstep_exp_d1(double t) {
  if (t <= 0 || t >= 1) return 0;
  double s = 1.0 - t;
  double g = std::exp(-1.0 / t), h = std::exp(-1.0 / s);
  double gp = g / (t * t), hp = -h / (s * s);
  double den = g + h;
  return (gp * h - g * hp) / (den * den);
}

inline double smoothstep_exp_d2(double t) {
  if (t <= 0 || t >= 1) return 0;
  double s = 1.0 - t;
  double g = std::exp(-1.0 / t), h = std::exp(-1.0 / s);
  double gp = g / (t * t), hp = -h / (s * s);
  double gpp = g / (t * t * t * t) - 2 * g / (t * t * t);
  double hpp = h / (s * s * s * s) - 2 * h / (s * s * s);
  double den = g + h;
  return (gpp * h - g * hpp) / (den * den) -
         2 * (gp * h - g * hp) * (gp + hp) / (den * den * den);
}

// Radial window rising from 0 to 1 across [r0, r1]; value/derivatives are
// exact closed forms, which the manufactured-solution forcing needs.
struct RadialWindow {
  double r0 = 0, r1 = 1;

  double value(double r) const { return smoothstep_exp((r - r0) / (r1 - r0)); }
  double d1(double r) const {
    double w = r1 - r0;
    return smoothstep_exp_d1((r - r0) / w) / w;
  }
  double d2(double r) const {
    double w = r1 - r0;
    return smoothstep_exp_d2((r - r0) / w) / (w * w);
  }
};

// Derivative at s=s1 of the quadratic through (s0,v0), (s1,v1), (s2,v2).
inline double lagrange3_deriv(double s0, double v0, double s1, double v1,
                              double s2, double v2) {
  return v0 * (s1 - s2) / ((s0 - s1) * (s0 - s2)) +
         v1 * (2 * s1 - s0 - s2) / ((s1 - s0) * (s1 - s2)) +
         v2 * (s1 - s0) / ((s2 - s0) * (s2 - s1));
}

inline cplx lagrange3_deriv(double s0, cplx v0, double s1, cplx v1, double s2,
                            cplx v2) {
  return {lagrange3_deriv(s0, v0.real(), s1, v1.real(), s2, v2.real()),
          lagrange3_deriv(s0, v0.imag(), s1, v1.imag(), s2, v2.imag())};
}

// Surface area of the unit sphere S^{d-1}; the d=1 value 2 counts the two
// half-lines of the radial profile.
inline double sphere_area(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * M_PI;
    case 3: return 4.0 * M_PI;
    default: throw InputError("sphere_area: d must be 1, 2, or 3");
  }
}

}  // namespace exnls
