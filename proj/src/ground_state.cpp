#include "exnls/ground_state.h"

#include <algorithm>
#include <cmath>

#include "exnls/util.h"

namespace exnls {
namespace {

constexpr double kDr = 1.0 / 1024.0;
constexpr double kRCap = 60.0;

struct State {
  double q;  // Q
  double v;  // Q'
};

State rhs(int d, double p, double r, State y) {
  double nl = (y.q > 0) ? std::pow(y.q, p) : -std::pow(-y.q, p);
  return {y.v, -(d - 1) / r * y.v + y.q - nl};
}

State rk4_step(int d, double p, double r, State y, double dr = kDr) {
  State k1 = rhs(d, p, r, y);
  State k2 = rhs(d, p, r + dr / 2, {y.q + dr / 2 * k1.q, y.v + dr / 2 * k1.v});
  State k3 = rhs(d, p, r + dr / 2, {y.q + dr / 2 * k2.q, y.v + dr / 2 * k2.v});
  State k4 = rhs(d, p, r + dr, {y.q + dr * k3.q, y.v + dr * k3.v});
  return {y.q + dr / 6 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q),
          y.v + dr / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
}

// Series start: Q(r) = q0 + (q0 - q0^p) r^2 / (2d) + O(r^4), valid for the
// first step only (kDr < 1e-3).
State series_state(int d, double p, double q0, double r) {
  double c = (q0 - std::pow(q0, p)) / (2.0 * d);
  return {q0 + c * r * r, 2 * c * r};
}

enum class Shot { Regrew, Crossed };

// Below the ground state the solution turns back up (Q' changes sign before
// Q reaches zero); above it Q crosses zero. Reaching the radius cap in a
// monotone decay means q0 is within roundoff of the target; either bucket
// works, so it lands in Regrew and the bracket tightens from above.
Shot classify(int d, double p, double q0) {
  State y = series_state(d, p, q0, kDr);
  for (double r = kDr; r < kRCap; r += kDr) {
    y = rk4_step(d, p, r, y);
    if (y.q <= 0) return Shot::Crossed;
    if (y.v >= 0) return Shot::Regrew;
  }
  return Shot::Regrew;
}

// Decaying Bessel-type solution of the far-field linearization
// k'' + (d-1)/r k' - k = 0.
double tail_value(int d, double r) {
  switch (d) {
    case 1: return std::exp(-r);
    case 2: return std::cyl_bessel_k(0.0, r);
    default: return std::exp(-r) / r;
  }
}

double tail_deriv(int d, double r) {
  switch (d) {
    case 1: return -std::exp(-r);
    case 2: return -std::cyl_bessel_k(1.0, r);
    default: return -std::exp(-r) * (1.0 / r + 1.0 / (r * r));
  }
}

// Composite Simpson over uniform samples; a trailing odd interval is closed
// with the three-point right-edge rule so no sample is dropped.
double simpson(const std::vector<double>& f, double dr) {
  size_t n = f.size();
  if (n < 2) return 0;
  double s = 0;
  size_t i = 0;
  for (; i + 2 < n; i += 2) s += f[i] + 4 * f[i + 1] + f[i + 2];
  s *= dr / 3;
  if (i + 1 < n) {  // one interval left
    if (i == 0) return dr / 2 * (f[0] + f[1]);
    s += dr / 12 * (-f[i - 1] + 8 * f[i] + 5 * f[i + 1]);
  }
  return s;
}

}  // namespace

double GroundStateProfile::value(double r) const {
  if (r < 0) r = -r;
  if (r >= r_max || Q.size() < 4) return 0;
  double s = r / dr;
  auto i = static_cast<size_t>(s);
  if (i + 1 >= Q.size()) return 0;
  double t = s - static_cast<double>(i);
  // Catmull-Rom through the four surrounding samples; clamp the ends.
  double ym = (i == 0) ? Q[1] : Q[i - 1];  // even extension at r = 0
  double y0 = Q[i], y1 = Q[i + 1];
  double yp = (i + 2 < Q.size()) ? Q[i + 2] : 0;
  double a = 2 * y0;
  double b = y1 - ym;
  double c = 2 * ym - 5 * y0 + 4 * y1 - yp;
  double e = -ym + 3 * y0 - 3 * y1 + yp;
  return 0.5 * (a + b * t + c * t * t + e * t * t * t);
}

GroundStateProfile solve_ground_state(int d, double p, double tol) {
  require(d >= 1 && d <= 3, "ground state: dimension must be 1, 2 or 3");
  require(p > 1, "ground state: p must exceed 1");
  require(d < 3 || p < 5, "ground state: p must be below 5 in dimension 3");
  require(tol >= 0, "ground state: tolerance must be nonnegative");

  // Bracket. Q(0) = 1 is the constant solution, so the target exceeds 1.
  double lo = 1.05;
  if (classify(d, p, lo) == Shot::Crossed)
    throw SolverError("ground state: bracket seed already crosses zero");
  double hi = 2;
  while (classify(d, p, hi) == Shot::Regrew) {
    hi *= 2;
    if (hi > 64) throw SolverError("ground state: no crossing below Q(0)=64");
  }
  double floor_tol = 8 * std::numeric_limits<double>::epsilon() * hi;
  double window = std::max(tol, floor_tol);
  while (hi - lo > window) {
    double mid = 0.5 * (lo + hi);
    (classify(d, p, mid) == Shot::Crossed ? hi : lo) = mid;
  }

  GroundStateProfile pr;
  pr.d = d;
  pr.p = p;
  pr.q0 = 0.5 * (lo + hi);
  pr.dr = kDr;
  pr.window = hi - lo;

  // Record the converged trajectory down to 1e-5 q0, then graft the decaying
  // far-field solution before the unstable shooting mode can contaminate the
  // samples, and extend it until the amplitude is below 1e-11 q0.
  pr.Q.push_back(pr.q0);
  pr.dQ.push_back(0);
  State y = series_state(d, p, pr.q0, kDr);
  double r = kDr;
  double q_switch = 1e-5 * pr.q0;
  while (y.q > q_switch && y.v < 0 && r < kRCap) {
    pr.Q.push_back(y.q);
    pr.dQ.push_back(y.v);
    y = rk4_step(d, p, r, y);
    r += kDr;
  }
  if (y.q > 1e-3 * pr.q0 || y.q <= 0)
    throw SolverError("ground state: shooting lost the decaying branch");
  double r_s = r;
  double scale = y.q / tail_value(d, r_s);
  double q_stop = 1e-11 * pr.q0;
  for (; ; r += kDr) {
    double q = scale * tail_value(d, r);
    pr.Q.push_back(q);
    pr.dQ.push_back(scale * tail_deriv(d, r));
    if (q < q_stop) break;
  }
  pr.r_max = r;

  double sd = sphere_area(d);
  size_t n = pr.Q.size();
  std::vector<double> f0(n), f1(n), f2(n);
  for (size_t i = 0; i < n; ++i) {
    double ri = static_cast<double>(i) * kDr;
    double w = sd * std::pow(ri, d - 1);
    f0[i] = w * sq(pr.Q[i]);
    f1[i] = w * sq(pr.dQ[i]);
    f2[i] = w * std::pow(pr.Q[i], p + 1);
  }
  pr.mass = simpson(f0, kDr);
  pr.gradsq = simpson(f1, kDr);
  pr.lp1 = simpson(f2, kDr);
  return pr;
}

double gn_constant(const GroundStateProfile& pr) {
  double d = pr.d, p = pr.p;
  double grad = std::sqrt(pr.gradsq);
  double l2 = std::sqrt(pr.mass);
  double a = d * (p - 1) / 2;  // gradient exponent in the sharp inequality
  double direct = pr.lp1 / (std::pow(grad, a) * std::pow(l2, p + 1 - a));
  // The same constant via the Pohozaev norm identities.
  double via_id = 2 * (p + 1) / (d * (p - 1)) *
                  std::pow(grad, -(d * (p - 1) - 4) / 2) *
                  std::pow(l2, ((d - 2) * (p - 1) - 4) / 2);
  if (std::abs(direct / via_id - 1) > 1e-6)
    throw SolverError("gn_constant: norm identities disagree; "
                      "profile under-resolved");
  return direct;
}

ThresholdQuantities threshold_quantities(const GroundStateProfile& pr) {
  ThresholdQuantities t;
  t.s_c = pr.d / 2.0 - 2.0 / (pr.p - 1);
  require(t.s_c > 0, "threshold quantities: need mass-supercritical p "
                     "(d/2 - 2/(p-1) > 0)");
  t.mass_Q = pr.mass;
  t.energy_Q = 0.5 * pr.gradsq - pr.lp1 / (pr.p + 1);
  t.l2_Q = std::sqrt(pr.mass);
  t.gradnorm_Q = std::sqrt(pr.gradsq);
  t.me_product = std::pow(t.mass_Q, (1 - t.s_c) / t.s_c) * t.energy_Q;
  t.gn_product = std::pow(t.l2_Q, 1 - t.s_c) * std::pow(t.gradnorm_Q, t.s_c);
  return t;
}

ComplexField sample_profile(const GridPtr& grid, const GroundStateProfile& pr,
                            const Vec3& x0) {
  ComplexField f = zero_field(grid);
  const auto& g = *grid;
  parallel_for(g.active.size(), [&](size_t k) {
    int c = g.active[k];
    Vec3 x = g.x(c);
    double r2 = 0;
    for (int a = 0; a < g.d; ++a) r2 += sq(x[a] - x0[a]);
    f.v[c] = pr.value(std::sqrt(r2));
  });
  return f;
}

}  // namespace exnls
