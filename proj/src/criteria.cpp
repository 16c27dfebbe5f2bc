#include "exnls/criteria.h"

#include <cmath>

#include "exnls/virial.h"

namespace exnls {
namespace {

double antisym_residual(const ComplexField& f) {
  const ExteriorGrid& g = *f.grid;
  double scale = max_abs(f);
  if (scale == 0) return 0;
  double worst = 0;
  for (int a = 0; a < g.d; ++a)
    for (long long c : g.active)
      worst = std::max(worst, std::abs(f.v[c] + f.v[g.reflect(c, a)]));
  return worst / scale;
}

HypothesisRecord variance_caveat(const ComplexField& f0) {
  HypothesisRecord h;
  h.name = "finite_variance";
  h.value = upsilon2(f0);
  h.bound = -1;
  h.satisfied = true;
  h.note = "finite by construction on the truncated grid; the continuum "
           "statement additionally needs |x| u0 square-integrable";
  return h;
}

void finalize(CriterionReport& r) {
  r.verdict = true;
  for (const auto& h : r.hypotheses) r.verdict = r.verdict && h.satisfied;
}

// The exponent floor is the only failed hypothesis and p still clears the
// conjectured floor 1 + 4/d.
void mark_conjectural(CriterionReport& r, const std::string& floor_name,
                      double p, int d) {
  if (r.verdict || p <= 1 + 4.0 / d) return;
  bool floor_failed = false, rest_ok = true;
  for (const auto& h : r.hypotheses) {
    if (h.name == floor_name)
      floor_failed = !h.satisfied;
    else
      rest_ok = rest_ok && h.satisfied;
  }
  r.conjectural = floor_failed && rest_ok;
}

}  // namespace

const char* theorem_name(TheoremId id) {
  switch (id) {
    case TheoremId::THM_BALL: return "THM_BALL";
    case TheoremId::THM_CONVEX: return "THM_CONVEX";
    case TheoremId::THM_SYM: return "THM_SYM";
    default: return "THM_THRESHOLD";
  }
}

double scaling_lambda_star(const ComplexField& f0, double p,
                           double mass_shift) {
  double G = grad_sq(f0);
  double P = lp1_norm(f0, p);
  if (P <= 0) return -1;
  double m0 = mass(f0);
  return std::pow((p + 1) * (G / 2 + mass_shift * m0) / P, 1 / (p - 1));
}

CriterionReport check_thm_ball(const ComplexField& f0, double p) {
  const ExteriorGrid& g = *f0.grid;
  require(g.d == 2 || g.d == 3, "check_thm_ball: d must be 2 or 3");
  require(g.obstacle.kind == ObstacleKind::Ball &&
              norm3(g.obstacle.center, g.d) == 0,
          "check_thm_ball: obstacle must be a ball centered at the origin");
  const double R = g.obstacle.radius;
  const double E = energy(f0, p);
  const double M = mass(f0);

  CriterionReport r;
  r.theorem = TheoremId::THM_BALL;
  r.hypotheses.push_back({"exponent_floor", p, 5.0, p >= 5, ""});
  double shift = g.d == 2 ? 1 / (8 * R * R) : 0.0;
  if (g.d == 2)
    r.hypotheses.push_back(
        {"shifted_energy", E + shift * M, 0.0, E + shift * M < 0, ""});
  else
    r.hypotheses.push_back({"energy", E, 0.0, E < 0, ""});
  r.hypotheses.push_back(variance_caveat(f0));
  finalize(r);
  mark_conjectural(r, "exponent_floor", p, g.d);
  r.lambda_star = scaling_lambda_star(f0, p, shift);
  return r;
}

CriterionReport check_thm_convex(const ComplexField& f0, double p) {
  const ExteriorGrid& g = *f0.grid;
  require(g.d == 2 || g.d == 3, "check_thm_convex: d must be 2 or 3");
  const double M_r = g.obstacle.max_radius();
  const double m_r = g.obstacle.min_radius();
  const double ratio = M_r / m_r;
  const double ratio_cap = double(g.d) / (g.d - 1);
  const bool admissible = ratio < ratio_cap;
  const double E = energy(f0, p);
  const double M = mass(f0);

  CriterionReport r;
  r.theorem = TheoremId::THM_CONVEX;
  r.hypotheses.push_back(
      {"radius_ratio", ratio, ratio_cap, admissible, ""});
  if (admissible) {
    double floor = 1 + 4 / (g.d - ratio * (g.d - 1));
    r.hypotheses.push_back({"exponent_floor", p, floor, p >= floor, ""});
  } else {
    r.hypotheses.push_back({"exponent_floor", p, 0.0, false,
                            "floor undefined: radius ratio inadmissible"});
  }
  double shift = g.d == 2 ? M_r / (8 * m_r * m_r * m_r) : 0.0;
  if (g.d == 2)
    r.hypotheses.push_back(
        {"shifted_energy", E + shift * M, 0.0, E + shift * M < 0, ""});
  else
    r.hypotheses.push_back({"energy", E, 0.0, E < 0, ""});
  r.hypotheses.push_back(variance_caveat(f0));
  finalize(r);
  mark_conjectural(r, "exponent_floor", p, g.d);
  r.lambda_star = scaling_lambda_star(f0, p, shift);
  return r;
}

CriterionReport check_thm_sym(const ComplexField& f0, double p) {
  const ExteriorGrid& g = *f0.grid;
  require(g.d == 2 || g.d == 3, "check_thm_sym: d must be 2 or 3");
  require(g.obstacle.reflection_symmetric(),
          "check_thm_sym: obstacle must be reflection-invariant");
  const double E = energy(f0, p);

  CriterionReport r;
  r.theorem = TheoremId::THM_SYM;
  double res = antisym_residual(f0);
  r.hypotheses.push_back(
      {"antisymmetric_data", res, 1e-12, res < 1e-12, ""});
  double floor = 1 + 4.0 / g.d;
  r.hypotheses.push_back({"exponent_floor", p, floor, p >= floor, ""});
  r.hypotheses.push_back({"energy", E, 0.0, E < 0, ""});
  r.hypotheses.push_back(variance_caveat(f0));
  finalize(r);
  r.lambda_star = scaling_lambda_star(f0, p, 0);
  return r;
}

namespace {

// Mass-energy product in the (1.3)-style normalization M^{(1-s_c)/s_c} E.
double me_product(double M, double E, double s_c) {
  return std::pow(M, (1 - s_c) / s_c) * E;
}

// ||u||^{1-s_c} ||grad u||^{s_c} from the squared quadratures.
double gn_product(double M, double G, double s_c) {
  return std::pow(M, (1 - s_c) / 2) * std::pow(G, s_c / 2);
}

}  // namespace

CriterionReport check_threshold(const ComplexField& f0,
                                const GroundStateProfile& profile) {
  const ExteriorGrid& g = *f0.grid;
  require(profile.d == g.d, "check_threshold: profile dimension mismatch");
  const double p = profile.p;
  ThresholdQuantities tq = threshold_quantities(profile);
  require(g.d == 2 || tq.s_c < 1,
          "check_threshold: need s_c < 1 (p < 5) in dimension 3");

  const double M = mass(f0);
  const double E = energy(f0, p);
  const double G = grad_sq(f0);

  CriterionReport r;
  r.theorem = TheoremId::THM_THRESHOLD;
  r.hypotheses.push_back({"s_c_in_range", tq.s_c, 1.0,
                          tq.s_c > 0 && tq.s_c < 1, ""});
  double me = me_product(M, E, tq.s_c);
  r.hypotheses.push_back(
      {"mass_energy_product", me, tq.me_product, me < tq.me_product, ""});
  double gp = gn_product(M, G, tq.s_c);
  r.hypotheses.push_back(
      {"gradient_mass_product", gp, tq.gn_product, gp > tq.gn_product, ""});
  finalize(r);
  DeltaMargins dm = delta_margins(f0, profile);
  if (dm.applicable) {
    r.delta1 = dm.delta1;
    r.delta2 = dm.delta2;
  }
  return r;
}

bool monitor_threshold(const DiagnosticsSeries& s,
                       const GroundStateProfile& profile) {
  if (s.rows.empty()) return true;
  ThresholdQuantities tq = threshold_quantities(profile);
  BlowupVerdict v = detect_blowup(s);
  const double M0 = s.rows.front().mass;
  for (const auto& row : s.rows) {
    if (v.status != RunStatus::COMPLETED && row.t >= v.t_detect &&
        v.t_detect >= 0 && row.t > s.rows.front().t)
      break;
    if (!(gn_product(M0, row.grad_sq, tq.s_c) > tq.gn_product)) return false;
  }
  return true;
}

DeltaMargins delta_margins(const ComplexField& f0,
                           const GroundStateProfile& profile) {
  const double p = profile.p;
  ThresholdQuantities tq = threshold_quantities(profile);
  const double M = mass(f0);
  const double E = energy(f0, p);
  const double G = grad_sq(f0);

  DeltaMargins dm;
  bool below = me_product(M, E, tq.s_c) < tq.me_product;
  bool above = gn_product(M, G, tq.s_c) > tq.gn_product;
  if (!below || !above) return dm;

  if (E <= 0) {
    dm.delta1 = 1;  // maximal margin by convention
  } else {
    double num = std::pow(M, 1 - tq.s_c) * std::pow(E, tq.s_c);
    double den = std::pow(tq.mass_Q, 1 - tq.s_c) *
                 std::pow(tq.energy_Q, tq.s_c);
    dm.delta1 = 1 - num / den;
  }

  const double cgn = gn_constant(profile);
  const double e = profile.d * (p - 1) / 2;
  auto f = [&](double x) {
    return 0.5 * x * x - cgn / (p + 1) * std::pow(x, e);
  };
  const double x1 =
      tq.gradnorm_Q * std::pow(tq.l2_Q, (1 - tq.s_c) / tq.s_c);
  const double target = (1 - dm.delta1) * f(x1);

  double lo = x1, hi = 2 * x1;
  int guard = 0;
  while (f(hi) > target && ++guard < 200) hi *= 2;
  require(guard < 200, "delta_margins: level-set bracket failed");
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > target ? lo : hi) = mid;
  }
  dm.delta2 = 0.5 * (lo + hi) / x1 - 1;
  dm.applicable = true;
  return dm;
}

}  // namespace exnls
