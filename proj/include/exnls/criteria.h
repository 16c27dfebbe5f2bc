#pragma once

#include <string>
#include <vector>

#include "exnls/evolution.h"
#include "exnls/field.h"
#include "exnls/ground_state.h"

// Blow-up criteria: each checker evaluates one theorem's hypothesis set on
// given initial data and reports every inequality with its measured value,
// the bound, and the outcome. Verdicts never assert blow-up, only whether
// the hypotheses hold on the grid.

namespace exnls {

enum class TheoremId { THM_BALL, THM_CONVEX, THM_SYM, THM_THRESHOLD };
const char* theorem_name(TheoremId id);

struct HypothesisRecord {
  std::string name;
  double value = 0;
  double bound = 0;
  bool satisfied = false;
  std::string note;  // caveats, e.g. bounds that the grid cannot test
};

struct CriterionReport {
  TheoremId theorem = TheoremId::THM_BALL;
  std::vector<HypothesisRecord> hypotheses;
  bool verdict = false;      // AND over the hypothesis flags
  // The exponent floor failed but p still exceeds 1 + 4/d, where the result
  // is conjectured to persist; every other hypothesis holds.
  bool conjectural = false;
  double delta1 = -1;        // threshold margins, negative when absent
  double delta2 = -1;
  double lambda_star = -1;   // amplitude past which E + c M turns negative
};

// Ball obstacle: p >= 5, shifted energy E + M/(8R^2) negative in d=2,
// plain E < 0 in d=3.
CriterionReport check_thm_ball(const ComplexField& f0, double p);

// Convex obstacle with radius ratio M/m below d/(d-1); the ratio determines
// the exponent floor 1 + 4/(d - (M/m)(d-1)) and, in d=2, the energy shift
// M/(8 m^3) per unit mass. An inadmissible ratio gives a false verdict, not
// an error.
CriterionReport check_thm_convex(const ComplexField& f0, double p);

// Data odd under every axis reflection: p >= 1 + 4/d and E < 0.
CriterionReport check_thm_sym(const ComplexField& f0, double p);

// Ground-state threshold: mass-energy product below the Q value and
// gradient-mass product above it (both strict).
CriterionReport check_threshold(const ComplexField& f0,
                                const GroundStateProfile& profile);

// True when ||u0||^{1-s_c} ||grad u(t)||^{s_c} stays strictly above the Q
// product at every recorded row before detection; empty series is
// vacuously true.
bool monitor_threshold(const DiagnosticsSeries& s,
                       const GroundStateProfile& profile);

struct DeltaMargins {
  double delta1 = -1;
  double delta2 = -1;
  bool applicable = false;  // both threshold inequalities hold
};

// delta1 = 1 - M^{1-s_c} E^{s_c} / (Q value), taken as 1 when E <= 0;
// delta2 = x2/x1 - 1 where f(x2) = (1-delta1) f(x1) on the decreasing
// branch of f(x) = x^2/2 - C_GN/(p+1) x^{d(p-1)/2}.
DeltaMargins delta_margins(const ComplexField& f0,
                           const GroundStateProfile& profile);

// Smallest amplitude making E[lambda u] + mass_shift * M[lambda u] < 0;
// negative when the data has no nonlinear content to scale against.
double scaling_lambda_star(const ComplexField& f0, double p,
                           double mass_shift);

}  // namespace exnls
