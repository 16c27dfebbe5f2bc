#pragma once

#include <functional>
#include <vector>

#include "exnls/field.h"

// Crank-Nicolson time stepping for i u_t + Lap u = -|u|^{p-1} u on the
// exterior grid, plus the diagnostics recorder and blow-up detection used by
// the simulation driver.

namespace exnls {

// Optional source term; evaluated once per step at the midpoint time.
using ForcingFn = std::function<cplx(double t, const Vec3& x)>;

struct StepControls {
  ForcingFn forcing;
  bool skip_nonlinearity = false;  // pure linear Schroedinger step
  double fp_tol = 1e-10;           // midpoint fixed-point, relative
  double lin_tol = 1e-12;          // inner linear solves, relative
  int max_fp_iters = 50;
};

struct StepStats {
  int fp_iterations = 0;
};

// One implicit midpoint step. The nonlinearity uses the difference-quotient
// form rho = [G(|u+|^2) - G(|u|^2)] / (|u+|^2 - |u|^2), G(s) = 2/(p+1)
// s^{(p+1)/2}, applied to the midpoint value; with the symmetric conductance
// operator this conserves the discrete mass and energy exactly once the
// fixed point converges. Throws SolverError when it does not.
ComplexField step(const ComplexField& f, double dt, double p,
                  const StepControls& ctl, StepStats* stats = nullptr);
ComplexField step(const ComplexField& f, double dt, double p);

// One recorded time slice. The CSV schema exposes everything up to
// annulus_mass; the trailing fields feed the identity report only.
struct DiagnosticsRow {
  double t = 0;
  double mass = 0;
  double energy = 0;
  double grad_sq = 0;
  double lp1_norm = 0;
  double upsilon1 = 0;
  double upsilon2 = 0;
  double gamma[3] = {};
  double variance_ball = 0;       // shift radius = obstacle max radius
  double variance_sym = 0;
  double momentum_x = 0;          // d(upsilon2)/dt quadrature value
  double rhs_4_2 = 0;             // second-derivative RHS of upsilon2
  double rhs_4_4 = 0;             // second-derivative RHS of upsilon1
  double rhs_5[3] = {};           // second-derivative RHS of each gamma
  double boundary_int_weighted = 0;  // integral of |du/dn|^2 (x.n)
  double annulus_mass = 0;

  double dt_ups1 = 0;
  double dt_gamma[3] = {};
  double bnd_bracket = 0;  // combined variance boundary term
};

struct DiagnosticsSeries {
  int d = 2;
  double p = 3;
  double rad = 0;        // shift radius used by variance_ball
  double sym_C = 0;      // C used by variance_sym and rhs assembly
  double final_dt = 0;   // step size in effect when the run ended
  bool nonconvergent_tail = false;  // stopped because dt collapsed
  bool ball_obstacle = false;       // names the variance identity
  // Initial data odd under every axis over a reflection-invariant obstacle,
  // so the quadrant-reduced identities are in force.
  bool symmetric_sector = false;
  std::vector<DiagnosticsRow> rows;
};

enum class RunStatus { COMPLETED, BLOWUP_DETECTED, TRUNCATION_CONTAMINATED };

const char* run_status_name(RunStatus s);

struct BlowupVerdict {
  RunStatus status = RunStatus::COMPLETED;
  double t_detect = -1;      // meaningful unless COMPLETED
  double growth_factor = 1;  // sqrt(grad_sq ratio) at detection or end
};

struct RunOptions {
  double t_end = 1;
  double dt = 1e-3;           // must divide record_every
  double record_every = 1e-2; // must divide t_end
  double grad_factor = 10;    // blow-up threshold on sqrt(grad_sq ratio)
  double dt_min = 1e-7;
  bool allow_halving = true;  // off: step failures propagate as SolverError
  double sym_C = 0;           // 0 picks recommended_C(grid)
  ForcingFn forcing;
};

struct RunResult {
  DiagnosticsSeries series;
  BlowupVerdict verdict;
};

// Every functional of one field, in one assembly pass.
DiagnosticsRow diagnostics_row(const ComplexField& f, double p, double rad,
                               double sym_C);

// Advance from f0 to t_end recording every record_every, halving dt on
// nonlinear-solve trouble (failure or more than 30 iterations) down to
// dt_min. Record times stay on the exact uniform lattice k * record_every;
// a threshold-crossing row may be appended off-lattice at the detection
// time before the run stops.
RunResult run(const ComplexField& f0, double p, const RunOptions& opt);

// Series-level classification. Contamination (annulus_mass > 1e-6 * mass)
// takes precedence over gradient growth row by row; dt collapse recorded in
// the series counts as blow-up when it reached dt_min (any collapse if
// dt_min <= 0).
BlowupVerdict detect_blowup(const DiagnosticsSeries& s,
                            double grad_factor = 10, double dt_min = 0);

}  // namespace exnls
