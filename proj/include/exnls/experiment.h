#pragma once

#include <memory>
#include <string>
#include <vector>

#include "exnls/config.h"
#include "exnls/criteria.h"
#include "exnls/evolution.h"
#include "exnls/ground_state.h"
#include "exnls/virial.h"

// Experiment orchestration: grid and data construction from a config, the
// simulation pipeline with its four output files, the identity report built
// from a recorded series, and the manufactured-solution convergence study.

namespace exnls {

GridPtr make_grid(const ExperimentConfig& c);

// Ground state profile when the configured (d, p) admits the threshold
// comparison or the ansatz needs it; null otherwise.
std::shared_ptr<const GroundStateProfile> maybe_ground_state(
    const ExperimentConfig& c);

ComplexField make_initial_data(const ExperimentConfig& c, const GridPtr& grid,
                               const GroundStateProfile* profile = nullptr);

// Radially windowed standing wave with the forcing that makes it an exact
// solution; drives the convergence study.
struct MmsSolution {
  int d = 2;
  double p = 3;
  double omega = 1;
  double amp = 0.5;
  RadialWindow rise{1.5, 2.5};
  RadialWindow fall{4.0, 5.5};

  double psi(double r) const;
  double lap_psi(double r) const;
  cplx value(double t, const Vec3& x) const;
  cplx forcing(double t, const Vec3& x) const;
  ComplexField sample(const GridPtr& grid, double t) const;
  // Discrete L2 distance between a field and the exact solution at its time.
  double error(const ComplexField& f) const;
};

struct ConvergenceLevel {
  double h = 0;
  double dt = 0;
  double error = 0;
  double order = 0;  // vs the previous level; 0 on the first
};

// Runs the manufactured problem at (h, dt) / 2^k for k < levels, fixed dt
// (no halving), and reports errors at t_end with observed orders.
std::vector<ConvergenceLevel> convergence_study(const ExperimentConfig& base,
                                                const MmsSolution& mms,
                                                int levels);

// One identity traced along the uniform prefix of a recorded series:
// interior record times, finite-difference lhs, analytic rhs.
struct IdentityTrace {
  std::string name;
  std::vector<double> t, lhs, rhs;
};

std::vector<IdentityTrace> identity_traces(const DiagnosticsSeries& s);

// Traces collapsed to worst-row records, plus the two stationary identities
// evaluated on the initial field.
VirialReport build_virial_report(const DiagnosticsSeries& s,
                                 const ComplexField& f0);

// Serialization used by the pipeline, the CLI, and the tests.
std::string series_csv(const DiagnosticsSeries& s);
std::string identity_rows_csv(const std::vector<IdentityTrace>& traces);
std::string virial_report_json(const VirialReport& r);
std::string criterion_json(const CriterionReport& r);
// Criteria bundle for the data: every theorem whose preconditions the
// grid/data meet, plus a skipped list with reasons.
std::string criteria_bundle_json(const ComplexField& f0, double p,
                                 const GroundStateProfile* profile);
std::string verdict_json(const BlowupVerdict& v, const DiagnosticsSeries& s,
                         int monitor_state);  // -1 n/a, 0 false, 1 true
std::string ground_state_json(const GroundStateProfile& q);
std::string convergence_json(const std::vector<ConvergenceLevel>& levels);

// Full pipeline: ground state (as needed), grid, data, criteria pre-check,
// simulation, identity report; writes series.csv, verdict.json,
// criteria.json, virial_report.json under the resolved output directory.
// Failures print a machine-readable error record to stderr and return
// nonzero without partial rewrites of later stages.
int run_experiment(const ExperimentConfig& c);

}  // namespace exnls
