#pragma once

#include <array>
#include <string>
#include <vector>

#include "exnls/util.h"

// Experiment configuration: a flat "section.key = value" text format (diff
// friendly, exact round-trip) with JSON accepted as an alternative input.

namespace exnls {

struct ExperimentConfig {
  int d = 2;
  double p = 3;

  struct Obstacle {
    std::string kind = "ball";  // ball | ellipsoid
    std::vector<double> params = {1.0};
    Vec3 center{};
  } obstacle;

  struct Grid {
    double R_out = 8;
    double h = 0.0625;
  } grid;

  struct Time {
    double dt = 1e-3;
    double t_end = 0.5;
    double record_every = 1e-2;
    double dt_min = 1e-7;
    double grad_factor = 10;
  } time;

  struct Initial {
    std::string kind = "gaussian-bump";  // gaussian-bump | ring-bump |
                                         // pseudoconformal
    double amplitude = 1;
    Vec3 center{};
    double width = 0.8;
    double ring_radius = 2.5;
    int winding = 0;
    Vec3 wavevector{};
    std::array<int, 3> antisym{};  // 1 = project odd along that axis
    double cutoff_margin = 0.5;
    double T = 1;                  // pseudoconformal collapse time
    double psi_r0 = 0;             // 0 = derived from the obstacle
    double psi_r1 = 0;
  } initial;

  double ground_state_tol = 0;
  double variance_C = 0;  // 0 = AUTO (recommended_C)
  std::string output_dir = "out";
  unsigned long long seed = 0;
};

// Text may be the flat key-value format or a JSON object.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical flat form; parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const ExperimentConfig& c);

// Throws InputError with the offending key on the first violation.
void validate_config(const ExperimentConfig& c);

// Output directory after the environment override (EXNLS_OUTPUT_DIR).
std::string resolved_output_dir(const ExperimentConfig& c);

}  // namespace exnls
