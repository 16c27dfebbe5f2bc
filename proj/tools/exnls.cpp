#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "exnls/experiment.h"

using namespace exnls;

namespace {

int fail(const std::string& stage, const std::string& message) {
  nlohmann::ordered_json err;
  err["error"]["stage"] = stage;
  err["error"]["message"] = message;
  std::cerr << err.dump() << "\n";
  return 1;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.good()) throw std::runtime_error("cannot open " + path);
  out.write(content.data(), std::streamsize(content.size()));
  out.flush();
  if (!out.good()) throw std::runtime_error("failed writing " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "focusing NLS outside a convex obstacle: simulation, identity "
      "verification, and blow-up criteria"};
  app.require_subcommand(1);

  bool serial = false;
  app.add_flag("--serial", serial, "disable the OpenMP kernel paths");

  int rc = 0;

  auto* gs = app.add_subcommand(
      "groundstate", "solve the radial ground state and print its norms");
  int gs_d = 2;
  double gs_p = 3, gs_tol = 0;
  gs->add_option("--d", gs_d, "dimension (1, 2, or 3)");
  gs->add_option("--p", gs_p, "nonlinearity exponent");
  gs->add_option("--tol", gs_tol, "bisection window on Q(0); 0 = machine tight");
  gs->callback([&] {
    set_parallel(!serial);
    std::cout << ground_state_json(solve_ground_state(gs_d, gs_p, gs_tol));
  });

  auto* sim = app.add_subcommand(
      "simulate", "run a configured experiment; writes series.csv, "
                  "verdict.json, criteria.json, virial_report.json");
  std::string sim_cfg;
  sim->add_option("--config", sim_cfg, "config file (flat key=value or JSON)")
      ->required();
  sim->callback([&] {
    set_parallel(!serial);
    rc = run_experiment(load_config(sim_cfg));
  });

  auto* cr = app.add_subcommand(
      "criteria", "evaluate theorem hypotheses on the configured initial data");
  std::string cr_cfg, cr_thm;
  cr->add_option("--config", cr_cfg, "config file")->required();
  cr->add_option("--theorem", cr_thm,
                 "THM_BALL | THM_CONVEX | THM_SYM | THM_THRESHOLD "
                 "(default: every applicable one)");
  cr->callback([&] {
    set_parallel(!serial);
    ExperimentConfig c = load_config(cr_cfg);
    validate_config(c);
    auto profile = maybe_ground_state(c);
    GridPtr grid = make_grid(c);
    ComplexField u0 = make_initial_data(c, grid, profile.get());
    if (cr_thm.empty()) {
      std::cout << criteria_bundle_json(u0, c.p, profile.get());
      return;
    }
    CriterionReport r;
    if (cr_thm == "THM_BALL")
      r = check_thm_ball(u0, c.p);
    else if (cr_thm == "THM_CONVEX")
      r = check_thm_convex(u0, c.p);
    else if (cr_thm == "THM_SYM")
      r = check_thm_sym(u0, c.p);
    else if (cr_thm == "THM_THRESHOLD") {
      require(profile != nullptr,
              "criteria: no ground-state profile for this (d, p)");
      r = check_threshold(u0, *profile);
    } else {
      throw InputError("criteria: unknown theorem id " + cr_thm);
    }
    std::cout << criterion_json(r);
  });

  auto* vi = app.add_subcommand(
      "verify-identities",
      "run the configured simulation and check every catalogued identity; "
      "writes virial_report.json and identity_rows.csv");
  std::string vi_cfg;
  vi->add_option("--config", vi_cfg, "config file")->required();
  vi->callback([&] {
    set_parallel(!serial);
    ExperimentConfig c = load_config(vi_cfg);
    validate_config(c);
    std::string dir = resolved_output_dir(c);
    std::filesystem::create_directories(dir);
    auto profile = maybe_ground_state(c);
    GridPtr grid = make_grid(c);
    ComplexField u0 = make_initial_data(c, grid, profile.get());
    RunOptions opt;
    opt.t_end = c.time.t_end;
    opt.dt = c.time.dt;
    opt.record_every = c.time.record_every;
    opt.grad_factor = c.time.grad_factor;
    opt.dt_min = c.time.dt_min;
    opt.sym_C = c.variance_C;
    RunResult res = run(u0, c.p, opt);
    VirialReport rep = build_virial_report(res.series, u0);
    write_text(dir + "/virial_report.json", virial_report_json(rep));
    write_text(dir + "/identity_rows.csv",
               identity_rows_csv(identity_traces(res.series)));
    std::cout << virial_report_json(rep);
  });

  auto* cv = app.add_subcommand(
      "convergence", "manufactured-solution convergence study on the "
                     "configured (d, p, grid, time) setup");
  std::string cv_cfg;
  int cv_levels = 2;
  cv->add_option("--config", cv_cfg, "config file")->required();
  cv->add_option("--levels", cv_levels, "number of (h, dt) halvings + 1");
  cv->callback([&] {
    set_parallel(!serial);
    ExperimentConfig c = load_config(cv_cfg);
    validate_config(c);
    MmsSolution mms;
    mms.d = c.d;
    mms.p = c.p;
    std::cout << convergence_json(convergence_study(c, mms, cv_levels));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    return fail("cli", e.what());
  }
  return rc;
}
