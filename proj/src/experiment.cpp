#include "exnls/experiment.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

namespace exnls {

using ojson = nlohmann::ordered_json;

GridPtr make_grid(const ExperimentConfig& c) {
  ObstacleSpec obstacle =
      make_obstacle(c.d, c.obstacle.kind, c.obstacle.params, c.obstacle.center);
  return build_grid(obstacle, c.grid.R_out, c.grid.h);
}

std::shared_ptr<const GroundStateProfile> maybe_ground_state(
    const ExperimentConfig& c) {
  double s_c = 0.5 * c.d - 2.0 / (c.p - 1.0);
  bool threshold_usable = s_c > 0 && (c.d == 2 || c.p < 5);
  if (c.initial.kind != "pseudoconformal" && !threshold_usable) return nullptr;
  return std::make_shared<GroundStateProfile>(
      solve_ground_state(c.d, c.p, c.ground_state_tol));
}

ComplexField make_initial_data(const ExperimentConfig& c, const GridPtr& grid,
                               const GroundStateProfile* profile) {
  const auto& in = c.initial;
  ComplexField f;
  if (in.kind == "gaussian-bump") {
    f = gaussian_bump(grid, in.amplitude, in.center, in.width, in.wavevector,
                      in.cutoff_margin);
  } else if (in.kind == "ring-bump") {
    f = ring_bump(grid, in.amplitude, in.ring_radius, in.width, in.winding,
                  in.cutoff_margin);
  } else if (in.kind == "pseudoconformal") {
    require(profile != nullptr,
            "initial data: the pseudoconformal ansatz needs a ground state");
    double r0 = in.psi_r0 > 0 ? in.psi_r0 : grid->obstacle.max_radius();
    double r1 = in.psi_r1 > 0 ? in.psi_r1 : r0 + 1.0;
    const GroundStateProfile* pr = profile;
    f = pseudoconformal_ansatz(
        grid, [pr](double r) { return pr->value(r); }, in.T, 0.0, in.center,
        r0, r1);
    if (in.amplitude != 1.0) scale(cplx(in.amplitude, 0), f.v);
  } else {
    throw InputError("initial.kind: unknown constructor " + in.kind);
  }

  SymmetryClass cls;
  bool any = false;
  for (int a = 0; a < grid->d; ++a) {
    cls.antisym[a] = in.antisym[a] != 0;
    any = any || cls.antisym[a];
  }
  if (any) symmetrize(f, cls);
  f.time = 0;
  return f;
}

double MmsSolution::psi(double r) const {
  return amp * rise.value(r) * (1.0 - fall.value(r));
}

double MmsSolution::lap_psi(double r) const {
  if (r <= rise.r0 || r >= fall.r1) return 0;
  double a = rise.value(r), a1 = rise.d1(r), a2 = rise.d2(r);
  double b = 1.0 - fall.value(r), b1 = -fall.d1(r), b2 = -fall.d2(r);
  double p1 = amp * (a1 * b + a * b1);
  double p2 = amp * (a2 * b + 2 * a1 * b1 + a * b2);
  return p2 + (d - 1) / r * p1;
}

cplx MmsSolution::value(double t, const Vec3& x) const {
  double ps = psi(norm3(x, d));
  return cplx(std::cos(omega * t), std::sin(omega * t)) * ps;
}

cplx MmsSolution::forcing(double t, const Vec3& x) const {
  // F = i u_t + Lap u + |u|^{p-1} u for u = e^{i omega t} psi(r); the window
  // keeps psi nonnegative, so |psi|^{p-1} psi = psi^p.
  double r = norm3(x, d);
  if (r <= rise.r0 || r >= fall.r1) return cplx(0, 0);
  double ps = psi(r);
  double amplitude = -omega * ps + lap_psi(r) + std::pow(ps, p);
  return cplx(std::cos(omega * t), std::sin(omega * t)) * amplitude;
}

ComplexField MmsSolution::sample(const GridPtr& grid, double t) const {
  ComplexField f = zero_field(grid);
  const auto& g = *grid;
  for (int c : g.active) f.v[c] = value(t, g.x(c));
  f.time = t;
  return f;
}

double MmsSolution::error(const ComplexField& f) const {
  const auto& g = *f.grid;
  double hd = std::pow(g.h, g.d);
  double s = det_sum(g.active.size(), [&](std::size_t i) {
    int c = g.active[i];
    return std::norm(f.v[c] - value(f.time, g.x(c)));
  });
  return std::sqrt(hd * s);
}

std::vector<ConvergenceLevel> convergence_study(const ExperimentConfig& base,
                                                const MmsSolution& mms,
                                                int levels) {
  require(levels >= 1, "convergence_study: need at least one level");
  ObstacleSpec obstacle = make_obstacle(base.d, base.obstacle.kind,
                                        base.obstacle.params,
                                        base.obstacle.center);
  std::vector<ConvergenceLevel> out;
  for (int k = 0; k < levels; ++k) {
    ConvergenceLevel lvl;
    lvl.h = base.grid.h / double(1 << k);
    lvl.dt = base.time.dt / double(1 << k);
    long long nsteps = std::llround(base.time.t_end / lvl.dt);
    require(nsteps >= 1 && std::abs(nsteps * lvl.dt - base.time.t_end) <=
                               1e-9 * base.time.t_end,
            "convergence_study: dt must divide t_end");

    GridPtr grid = build_grid(obstacle, base.grid.R_out, lvl.h);
    ComplexField u = mms.sample(grid, 0.0);
    StepControls ctl;
    ctl.forcing = [&mms](double t, const Vec3& x) { return mms.forcing(t, x); };
    for (long long i = 0; i < nsteps; ++i) {
      u = step(u, lvl.dt, base.p, ctl);
      u.time = (i + 1) * lvl.dt;
    }
    lvl.error = mms.error(u);
    lvl.order = out.empty() ? 0 : std::log2(out.back().error / lvl.error);
    out.push_back(lvl);
  }
  return out;
}

std::vector<IdentityTrace> identity_traces(const DiagnosticsSeries& s) {
  std::vector<IdentityTrace> out;
  const auto& rows = s.rows;
  if (rows.size() < 3) return out;
  double dt_rec = rows[1].t - rows[0].t;
  if (!(dt_rec > 0)) return out;

  // A detection row may sit off the lattice; difference only the uniform
  // prefix.
  std::size_t m = 2;
  while (m < rows.size() &&
         std::abs(rows[m].t - rows[m - 1].t - dt_rec) <= 1e-9 * dt_rec)
    ++m;
  if (m < 3) return out;

  auto add = [&](const std::string& name, int order, auto&& moment,
                 auto&& rhs) {
    IdentityTrace tr;
    tr.name = name;
    for (std::size_t i = 1; i + 1 < m; ++i) {
      double lhs =
          order == 1
              ? (moment(rows[i + 1]) - moment(rows[i - 1])) / (2 * dt_rec)
              : (moment(rows[i + 1]) - 2 * moment(rows[i]) +
                 moment(rows[i - 1])) /
                    (dt_rec * dt_rec);
      tr.t.push_back(rows[i].t);
      tr.lhs.push_back(lhs);
      tr.rhs.push_back(rhs(rows[i]));
    }
    out.push_back(std::move(tr));
  };

  add("dt_ups2", 1, [](const DiagnosticsRow& r) { return r.upsilon2; },
      [](const DiagnosticsRow& r) { return r.momentum_x; });
  add("d2t_ups2", 2, [](const DiagnosticsRow& r) { return r.upsilon2; },
      [](const DiagnosticsRow& r) { return r.rhs_4_2; });
  add("dt_ups1", 1, [](const DiagnosticsRow& r) { return r.upsilon1; },
      [](const DiagnosticsRow& r) { return r.dt_ups1; });
  add("d2t_ups1", 2, [](const DiagnosticsRow& r) { return r.upsilon1; },
      [](const DiagnosticsRow& r) { return r.rhs_4_4; });
  if (s.symmetric_sector) {
    for (int j = 0; j < s.d; ++j)
      add("d2t_gamma_" + std::to_string(j + 1), 2,
          [j](const DiagnosticsRow& r) { return r.gamma[j]; },
          [j](const DiagnosticsRow& r) { return r.rhs_5[j]; });
  }
  double rad = s.rad;
  add(s.ball_obstacle ? "d2t_V_ball" : "d2t_V_convex", 2,
      [](const DiagnosticsRow& r) { return r.variance_ball; },
      [rad](const DiagnosticsRow& r) { return r.rhs_4_2 - 2 * rad * r.rhs_4_4; });
  if (s.symmetric_sector) {
    int d = s.d;
    double C = s.sym_C;
    add("d2t_V_sym", 2,
        [](const DiagnosticsRow& r) { return r.variance_sym; },
        [d, C](const DiagnosticsRow& r) {
          double v = r.rhs_4_2;
          for (int j = 0; j < d; ++j) v -= C * r.rhs_5[j];
          return v;
        });
  }
  return out;
}

VirialReport build_virial_report(const DiagnosticsSeries& s,
                                 const ComplexField& f0) {
  VirialReport rep;
  auto push = [&rep](const std::string& name, double lhs, double rhs) {
    IdentityRecord rec;
    rec.name = name;
    rec.lhs = lhs;
    rec.rhs = rhs;
    rec.abs_residual = std::abs(lhs - rhs);
    rec.rel_residual =
        rec.abs_residual / (std::max(std::abs(lhs), std::abs(rhs)) + 1e-300);
    rep.records.push_back(rec);
  };

  PohozaevResiduals pr = pohozaev_residuals(f0);
  push("poho1", pr.lhs1, pr.rhs1);
  push("poho2", pr.lhs2, pr.rhs2);

  for (const auto& tr : identity_traces(s)) {
    if (tr.lhs.empty()) continue;
    // Worst row in absolute terms, scaled against the trace's sup norm.
    double scale = 0, worst_abs = -1;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < tr.lhs.size(); ++i) {
      scale = std::max(scale, std::max(std::abs(tr.lhs[i]), std::abs(tr.rhs[i])));
      double a = std::abs(tr.lhs[i] - tr.rhs[i]);
      if (a > worst_abs) {
        worst_abs = a;
        worst = i;
      }
    }
    IdentityRecord rec;
    rec.name = tr.name;
    rec.lhs = tr.lhs[worst];
    rec.rhs = tr.rhs[worst];
    rec.abs_residual = worst_abs;
    rec.rel_residual = worst_abs / (scale + 1e-300);
    rep.records.push_back(rec);
  }
  return rep;
}

std::string series_csv(const DiagnosticsSeries& s) {
  std::string out = "t,mass,energy,grad_sq,lp1_norm,upsilon1,upsilon2";
  for (int j = 0; j < s.d; ++j) out += ",gamma" + std::to_string(j + 1);
  out += ",variance_ball,variance_sym,momentum_x,rhs_4_2,rhs_4_4";
  for (int j = 0; j < s.d; ++j) out += ",rhs_5_" + std::to_string(j + 1);
  out += ",boundary_int_weighted,annulus_mass\n";
  for (const auto& r : s.rows) {
    std::string line = format_g17(r.t);
    auto add = [&line](double v) {
      line += ',';
      line += format_g17(v);
    };
    add(r.mass);
    add(r.energy);
    add(r.grad_sq);
    add(r.lp1_norm);
    add(r.upsilon1);
    add(r.upsilon2);
    for (int j = 0; j < s.d; ++j) add(r.gamma[j]);
    add(r.variance_ball);
    add(r.variance_sym);
    add(r.momentum_x);
    add(r.rhs_4_2);
    add(r.rhs_4_4);
    for (int j = 0; j < s.d; ++j) add(r.rhs_5[j]);
    add(r.boundary_int_weighted);
    add(r.annulus_mass);
    out += line;
    out += '\n';
  }
  return out;
}

std::string identity_rows_csv(const std::vector<IdentityTrace>& traces) {
  std::string out = "identity,t,lhs,rhs,abs_residual\n";
  for (const auto& tr : traces) {
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      out += tr.name;
      out += ',';
      out += format_g17(tr.t[i]);
      out += ',';
      out += format_g17(tr.lhs[i]);
      out += ',';
      out += format_g17(tr.rhs[i]);
      out += ',';
      out += format_g17(std::abs(tr.lhs[i] - tr.rhs[i]));
      out += '\n';
    }
  }
  return out;
}

std::string virial_report_json(const VirialReport& r) {
  ojson recs = ojson::array();
  for (const auto& rec : r.records) {
    ojson j;
    j["name"] = rec.name;
    j["lhs"] = rec.lhs;
    j["rhs"] = rec.rhs;
    j["abs_residual"] = rec.abs_residual;
    j["rel_residual"] = rec.rel_residual;
    recs.push_back(j);
  }
  ojson j;
  j["records"] = recs;
  return j.dump(2) + "\n";
}

namespace {

ojson criterion_to_json(const CriterionReport& r) {
  ojson j;
  j["theorem"] = theorem_name(r.theorem);
  j["verdict"] = r.verdict;
  j["conjectural"] = r.conjectural;
  ojson rows = ojson::array();
  for (const auto& h : r.hypotheses) {
    ojson hj;
    hj["name"] = h.name;
    hj["value"] = h.value;
    hj["bound"] = h.bound;
    hj["satisfied"] = h.satisfied;
    if (!h.note.empty()) hj["note"] = h.note;
    rows.push_back(hj);
  }
  j["hypotheses"] = rows;
  // Negative margins mean "not applicable" throughout.
  j["delta1"] = r.delta1;
  j["delta2"] = r.delta2;
  j["lambda_star"] = r.lambda_star;
  return j;
}

}  // namespace

std::string criterion_json(const CriterionReport& r) {
  return criterion_to_json(r).dump(2) + "\n";
}

std::string criteria_bundle_json(const ComplexField& f0, double p,
                                 const GroundStateProfile* profile) {
  ojson checked = ojson::array();
  ojson skipped = ojson::array();
  auto attempt = [&](TheoremId id,
                     const std::function<CriterionReport()>& eval) {
    try {
      checked.push_back(criterion_to_json(eval()));
    } catch (const InputError& e) {
      ojson j;
      j["theorem"] = theorem_name(id);
      j["reason"] = e.what();
      skipped.push_back(j);
    }
  };
  attempt(TheoremId::THM_BALL, [&] { return check_thm_ball(f0, p); });
  attempt(TheoremId::THM_CONVEX, [&] { return check_thm_convex(f0, p); });
  attempt(TheoremId::THM_SYM, [&] { return check_thm_sym(f0, p); });
  if (profile) {
    attempt(TheoremId::THM_THRESHOLD,
            [&] { return check_threshold(f0, *profile); });
  } else {
    ojson j;
    j["theorem"] = theorem_name(TheoremId::THM_THRESHOLD);
    j["reason"] = "no ground-state profile for this (d, p)";
    skipped.push_back(j);
  }
  ojson j;
  j["checked"] = checked;
  j["skipped"] = skipped;
  return j.dump(2) + "\n";
}

std::string verdict_json(const BlowupVerdict& v, const DiagnosticsSeries& s,
                         int monitor_state) {
  ojson j;
  j["status"] = run_status_name(v.status);
  j["t_detect"] = v.t_detect;
  j["growth_factor"] = v.growth_factor;
  j["rows"] = s.rows.size();
  j["final_dt"] = s.final_dt;
  j["nonconvergent_tail"] = s.nonconvergent_tail;
  j["sym_C"] = s.sym_C;
  j["variance_shift_radius"] = s.rad;
  if (monitor_state < 0)
    j["monitor_threshold"] = nullptr;
  else
    j["monitor_threshold"] = monitor_state != 0;
  return j.dump(2) + "\n";
}

std::string ground_state_json(const GroundStateProfile& q) {
  ojson j;
  j["d"] = q.d;
  j["p"] = q.p;
  j["q0"] = q.q0;
  j["mass"] = q.mass;
  j["gradsq"] = q.gradsq;
  j["lp1"] = q.lp1;
  j["energy"] = 0.5 * q.gradsq - q.lp1 / (q.p + 1);
  j["gn_constant"] = gn_constant(q);
  j["r_max"] = q.r_max;
  j["bisection_window"] = q.window;
  double s_c = 0.5 * q.d - 2.0 / (q.p - 1.0);
  if (s_c > 0) {
    ThresholdQuantities tq = threshold_quantities(q);
    ojson t;
    t["s_c"] = tq.s_c;
    t["me_product"] = tq.me_product;
    t["gn_product"] = tq.gn_product;
    j["threshold"] = t;
  }
  return j.dump(2) + "\n";
}

std::string convergence_json(const std::vector<ConvergenceLevel>& levels) {
  ojson arr = ojson::array();
  for (const auto& l : levels) {
    ojson j;
    j["h"] = l.h;
    j["dt"] = l.dt;
    j["error"] = l.error;
    j["order"] = l.order;
    arr.push_back(j);
  }
  ojson j;
  j["levels"] = arr;
  return j.dump(2) + "\n";
}

namespace {

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.good()) throw std::runtime_error("cannot open " + path);
  out.write(content.data(), std::streamsize(content.size()));
  out.flush();
  if (!out.good()) throw std::runtime_error("failed writing " + path);
}

}  // namespace

int run_experiment(const ExperimentConfig& c) {
  std::string stage = "validate";
  try {
    validate_config(c);

    stage = "output-dir";
    std::string dir = resolved_output_dir(c);
    std::filesystem::create_directories(dir);

    stage = "ground-state";
    auto profile = maybe_ground_state(c);

    stage = "grid";
    GridPtr grid = make_grid(c);

    stage = "initial-data";
    ComplexField u0 = make_initial_data(c, grid, profile.get());

    stage = "criteria";
    std::string criteria = criteria_bundle_json(u0, c.p, profile.get());

    stage = "simulate";
    RunOptions opt;
    opt.t_end = c.time.t_end;
    opt.dt = c.time.dt;
    opt.record_every = c.time.record_every;
    opt.grad_factor = c.time.grad_factor;
    opt.dt_min = c.time.dt_min;
    opt.sym_C = c.variance_C;
    RunResult res = run(u0, c.p, opt);

    stage = "monitor";
    int monitor_state = -1;
    double s_c = 0.5 * c.d - 2.0 / (c.p - 1.0);
    if (profile && s_c > 0)
      monitor_state = monitor_threshold(res.series, *profile) ? 1 : 0;

    stage = "identity-report";
    VirialReport rep = build_virial_report(res.series, u0);

    stage = "write";
    write_text(dir + "/series.csv", series_csv(res.series));
    write_text(dir + "/verdict.json",
               verdict_json(res.verdict, res.series, monitor_state));
    write_text(dir + "/criteria.json", criteria);
    write_text(dir + "/virial_report.json", virial_report_json(rep));
    return 0;
  } catch (const std::exception& e) {
    ojson err;
    err["error"]["stage"] = stage;
    err["error"]["message"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
}

}  // namespace exnls
