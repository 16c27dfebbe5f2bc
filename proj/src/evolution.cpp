#include "exnls/evolution.h"

#include <cmath>

#include "exnls/linsolve.h"
#include "exnls/virial.h"

namespace exnls {
namespace {

bool finite_field(const CVec& v) {
  // One deterministic reduction; NaN/Inf poison the sum.
  double s = norm2_sq(v);
  return std::isfinite(s);
}

// rho such that rho * (|b|^2 - |a|^2) = G(|b|^2) - G(|a|^2) with
// G(s) = 2/(p+1) s^{(p+1)/2}; falls back to G' at the average when the
// difference quotient loses too many digits.
double nonlinear_density(double a2, double b2, double p) {
  double avg = 0.5 * (a2 + b2);
  if (avg <= 0) return 0;
  double diff = b2 - a2;
  if (std::abs(diff) <= 1e-8 * avg)
    return std::pow(avg, 0.5 * (p - 1));
  double e = 0.5 * (p + 1);
  return 2 / (p + 1) * (std::pow(b2, e) - std::pow(a2, e)) / diff;
}

}  // namespace

ComplexField step(const ComplexField& f, double dt, double p,
                  const StepControls& ctl, StepStats* stats) {
  require(dt > 0, "step: dt must be positive");
  require(p > 1, "step: p must exceed 1");
  const ExteriorGrid& g = *f.grid;
  const std::size_t n = g.ntot;
  const cplx idt(0, 1.0 / dt);
  const double inv2h2 = 1.0 / (2 * g.h * g.h);

  CVec lc(n, cplx(0));
  auto apply = [&](const CVec& in, CVec& out) {
    apply_lc(g, in, lc);
    parallel_for(n, [&](std::size_t i) { out[i] = idt * in[i] - inv2h2 * lc[i]; });
  };
  CVec diag(n);
  parallel_for(n, [&](std::size_t i) { diag[i] = idt - inv2h2 * g.diag[i]; });

  // Fixed part of the right-hand side: (i/dt) u - (1/2) Lap_h u + forcing.
  CVec blin(n, cplx(0));
  apply_lc(g, f.v, blin);
  parallel_for(n, [&](std::size_t i) { blin[i] = idt * f.v[i] + inv2h2 * blin[i]; });
  if (ctl.forcing) {
    double t_mid = f.time + dt / 2;
    parallel_for(g.active.size(), [&](std::size_t k) {
      long long c = g.active[k];
      blin[c] += ctl.forcing(t_mid, g.x(c));
    });
  }

  ComplexField next;
  next.grid = f.grid;
  next.time = f.time + dt;
  next.v = f.v;  // warm start
  CVec b(n), prev(n);

  for (int it = 1; it <= ctl.max_fp_iters; ++it) {
    if (ctl.skip_nonlinearity) {
      b = blin;
    } else {
      b = blin;
      parallel_for(g.active.size(), [&](std::size_t k) {
        long long c = g.active[k];
        double rho =
            nonlinear_density(std::norm(f.v[c]), std::norm(next.v[c]), p);
        b[c] -= rho * 0.5 * (f.v[c] + next.v[c]);
      });
    }
    prev = next.v;
    bicgstab(apply, diag, b, next.v, ctl.lin_tol, 2000);
    if (ctl.skip_nonlinearity) {
      if (stats) stats->fp_iterations = it;
      return next;
    }
    axpy(cplx(-1, 0), next.v, prev);  // prev = old - new
    double delta = std::sqrt(norm2_sq(prev));
    if (delta <= ctl.fp_tol * std::sqrt(norm2_sq(next.v))) {
      if (stats) stats->fp_iterations = it;
      return next;
    }
  }
  throw SolverError("step: midpoint iteration did not converge in " +
                    std::to_string(ctl.max_fp_iters) + " sweeps");
}

ComplexField step(const ComplexField& f, double dt, double p) {
  return step(f, dt, p, StepControls{});
}

DiagnosticsRow diagnostics_row(const ComplexField& f, double p, double rad,
                               double sym_C) {
  VirialAssembly a = assemble_virial(f, p);
  DiagnosticsRow r;
  r.t = f.time;
  r.mass = a.mass;
  r.energy = a.energy;
  r.grad_sq = a.gradsq;
  r.lp1_norm = a.lp1;
  r.upsilon1 = a.ups1;
  r.upsilon2 = a.ups2;
  double wc = variance_weight_constant(rad);
  r.variance_ball = a.ups2 - 2 * rad * a.ups1 + wc * a.mass;
  double vsym = a.ups2 + sym_C * sym_C * a.mass;
  for (int ax = 0; ax < a.d; ++ax) {
    r.gamma[ax] = a.gamma_q[ax];
    vsym -= sym_C * a.gamma_q[ax];
    r.rhs_5[ax] = detail::d2t_gamma_rhs_raw(a, ax);
    r.dt_gamma[ax] = a.dt_gamma[ax];
  }
  r.variance_sym = vsym;
  r.momentum_x = a.dt_ups2;
  r.rhs_4_2 = detail::d2t_upsilon2_rhs_raw(a);
  r.rhs_4_4 = detail::d2t_upsilon1_rhs_raw(a);
  r.boundary_int_weighted = a.bnd_xn;
  r.annulus_mass = annulus_mass(f);
  r.dt_ups1 = a.dt_ups1;
  r.bnd_bracket = -4 * a.bnd_xn + 4 * rad * a.bnd_xn_over_r;
  return r;
}

RunResult run(const ComplexField& f0, double p, const RunOptions& opt) {
  require(opt.t_end > 0, "run: t_end must be positive");
  require(opt.dt > 0 && opt.record_every > 0, "run: dt and cadence positive");
  long long n_rec = std::llround(opt.t_end / opt.record_every);
  require(n_rec >= 1 &&
              std::abs(n_rec * opt.record_every - opt.t_end) <= 1e-9 * opt.t_end,
          "run: t_end must be an integer multiple of record_every");
  long long n_sub = std::llround(opt.record_every / opt.dt);
  require(n_sub >= 1 && std::abs(n_sub * opt.dt - opt.record_every) <=
                            1e-9 * opt.record_every,
          "run: dt must divide record_every");

  const GridPtr& grid = f0.grid;
  RunResult out;
  DiagnosticsSeries& s = out.series;
  s.d = grid->d;
  s.p = p;
  s.rad = grid->obstacle.max_radius();
  s.sym_C = opt.sym_C > 0 ? opt.sym_C : recommended_C(grid);
  s.ball_obstacle = grid->obstacle.kind == ObstacleKind::Ball;
  s.symmetric_sector =
      grid->obstacle.reflection_symmetric() &&
      is_antisymmetric(f0, SymmetryClass::all_axes(grid->d), 1e-9);

  double dt_cur = opt.record_every / n_sub;
  StepControls ctl;
  ctl.forcing = opt.forcing;

  ComplexField u = f0;
  const double t0 = f0.time;
  s.rows.push_back(diagnostics_row(u, p, s.rad, s.sym_C));
  const double grad0 = s.rows.front().grad_sq;
  const double grad_cap = sq(opt.grad_factor) * grad0;

  bool stopped = false;
  for (long long irec = 0; irec < n_rec && !stopped; ++irec) {
    double rec_start = t0 + irec * opt.record_every;
    long long k = 0;
    while (k < n_sub) {
      ComplexField unew;
      bool ok = true;
      StepStats st;
      try {
        unew = step(u, dt_cur, p, ctl, &st);
        ok = finite_field(unew.v);
      } catch (const SolverError&) {
        if (!opt.allow_halving) throw;
        ok = false;
      }
      if (ok && opt.allow_halving && st.fp_iterations > 30) ok = false;
      if (!ok) {
        if (!opt.allow_halving)
          throw SolverError("run: step produced non-finite values");
        if (dt_cur / 2 < opt.dt_min) {
          s.nonconvergent_tail = true;
          stopped = true;
          break;
        }
        dt_cur /= 2;
        k *= 2;
        n_sub *= 2;
        continue;
      }
      u = std::move(unew);
      ++k;
      u.time = k == n_sub ? rec_start + opt.record_every : rec_start + k * dt_cur;
      if (grad0 > 0 && grad_sq(u) > grad_cap) {
        s.rows.push_back(diagnostics_row(u, p, s.rad, s.sym_C));
        stopped = true;
        break;
      }
    }
    if (!stopped) {
      u.time = t0 + (irec + 1) * opt.record_every;
      s.rows.push_back(diagnostics_row(u, p, s.rad, s.sym_C));
      const DiagnosticsRow& last = s.rows.back();
      if (last.annulus_mass > 1e-6 * last.mass) stopped = true;
    }
  }
  s.final_dt = dt_cur;
  out.verdict = detect_blowup(s, opt.grad_factor, opt.dt_min);
  return out;
}

BlowupVerdict detect_blowup(const DiagnosticsSeries& s, double grad_factor,
                            double dt_min) {
  require(!s.rows.empty(), "detect_blowup: empty series");
  const double grad0 = s.rows.front().grad_sq;
  auto ratio = [&](double g) {
    return grad0 > 0 && g >= 0 ? std::sqrt(g / grad0) : 1.0;
  };
  BlowupVerdict v;
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const DiagnosticsRow& r = s.rows[i];
    if (r.annulus_mass > 1e-6 * r.mass) {
      v.status = RunStatus::TRUNCATION_CONTAMINATED;
      v.t_detect = r.t;
      v.growth_factor = ratio(r.grad_sq);
      return v;
    }
    if (grad0 > 0 && r.grad_sq > sq(grad_factor) * grad0) {
      v.status = RunStatus::BLOWUP_DETECTED;
      v.t_detect = r.t;
      v.growth_factor = ratio(r.grad_sq);
      return v;
    }
  }
  if (s.nonconvergent_tail && (dt_min <= 0 || s.final_dt / 2 < dt_min)) {
    v.status = RunStatus::BLOWUP_DETECTED;
    v.t_detect = s.rows.back().t;
    v.growth_factor = ratio(s.rows.back().grad_sq);
    return v;
  }
  v.status = RunStatus::COMPLETED;
  v.t_detect = -1;
  v.growth_factor = ratio(s.rows.back().grad_sq);
  return v;
}

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::BLOWUP_DETECTED: return "BLOWUP_DETECTED";
    case RunStatus::TRUNCATION_CONTAMINATED: return "TRUNCATION_CONTAMINATED";
    default: return "COMPLETED";
  }
}

}  // namespace exnls
