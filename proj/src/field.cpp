#include "exnls/field.h"

#include <cmath>

namespace exnls {

ComplexField zero_field(const GridPtr& grid) {
  ComplexField f;
  f.grid = grid;
  f.v.assign(grid->ntot, cplx{0, 0});
  return f;
}

void apply_lc(const ExteriorGrid& g, const CVec& in, CVec& out) {
  const std::size_t na = g.active.size();
  if (g.d == 2) {
    const long long sx = g.stride[0], sy = g.stride[1];
    parallel_for(na, [&](std::size_t k) {
      long long c = g.active[k];
      out[c] = g.diag[c] * in[c] -
               (in[c - sx] + in[c + sx] + in[c - sy] + in[c + sy]);
    });
  } else {
    const long long sx = g.stride[0], sy = g.stride[1], sz = g.stride[2];
    parallel_for(na, [&](std::size_t k) {
      long long c = g.active[k];
      out[c] = g.diag[c] * in[c] -
               (in[c - sx] + in[c + sx] + in[c - sy] + in[c + sy] +
                in[c - sz] + in[c + sz]);
    });
  }
  // Thin cuts: both cells are live but the edge carries no coupling.
  for (const auto& e : g.blocked_edges) {
    out[e[0]] += in[e[1]];
    out[e[1]] += in[e[0]];
  }
}

double mass(const ComplexField& f) {
  double hd = std::pow(f.grid->h, f.grid->d);
  return hd * norm2_sq(f.v);
}

double grad_sq(const ComplexField& f) {
  const ExteriorGrid& g = *f.grid;
  const CVec& u = f.v;
  double scale = std::pow(g.h, g.d - 2);
  double s = det_sum(g.active.size(), [&](std::size_t k) {
    long long c = g.active[k];
    const ArmData* arm = g.arm_index[c] >= 0 ? &g.arms[g.arm_index[c]] : nullptr;
    double acc = 0;
    for (int a = 0; a < g.d; ++a) {
      bool wall_p = arm && (arm->wall_plus & (1u << a));
      bool wall_m = arm && (arm->wall_minus & (1u << a));
      if (wall_p)
        acc += std::norm(u[c]) / arm->theta_plus[a];
      else
        acc += std::norm(u[c + g.stride[a]] - u[c]);  // plus edges owned here
      if (wall_m) acc += std::norm(u[c]) / arm->theta_minus[a];
    }
    return acc;
  });
  return scale * s;
}

double lp1_norm(const ComplexField& f, double p) {
  require(p > 1, "lp1_norm: p must exceed 1");
  const ExteriorGrid& g = *f.grid;
  double hd = std::pow(g.h, g.d);
  double e = 0.5 * (p + 1);
  const CVec& u = f.v;
  double s;
  if (p == 3.0) {
    s = det_sum(u.size(), [&](std::size_t i) { return sq(std::norm(u[i])); });
  } else if (p == 5.0) {
    s = det_sum(u.size(), [&](std::size_t i) {
      double n = std::norm(u[i]);
      return n * n * n;
    });
  } else {
    s = det_sum(u.size(), [&](std::size_t i) {
      double n = std::norm(u[i]);
      return n > 0 ? std::pow(n, e) : 0.0;
    });
  }
  return hd * s;
}

double energy(const ComplexField& f, double p) {
  return 0.5 * grad_sq(f) - lp1_norm(f, p) / (p + 1);
}

double annulus_mass(const ComplexField& f) {
  const ExteriorGrid& g = *f.grid;
  double hd = std::pow(g.h, g.d);
  double rin = g.R_out - 2.0;
  double s = det_sum(g.active.size(), [&](std::size_t k) {
    long long c = g.active[k];
    double r = norm3(g.x(c), g.d);
    return r > rin ? std::norm(f.v[c]) : 0.0;
  });
  return hd * s;
}

double max_abs(const ComplexField& f) {
  const ExteriorGrid& g = *f.grid;
  double m = 0;
  for (long long c : g.active) m = std::max(m, std::abs(f.v[c]));
  return m;
}

std::array<CVec, 3> gradient(const ComplexField& f) {
  const ExteriorGrid& g = *f.grid;
  const CVec& u = f.v;
  std::array<CVec, 3> out;
  for (int a = 0; a < g.d; ++a) out[a].assign(g.ntot, cplx{0, 0});
  parallel_for(g.active.size(), [&](std::size_t k) {
    long long c = g.active[k];
    const ArmData* arm = g.arm_index[c] >= 0 ? &g.arms[g.arm_index[c]] : nullptr;
    for (int a = 0; a < g.d; ++a) {
      double tm = 1, tp = 1;
      cplx vm = u[c - g.stride[a]], vp = u[c + g.stride[a]];
      if (arm) {
        if (arm->wall_minus & (1u << a)) {
          tm = arm->theta_minus[a];
          vm = 0;
        }
        if (arm->wall_plus & (1u << a)) {
          tp = arm->theta_plus[a];
          vp = 0;
        }
      }
      out[a][c] = lagrange3_deriv(-tm * g.h, vm, 0.0, u[c], tp * g.h, vp);
    }
  });
  return out;
}

void symmetrize(ComplexField& f, const SymmetryClass& cls) {
  const ExteriorGrid& g = *f.grid;
  require(g.obstacle.reflection_symmetric(),
          "symmetrize: obstacle breaks reflection symmetry");
  for (int a = 0; a < g.d; ++a) {
    if (!cls.antisym[a]) continue;
    CVec next(g.ntot, cplx{0, 0});
    parallel_for(g.active.size(), [&](std::size_t k) {
      long long c = g.active[k];
      next[c] = 0.5 * (f.v[c] - f.v[g.reflect(c, a)]);
    });
    f.v.swap(next);
  }
}

bool is_antisymmetric(const ComplexField& f, const SymmetryClass& cls,
                      double rel_tol) {
  const ExteriorGrid& g = *f.grid;
  if (!g.obstacle.reflection_symmetric()) return false;
  double scale = max_abs(f);
  if (scale == 0) return true;
  for (int a = 0; a < g.d; ++a) {
    if (!cls.antisym[a]) continue;
    double worst = 0;
    for (long long c : g.active)
      worst = std::max(worst, std::abs(f.v[c] + f.v[g.reflect(c, a)]));
    if (worst > rel_tol * scale) return false;
  }
  return true;
}

namespace {

double obstacle_cutoff(const ExteriorGrid& g, const Vec3& x, double margin) {
  double r = norm3(x, g.d);
  return smoothstep_exp((r - g.obstacle.max_radius()) / margin);
}

template <class F>
ComplexField build_data(const GridPtr& grid, F&& value) {
  ComplexField f = zero_field(grid);
  const ExteriorGrid& g = *grid;
  parallel_for(g.active.size(), [&](std::size_t k) {
    long long c = g.active[k];
    f.v[c] = value(g.x(c));
  });
  return f;
}

}  // namespace

ComplexField gaussian_bump(const GridPtr& grid, double amp, const Vec3& center,
                           double width, const Vec3& wavevector,
                           double cutoff_margin) {
  require(width > 0, "gaussian_bump: width must be positive");
  const ExteriorGrid& g = *grid;
  return build_data(grid, [&](const Vec3& x) {
    double r2 = 0, kx = 0;
    for (int a = 0; a < g.d; ++a) {
      r2 += sq(x[a] - center[a]);
      kx += wavevector[a] * x[a];
    }
    double mag = amp * std::exp(-r2 / sq(width)) *
                 obstacle_cutoff(g, x, cutoff_margin);
    return mag * std::exp(cplx{0, kx});
  });
}

ComplexField ring_bump(const GridPtr& grid, double amp, double r0, double width,
                       int winding, double cutoff_margin) {
  require(width > 0 && r0 > 0, "ring_bump: r0 and width must be positive");
  const ExteriorGrid& g = *grid;
  return build_data(grid, [&](const Vec3& x) {
    double r = norm3(x, g.d);
    double mag = amp * std::exp(-sq((r - r0) / width)) *
                 obstacle_cutoff(g, x, cutoff_margin);
    double phi = winding ? winding * std::atan2(x[1], x[0]) : 0.0;
    return mag * std::exp(cplx{0, phi});
  });
}

ComplexField pseudoconformal_ansatz(const GridPtr& grid,
                                    const std::function<double(double)>& Q,
                                    double T, double t, const Vec3& x0,
                                    double psi_r0, double psi_r1) {
  require(T > t, "pseudoconformal_ansatz: requires t < T");
  require(psi_r1 > psi_r0 && psi_r0 > 0,
          "pseudoconformal_ansatz: requires 0 < psi_r0 < psi_r1");
  const ExteriorGrid& g = *grid;
  double s = T - t;
  return build_data(grid, [&](const Vec3& x) {
    double rho2 = 0;
    for (int a = 0; a < g.d; ++a) rho2 += sq(x[a] - x0[a]);
    double rho = std::sqrt(rho2);
    double psi = smoothstep_exp((norm3(x, g.d) - psi_r0) / (psi_r1 - psi_r0));
    double mag = Q(rho / s) * psi / s;
    return mag * std::exp(cplx{0, (4.0 - rho2) / (4.0 * s)});
  });
}

cplx interpolate(const ComplexField& f, const Vec3& p, bool* clean) {
  const ExteriorGrid& g = *f.grid;
  long long base = 0;
  double w[3] = {0, 0, 0};
  bool ok = true;
  for (int a = 0; a < g.d; ++a) {
    double s = (p[a] - g.lo[a]) / g.h;
    int i = static_cast<int>(std::floor(s));
    if (i < 0) {
      i = 0;
      ok = false;
    }
    if (i > g.nx[a] - 2) {
      i = g.nx[a] - 2;
      ok = false;
    }
    w[a] = s - i;
    base += i * g.stride[a];
  }
  cplx val{0, 0};
  int corners = 1 << g.d;
  for (int cn = 0; cn < corners; ++cn) {
    long long c = base;
    double wt = 1;
    for (int a = 0; a < g.d; ++a) {
      if (cn & (1 << a)) {
        c += g.stride[a];
        wt *= w[a];
      } else {
        wt *= 1 - w[a];
      }
    }
    if (!g.included(c)) ok = false;
    val += wt * f.v[c];
  }
  if (clean) *clean = ok;
  return val;
}

cplx interpolate_quad(const ComplexField& f, const Vec3& p, bool* clean) {
  const ExteriorGrid& g = *f.grid;
  long long center = 0;
  double w[3][3];
  bool ok = true;
  for (int a = 0; a < g.d; ++a) {
    double s = (p[a] - g.lo[a]) / g.h;
    int i = static_cast<int>(std::lround(s));
    if (i < 1) {
      i = 1;
      ok = false;
    }
    if (i > g.nx[a] - 2) {
      i = g.nx[a] - 2;
      ok = false;
    }
    double xi = s - i;
    w[a][0] = 0.5 * xi * (xi - 1);
    w[a][1] = 1 - xi * xi;
    w[a][2] = 0.5 * xi * (xi + 1);
    center += i * g.stride[a];
  }
  cplx val{0, 0};
  int nodes = 1;
  for (int a = 0; a < g.d; ++a) nodes *= 3;
  for (int nd = 0; nd < nodes; ++nd) {
    long long c = center;
    double wt = 1;
    int rem = nd;
    for (int a = 0; a < g.d; ++a) {
      int off = rem % 3;
      rem /= 3;
      c += (off - 1) * g.stride[a];
      wt *= w[a][off];
    }
    if (!g.included(c)) ok = false;
    val += wt * f.v[c];
  }
  if (clean) *clean = ok;
  return val;
}

}  // namespace exnls
