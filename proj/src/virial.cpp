#include "exnls/virial.h"

#include <cmath>

#include "exnls/util.h"

namespace exnls {
namespace detail {

// |du/dn|^2 on one obstacle face. u vanishes on the wall and the gradient
// there is parallel to the normal, so the derivative along any line gives
// the normal derivative after dividing by the direction cosine. The line
// used is the lattice line through the owning cell along the axis most
// aligned with the normal: its samples are raw cell values, avoiding
// interpolation error (an O(h^2) sample error divided by h would make the
// whole integral first order). The fit passes through the wall crossing and
// the second and third cells outward; the cut cell itself is skipped since
// its value carries the largest local solution error. If the lattice line
// is unusable, interpolated samples along the normal are tried; as a last
// resort the owning cell's value over its distance gives a first-order
// estimate.
double face_normal_deriv_sq(const ComplexField& f, const BoundaryFace& face,
                            bool* fallback) {
  const auto& g = *f.grid;
  int ax = 0;
  for (int a = 1; a < g.d; ++a)
    if (std::abs(face.normal[a]) > std::abs(face.normal[ax])) ax = a;
  const double dir = face.normal[ax] >= 0 ? 1.0 : -1.0;  // toward the wall
  const int off = dir > 0 ? -1 : 1;  // lattice step away from the wall
  // The cell owning the face may have its center on either side of the wall;
  // c1 is the nearest lattice cell on the fluid side.
  long long c1 = face.cell;
  auto ix = g.decompose(c1);
  if (!g.included(c1) && ix[ax] + off >= 0 && ix[ax] + off < g.nx[ax]) {
    c1 += off * g.stride[ax];
    ix[ax] += off;
  }
  if (ix[ax] + 2 * off >= 0 && ix[ax] + 2 * off < g.nx[ax] &&
      g.included(c1)) {
    long long n1 = c1 + off * g.stride[ax];
    long long n2 = n1 + off * g.stride[ax];
    if (g.included(n1) && g.included(n2)) {
      Vec3 xc = g.x(c1);
      Vec3 q = xc;
      q[ax] += 2 * g.h * dir;
      double t = g.obstacle.segment_crossing(xc, q);
      if (t > 0) {
        double s1 = (1.0 + 2 * t) * g.h;  // wall crossing to n1
        double s2 = s1 + g.h;
        cplx a = (f.v[n1] * (s2 * s2) - f.v[n2] * (s1 * s1)) /
                 (s1 * s2 * (s2 - s1));
        // The fit measures the derivative along the axis at the crossing
        // point; the direction cosine must be taken there too, not at the
        // face centroid an O(h) arc away.
        Vec3 xw = xc;
        xw[ax] += 2 * g.h * dir * t;
        double cosw = g.obstacle.boundary_normal(xw)[ax];
        if (sq(cosw) > 0.25) return std::norm(a) / sq(cosw);
      }
    }
  }
  Vec3 inward{-face.normal[0], -face.normal[1], -face.normal[2]};
  double s = g.h;
  for (int attempt = 0; attempt < 3; ++attempt, s += g.h / 2) {
    Vec3 p1{}, p2{};
    for (int a = 0; a < 3; ++a) {
      p1[a] = face.x_b[a] + s * inward[a];
      p2[a] = face.x_b[a] + 2 * s * inward[a];
    }
    bool ok1 = false, ok2 = false;
    cplx u1 = interpolate(f, p1, &ok1);
    cplx u2 = interpolate(f, p2, &ok2);
    if (ok1 && ok2) return std::norm((4.0 * u1 - u2) / (2 * s));
  }
  *fallback = true;
  Vec3 xc = g.x(face.cell);
  double dist = 0;
  for (int a = 0; a < g.d; ++a) dist += sq(xc[a] - face.x_b[a]);
  dist = std::sqrt(std::max(dist, 1e-3 * g.h));
  return std::norm(f.v[face.cell]) / sq(dist);
}

}  // namespace detail

namespace {

void require_symmetric_sector(const ComplexField& f, const char* what) {
  const auto& g = *f.grid;
  require(g.obstacle.reflection_symmetric(),
          std::string(what) + ": obstacle is not reflection-invariant");
  if (!is_antisymmetric(f, SymmetryClass::all_axes(g.d), 1e-9))
    throw InputError(std::string(what) +
                     ": field must be odd under every axis reflection");
}

double nonlinear_coeff(int d, double p) {
  return d / 2.0 - (d + 2) / (p + 1);
}

}  // namespace

VirialAssembly assemble_virial(const ComplexField& f, double p) {
  const auto& g = *f.grid;
  VirialAssembly a;
  a.d = g.d;
  a.p = p;
  a.mass = mass(f);
  a.gradsq = grad_sq(f);
  a.lp1 = lp1_norm(f, p);
  a.energy = 0.5 * a.gradsq - a.lp1 / (p + 1);

  auto grad = gradient(f);
  const size_t n = g.active.size();
  const double hd = std::pow(g.h, g.d);
  auto cell_sum = [&](auto&& per_cell) {
    return hd * det_sum(n, [&](size_t k) { return per_cell(g.active[k]); });
  };

  a.ups1 = cell_sum([&](int c) {
    return norm3(g.x(c), g.d) * std::norm(f.v[c]);
  });
  a.ups2 = cell_sum([&](int c) {
    Vec3 x = g.x(c);
    return dot3(x, x, g.d) * std::norm(f.v[c]);
  });
  for (int ax = 0; ax < g.d; ++ax) {
    a.gamma_q[ax] = cell_sum([&](int c) {
      return std::abs(g.x(c)[ax]) * std::norm(f.v[c]);
    });
    a.momentum[ax] = 2 * cell_sum([&](int c) {
      return std::imag(std::conj(f.v[c]) * grad[ax][c]);
    });
    a.dt_gamma[ax] = 2 * cell_sum([&](int c) {
      double sgn = g.x(c)[ax] >= 0 ? 1.0 : -1.0;
      return sgn * std::imag(std::conj(f.v[c]) * grad[ax][c]);
    });
  }
  a.dt_ups2 = 4 * cell_sum([&](int c) {
    Vec3 x = g.x(c);
    cplx xg(0);
    for (int ax = 0; ax < g.d; ++ax) xg += x[ax] * grad[ax][c];
    return std::imag(std::conj(f.v[c]) * xg);
  });
  a.dt_ups1 = 2 * cell_sum([&](int c) {
    Vec3 x = g.x(c);
    double r = norm3(x, g.d);
    cplx xg(0);
    for (int ax = 0; ax < g.d; ++ax) xg += x[ax] / r * grad[ax][c];
    return std::imag(std::conj(f.v[c]) * xg);
  });

  double ph = (p + 1) / 2;
  a.inv_r_lp1 = cell_sum([&](int c) {
    double n2 = std::norm(f.v[c]);
    double w = n2 > 0 ? std::pow(n2, ph) : 0.0;
    return w / norm3(g.x(c), g.d);
  });
  a.inv_r3_mass = cell_sum([&](int c) {
    double r = norm3(g.x(c), g.d);
    return std::norm(f.v[c]) / (r * r * r);
  });
  a.inv_r_ang = cell_sum([&](int c) {
    Vec3 x = g.x(c);
    double r = norm3(x, g.d);
    double g2 = 0;
    cplx radial(0);
    for (int ax = 0; ax < g.d; ++ax) {
      g2 += std::norm(grad[ax][c]);
      radial += x[ax] / r * grad[ax][c];
    }
    return (g2 - std::norm(radial)) / r;
  });

  for (const auto& face : g.boundary_faces) {
    bool fb = false;
    double w = detail::face_normal_deriv_sq(f, face, &fb) * face.area;
    if (fb) ++a.fallback_faces;
    double xn = dot3(face.x_b, face.normal, g.d);
    double r = norm3(face.x_b, g.d);
    a.bnd_xn += w * xn;
    a.bnd_xn_over_r += w * xn / r;
    for (int ax = 0; ax < g.d; ++ax)
      a.bnd_abs_nj[ax] += w * std::abs(face.normal[ax]);
    a.bnd_area += w;
  }

  for (int ax = 0; ax < g.d; ++ax) {
    for (const auto& pf : g.plane_faces[ax]) {
      cplx up = f.v[pf.cell];
      long long lower = pf.cell - g.stride[ax];
      cplx um = g.included(lower) ? f.v[lower] : cplx(0);
      a.plane_grad[ax] += std::norm((up - um) / g.h) * pf.weight;
    }
  }
  return a;
}

namespace detail {

double d2t_upsilon2_rhs_raw(const VirialAssembly& a) {
  return 16 * a.energy - 8 * nonlinear_coeff(a.d, a.p) * a.lp1 - 4 * a.bnd_xn;
}

double d2t_upsilon1_rhs_raw(const VirialAssembly& a) {
  double d = a.d;
  return (d - 1) * (d - 3) * a.inv_r3_mass + 4 * a.inv_r_ang -
         2 * (d - 1) * (a.p - 1) / (a.p + 1) * a.inv_r_lp1 -
         2 * a.bnd_xn_over_r;
}

// The orthant-boundary integral of the |x_j| moment identity carries the
// coefficient 2^{d+1}; rewriting over full-grid sums of reflection-even
// integrands divides by 2^d on the obstacle part and 2^{d-1} on the x_j = 0
// plane part, leaving 2 and 4 in every dimension.
double d2t_gamma_rhs_raw(const VirialAssembly& a, int axis) {
  return 2 * a.bnd_abs_nj[axis] + 4 * a.plane_grad[axis];
}

double d2t_variance_sym_rhs_raw(const VirialAssembly& a, double C) {
  // d2(ups2)/dt2 minus C times each d2(gamma_j)/dt2: the -4 Bnd[x.n] term of
  // the ups2 identity stays, and the wall part of the gamma terms combines
  // with it into the sign-controlled bracket once C >= recommended_C.
  double s = d2t_upsilon2_rhs_raw(a);
  for (int ax = 0; ax < a.d; ++ax) s -= C * d2t_gamma_rhs_raw(a, ax);
  return s;
}

}  // namespace detail

double upsilon1(const ComplexField& f) {
  const auto& g = *f.grid;
  return std::pow(g.h, g.d) * det_sum(g.active.size(), [&](size_t k) {
    int c = g.active[k];
    return norm3(g.x(c), g.d) * std::norm(f.v[c]);
  });
}

double upsilon2(const ComplexField& f) {
  const auto& g = *f.grid;
  return std::pow(g.h, g.d) * det_sum(g.active.size(), [&](size_t k) {
    int c = g.active[k];
    Vec3 x = g.x(c);
    return dot3(x, x, g.d) * std::norm(f.v[c]);
  });
}

double dt_upsilon1(const ComplexField& f) {
  return assemble_virial(f, 3).dt_ups1;
}

double dt_upsilon2(const ComplexField& f) {
  return assemble_virial(f, 3).dt_ups2;
}

double d2t_upsilon2_rhs(const ComplexField& f, double p) {
  return detail::d2t_upsilon2_rhs_raw(assemble_virial(f, p));
}

double d2t_upsilon1_rhs(const ComplexField& f, double p) {
  return detail::d2t_upsilon1_rhs_raw(assemble_virial(f, p));
}

double variance_weight_constant(double rad) {
  return rad <= std::sqrt(10.0) ? 10.0 : rad * rad + 1;
}

static void require_centered_ball(const GridPtr& grid, const char* what) {
  const auto& ob = grid->obstacle;
  bool centered = ob.kind == ObstacleKind::Ball &&
                  norm3(ob.center, grid->d) == 0;
  require(centered, std::string(what) + ": obstacle must be a centered ball");
}

double variance_ball(const ComplexField& f, double R) {
  require_centered_ball(f.grid, "variance_ball");
  require(std::abs(R - f.grid->obstacle.radius) < 1e-12,
          "variance_ball: R must match the obstacle radius");
  auto a = assemble_virial(f, 3);
  return a.ups2 - 2 * R * a.ups1 + variance_weight_constant(R) * a.mass;
}

double d2t_variance_ball_rhs(const ComplexField& f, double p, double R) {
  require_centered_ball(f.grid, "d2t_variance_ball_rhs");
  require(std::abs(R - f.grid->obstacle.radius) < 1e-12,
          "d2t_variance_ball_rhs: R must match the obstacle radius");
  auto a = assemble_virial(f, p);
  return detail::d2t_upsilon2_rhs_raw(a) - 2 * R * detail::d2t_upsilon1_rhs_raw(a);
}

double variance_convex(const ComplexField& f) {
  double M = f.grid->obstacle.max_radius();
  auto a = assemble_virial(f, 3);
  return a.ups2 - 2 * M * a.ups1 + variance_weight_constant(M) * a.mass;
}

double d2t_variance_convex_rhs(const ComplexField& f, double p) {
  double M = f.grid->obstacle.max_radius();
  auto a = assemble_virial(f, p);
  return detail::d2t_upsilon2_rhs_raw(a) - 2 * M * detail::d2t_upsilon1_rhs_raw(a);
}

double variance_boundary_bracket(const ComplexField& f, double rad) {
  auto a = assemble_virial(f, 3);
  return -4 * a.bnd_xn + 4 * rad * a.bnd_xn_over_r;
}

double gamma_moment(const ComplexField& f, int axis) {
  const auto& g = *f.grid;
  require(axis >= 0 && axis < g.d, "gamma_moment: axis out of range");
  return std::pow(g.h, g.d) * det_sum(g.active.size(), [&](size_t k) {
    int c = g.active[k];
    return std::abs(g.x(c)[axis]) * std::norm(f.v[c]);
  });
}

double dt_gamma(const ComplexField& f, int axis) {
  require(axis >= 0 && axis < f.grid->d, "dt_gamma: axis out of range");
  require_symmetric_sector(f, "dt_gamma");
  return assemble_virial(f, 3).dt_gamma[axis];
}

double d2t_gamma_rhs(const ComplexField& f, int axis) {
  require(axis >= 0 && axis < f.grid->d, "d2t_gamma_rhs: axis out of range");
  require_symmetric_sector(f, "d2t_gamma_rhs");
  return detail::d2t_gamma_rhs_raw(assemble_virial(f, 3), axis);
}

double variance_sym(const ComplexField& f, double C) {
  require(C > 0, "variance_sym: C must be positive");
  auto a = assemble_virial(f, 3);
  double s = a.ups2 + C * C * a.mass;
  for (int ax = 0; ax < a.d; ++ax) s -= C * a.gamma_q[ax];
  return s;
}

double d2t_variance_sym_rhs(const ComplexField& f, double p, double C) {
  require(C > 0, "d2t_variance_sym_rhs: C must be positive");
  require_symmetric_sector(f, "d2t_variance_sym_rhs");
  return detail::d2t_variance_sym_rhs_raw(assemble_virial(f, p), C);
}

double recommended_C(const GridPtr& grid) {
  double best = 0;
  for (const auto& face : grid->boundary_faces) {
    double s = 0;
    for (int ax = 0; ax < grid->d; ++ax) s += std::abs(face.normal[ax]);
    if (s < 1e-12) continue;
    best = std::max(best, std::abs(dot3(face.x_b, face.normal, grid->d)) / s);
  }
  require(best > 0, "recommended_C: no usable obstacle faces");
  return 2 * best;
}

PohozaevResiduals pohozaev_residuals(const ComplexField& f) {
  const auto& g = *f.grid;
  auto a = assemble_virial(f, 3);
  auto grad = gradient(f);

  CVec lap(g.ntot, cplx(0));
  apply_lc(g, f.v, lap);
  double inv_h2 = 1.0 / (g.h * g.h);
  parallel_for(g.active.size(), [&](size_t k) {
    int c = g.active[k];
    lap[c] *= -inv_h2;
  });

  const double hd = std::pow(g.h, g.d);
  double lhs1 = hd * det_sum(g.active.size(), [&](size_t k) {
    int c = g.active[k];
    Vec3 x = g.x(c);
    cplx mult = 0.5 * double(g.d) * f.v[c];
    for (int ax = 0; ax < g.d; ++ax) mult += x[ax] * grad[ax][c];
    return std::real(std::conj(lap[c]) * mult);
  });
  double rhs1 = -a.gradsq + 0.5 * a.bnd_xn;

  double lhs2 = hd * det_sum(g.active.size(), [&](size_t k) {
    int c = g.active[k];
    Vec3 x = g.x(c);
    double r = norm3(x, g.d);
    cplx mult = 0.5 * (g.d - 1) / r * f.v[c];
    for (int ax = 0; ax < g.d; ++ax) mult += x[ax] / r * grad[ax][c];
    return std::real(std::conj(lap[c]) * mult);
  });
  double rhs2 = -0.25 * (g.d - 1) * (g.d - 3) * a.inv_r3_mass - a.inv_r_ang +
                0.5 * a.bnd_xn_over_r;

  PohozaevResiduals out;
  out.lhs1 = lhs1;
  out.rhs1 = rhs1;
  out.lhs2 = lhs2;
  out.rhs2 = rhs2;
  out.r1 = std::abs(lhs1 - rhs1);
  out.r2 = std::abs(lhs2 - rhs2);
  out.decay_warning = annulus_mass(f) > 1e-12 * a.mass;
  return out;
}

}  // namespace exnls
