#include "exnls/geometry.h"

#include <algorithm>
#include <cmath>

namespace exnls {

namespace {

constexpr double kGeomEps = 1e-12;

// Antiderivative of sqrt(1-u^2), clamped against rounding.
double circ_int(double u) {
  u = std::clamp(u, -1.0, 1.0);
  return 0.5 * (u * std::sqrt(std::max(0.0, 1.0 - u * u)) + std::asin(u));
}

// Area of {(x,y) in rect : ((x-cx)/A)^2 + ((y-cy)/B)^2 <= 1}, exact up to
// rounding. Used for face apertures in 3D and cell overlap prefilters.
double rect_ellipse_overlap(double x0, double x1, double y0, double y1,
                            double cx, double cy, double A, double B) {
  if (A <= 0 || B <= 0 || x1 <= x0 || y1 <= y0) return 0;
  double u0 = std::max((x0 - cx) / A, -1.0);
  double u1 = std::min((x1 - cx) / A, 1.0);
  if (u0 >= u1) return 0;

  // Breakpoints: band half-height B*sqrt(1-u^2) crossing the rect's y-edges.
  std::vector<double> bp{u0, u1, 0.0};
  for (double target : {y1 - cy, cy - y0, y0 - cy, cy - y1}) {
    if (target <= 0 || target >= B) continue;
    double t = target / B;
    double ur = std::sqrt(std::max(0.0, 1.0 - t * t));
    bp.push_back(ur);
    bp.push_back(-ur);
  }
  std::sort(bp.begin(), bp.end());
  double area = 0;
  for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
    double a = std::max(bp[s], u0), b = std::min(bp[s + 1], u1);
    if (b - a < kGeomEps * 0.001) continue;
    double m = 0.5 * (a + b);
    double gm = B * std::sqrt(std::max(0.0, 1.0 - m * m));
    bool top_is_g = cy + gm <= y1;
    bool bot_is_g = cy - gm >= y0;
    double top = top_is_g ? cy + gm : y1;
    double bot = bot_is_g ? cy - gm : y0;
    if (top - bot <= 0) continue;
    double top_c = top_is_g ? cy : y1;
    double bot_c = bot_is_g ? cy : y0;
    double ng = (top_is_g ? 1 : 0) + (bot_is_g ? 1 : 0);
    area += (top_c - bot_c) * (b - a) + ng * B * (circ_int(b) - circ_int(a));
  }
  return A * area;
}

}  // namespace

double ObstacleSpec::max_radius() const {
  if (kind == ObstacleKind::Ball) return radius + norm3(center, d);
  double m = 0;
  for (int k = 0; k < d; ++k) m = std::max(m, semi[k]);
  return m;
}

double ObstacleSpec::min_radius() const {
  if (kind == ObstacleKind::Ball) return radius - norm3(center, d);
  double m = semi[0];
  for (int k = 1; k < d; ++k) m = std::min(m, semi[k]);
  return m;
}

bool ObstacleSpec::inside(const Vec3& x) const {
  if (kind == ObstacleKind::Ball) {
    double s = 0;
    for (int k = 0; k < d; ++k) s += sq(x[k] - center[k]);
    return s < sq(radius);
  }
  double s = 0;
  for (int k = 0; k < d; ++k) s += sq(x[k] / semi[k]);
  return s < 1.0;
}

double ObstacleSpec::segment_crossing(const Vec3& a, const Vec3& b) const {
  // Scale to the unit sphere; quadratic in the segment parameter.
  double qa = 0, qb = 0, qc = -1;
  for (int k = 0; k < d; ++k) {
    double ak = kind == ObstacleKind::Ball ? radius : semi[k];
    double ck = kind == ObstacleKind::Ball ? center[k] : 0.0;
    double p = (a[k] - ck) / ak;
    double v = (b[k] - a[k]) / ak;
    qa += v * v;
    qb += 2 * p * v;
    qc += p * p;
  }
  if (qa < kGeomEps) return -1;
  double disc = qb * qb - 4 * qa * qc;
  if (disc <= 0) return -1;
  double sd = std::sqrt(disc);
  double t1 = (-qb - sd) / (2 * qa);
  double t2 = (-qb + sd) / (2 * qa);
  for (double t : {t1, t2})
    if (t > kGeomEps && t <= 1.0) return t;
  return -1;
}

Vec3 ObstacleSpec::nearest_boundary_point(const Vec3& x) const {
  Vec3 y{};
  if (kind == ObstacleKind::Ball) {
    Vec3 dir{};
    double n = 0;
    for (int k = 0; k < d; ++k) {
      dir[k] = x[k] - center[k];
      n += dir[k] * dir[k];
    }
    n = std::sqrt(n);
    if (n < kGeomEps) {
      dir[0] = 1;
      n = 1;
    }
    for (int k = 0; k < d; ++k) y[k] = center[k] + radius * dir[k] / n;
    return y;
  }
  // Nearest point on the ellipsoid: y_k = a_k^2 x_k / (a_k^2 + t) with t the
  // root of sum (a_k x_k / (a_k^2 + t))^2 = 1. The function is decreasing in
  // t on (-min a_k^2, inf), so bisection is safe.
  double amin2 = sq(semi[0]);
  for (int k = 1; k < d; ++k) amin2 = std::min(amin2, sq(semi[k]));
  auto eval = [&](double t) {
    double s = 0;
    for (int k = 0; k < d; ++k) s += sq(semi[k] * x[k] / (sq(semi[k]) + t));
    return s - 1.0;
  };
  double tlo, thi;
  if (eval(0) > 0) {  // outside
    tlo = 0;
    thi = 1;
    while (eval(thi) > 0) thi *= 2;
  } else {  // inside
    thi = 0;
    tlo = -amin2 * 0.5;
    while (eval(tlo) < 0 && tlo > -amin2 * (1 - 1e-14)) {
      tlo = -amin2 + (tlo + amin2) * 0.5;
    }
    if (eval(tlo) < 0) {
      // Degenerate (x near the center plane). Snap to the nearest pole of
      // the shortest axis; only reachable far from the cut band.
      int kmin = 0;
      for (int k = 1; k < d; ++k)
        if (sq(semi[k]) < sq(semi[kmin])) kmin = k;
      y = x;
      y[kmin] = semi[kmin] * (x[kmin] >= 0 ? 1 : -1);
      for (int k = 0; k < d; ++k)
        if (k != kmin) y[k] = 0;
      return y;
    }
  }
  for (int it = 0; it < 200; ++it) {
    double tm = 0.5 * (tlo + thi);
    (eval(tm) > 0 ? tlo : thi) = tm;
  }
  double t = 0.5 * (tlo + thi);
  for (int k = 0; k < d; ++k) y[k] = sq(semi[k]) * x[k] / (sq(semi[k]) + t);
  return y;
}

Vec3 ObstacleSpec::boundary_normal(const Vec3& x) const {
  // Gradient of the level function, flipped to point into the obstacle.
  Vec3 n{};
  if (kind == ObstacleKind::Ball) {
    for (int k = 0; k < d; ++k) n[k] = center[k] - x[k];
  } else {
    for (int k = 0; k < d; ++k) n[k] = -x[k] / sq(semi[k]);
  }
  double m = norm3(n, d);
  if (m < kGeomEps) {
    n = Vec3{};
    n[0] = 1;
    return n;
  }
  for (int k = 0; k < d; ++k) n[k] /= m;
  return n;
}

bool ObstacleSpec::reflection_symmetric() const {
  if (kind == ObstacleKind::Ellipsoid) return true;
  for (int k = 0; k < d; ++k)
    if (center[k] != 0) return false;
  return true;
}

ObstacleSpec make_obstacle(int d, const std::string& kind,
                           const std::vector<double>& params,
                           const Vec3& center) {
  require(d == 2 || d == 3, "make_obstacle: d must be 2 or 3");
  ObstacleSpec ob;
  ob.d = d;
  if (kind == "ball") {
    require(params.size() == 1, "make_obstacle: ball takes {radius}");
    require(params[0] > 0, "make_obstacle: radius must be positive");
    ob.kind = ObstacleKind::Ball;
    ob.radius = params[0];
    ob.center = center;
    require(norm3(center, d) < ob.radius,
            "make_obstacle: origin must lie inside the obstacle");
  } else if (kind == "ellipsoid") {
    require(static_cast<int>(params.size()) == d,
            "make_obstacle: ellipsoid takes d semi-axes");
    require(norm3(center, d) == 0,
            "make_obstacle: ellipsoid must be centered at the origin");
    ob.kind = ObstacleKind::Ellipsoid;
    for (int k = 0; k < d; ++k) {
      require(params[k] > 0, "make_obstacle: semi-axes must be positive");
      ob.semi[k] = params[k];
    }
  } else {
    throw InputError("make_obstacle: kind must be 'ball' or 'ellipsoid'");
  }
  return ob;
}

double face_aperture(const ObstacleSpec& obstacle, int face_axis,
                     double face_coord, const Vec3& lo, const Vec3& hi,
                     int d) {
  double ca, Aa;
  if (obstacle.kind == ObstacleKind::Ball) {
    ca = obstacle.center[face_axis];
    Aa = obstacle.radius;
  } else {
    ca = 0;
    Aa = obstacle.semi[face_axis];
  }
  double s = 1.0 - sq((face_coord - ca) / Aa);
  if (s <= 0) return 1.0;  // the obstacle does not reach this plane

  if (d == 2) {
    int b = face_axis == 0 ? 1 : 0;
    double cb = obstacle.kind == ObstacleKind::Ball ? obstacle.center[b] : 0;
    double Ab = obstacle.kind == ObstacleKind::Ball ? obstacle.radius
                                                    : obstacle.semi[b];
    double g = Ab * std::sqrt(s);
    double covered = std::min(hi[b], cb + g) - std::max(lo[b], cb - g);
    double len = hi[b] - lo[b];
    return 1.0 - std::clamp(covered, 0.0, len) / len;
  }

  int b = face_axis == 0 ? 1 : 0;
  int c = face_axis == 2 ? 1 : 2;
  double cb = obstacle.kind == ObstacleKind::Ball ? obstacle.center[b] : 0;
  double cc = obstacle.kind == ObstacleKind::Ball ? obstacle.center[c] : 0;
  double Ab = obstacle.kind == ObstacleKind::Ball ? obstacle.radius
                                                  : obstacle.semi[b];
  double Ac = obstacle.kind == ObstacleKind::Ball ? obstacle.radius
                                                  : obstacle.semi[c];
  double covered = rect_ellipse_overlap(lo[b], hi[b], lo[c], hi[c], cb, cc,
                                        Ab * std::sqrt(s), Ac * std::sqrt(s));
  double area = (hi[b] - lo[b]) * (hi[c] - lo[c]);
  return 1.0 - std::clamp(covered / area, 0.0, 1.0);
}

long long ExteriorGrid::cell_at(const Vec3& p) const {
  long long cell = 0;
  for (int a = 0; a < d; ++a) {
    int i = static_cast<int>(std::lround((p[a] - lo[a]) / h));
    i = std::clamp(i, 0, nx[a] - 1);
    cell += i * stride[a];
  }
  return cell;
}

GridPtr build_grid(const ObstacleSpec& obstacle, double R_out, double h) {
  require(obstacle.d == 2 || obstacle.d == 3, "build_grid: d must be 2 or 3");
  double M = obstacle.max_radius(), m = obstacle.min_radius();
  require(m > 0, "build_grid: obstacle min radius must be positive");
  require(R_out > 2 * M, "build_grid: requires R_out > 2 * max_radius");
  require(h < m / 8, "build_grid: requires h < min_radius / 8");

  auto grid = std::make_shared<ExteriorGrid>();
  ExteriorGrid& g = *grid;
  g.d = obstacle.d;
  g.h = h;
  g.R_out = R_out;
  g.obstacle = obstacle;

  int nhalf = static_cast<int>(std::ceil(R_out / h)) + 2;
  int N = 2 * nhalf;
  long long ntot = 1;
  for (int a = 0; a < g.d; ++a) {
    g.nx[a] = N;
    g.stride[a] = ntot;
    ntot *= N;
    g.lo[a] = -(nhalf - 0.5) * h;
  }
  g.ntot = ntot;
  g.cls.assign(ntot, NodeClass::OUTER);
  g.arm_index.assign(ntot, -1);
  g.diag.assign(ntot, 0.0);

  // Pass 1: center-based classification.
  for (long long cell = 0; cell < ntot; ++cell) {
    Vec3 xc = g.x(cell);
    double r = norm3(xc, g.d);
    if (r >= R_out)
      g.cls[cell] = NodeClass::OUTER;
    else if (obstacle.inside(xc))
      g.cls[cell] = NodeClass::OBSTACLE;
    else
      g.cls[cell] = NodeClass::FLUID;
  }

  // Pass 2: cut geometry. A cell is examined when the boundary can plausibly
  // pass through it; the aperture closure then decides whether it owns a
  // boundary face.
  double hd1 = std::pow(h, g.d - 1);
  for (long long cell = 0; cell < ntot; ++cell) {
    if (g.cls[cell] == NodeClass::OUTER) continue;
    Vec3 xc = g.x(cell);
    Vec3 xb = obstacle.nearest_boundary_point(xc);
    double dist = 0;
    for (int a = 0; a < g.d; ++a) dist += sq(xb[a] - xc[a]);
    // The boundary can reach the cell only if the nearest boundary point
    // lies within the cell circumradius.
    if (dist > sq(0.5 * h) * g.d * (1 + 1e-9)) continue;

    Vec3 clo = xc, chi = xc;
    for (int a = 0; a < g.d; ++a) {
      clo[a] -= 0.5 * h;
      chi[a] += 0.5 * h;
    }
    Vec3 W{};
    bool any_cut = false;
    for (int a = 0; a < g.d; ++a) {
      double am = face_aperture(obstacle, a, clo[a], clo, chi, g.d);
      double ap = face_aperture(obstacle, a, chi[a], clo, chi, g.d);
      if (am < 1 || ap < 1) any_cut = true;
      W[a] = -(ap - am) * hd1;
    }
    double wn = norm3(W, g.d);
    if (any_cut && wn > kGeomEps * hd1) {
      BoundaryFace f;
      f.cell = static_cast<int>(cell);
      f.area = wn;
      for (int a = 0; a < g.d; ++a) f.normal[a] = W[a] / wn;
      f.x_b = xb;
      g.boundary_faces.push_back(f);
    }
  }

  // Pass 3: wall arms and the conductance diagonal for included cells.
  for (long long cell = 0; cell < ntot; ++cell) {
    if (!g.included(cell)) continue;
    Vec3 xc = g.x(cell);
    ArmData arm;
    bool have_arm = false;
    bool obstacle_arm = false;
    double diag = 0;
    for (int a = 0; a < g.d; ++a) {
      for (int side = 0; side < 2; ++side) {
        long long nb = cell + (side ? g.stride[a] : -g.stride[a]);
        Vec3 xn = xc;
        xn[a] += side ? h : -h;
        double theta = 1.0;
        bool wall = false;
        if (g.cls[nb] == NodeClass::OUTER) {
          wall = true;  // far-field Dirichlet at the neighbor center
        } else {
          double t = obstacle.segment_crossing(xc, xn);
          if (t > 0) {
            wall = true;
            theta = t;
            obstacle_arm = true;
            if (g.included(nb) && cell < nb)
              g.blocked_edges.push_back(
                  {static_cast<int>(cell), static_cast<int>(nb)});
          } else if (g.cls[nb] == NodeClass::OBSTACLE) {
            wall = true;  // defensive; convexity should give a crossing
            theta = 0.5;
            obstacle_arm = true;
          }
        }
        if (wall) {
          have_arm = true;
          if (side) {
            arm.theta_plus[a] = theta;
            arm.wall_plus |= (1u << a);
          } else {
            arm.theta_minus[a] = theta;
            arm.wall_minus |= (1u << a);
          }
          diag += 1.0 / theta;
        } else {
          diag += 1.0;
        }
      }
    }
    g.diag[cell] = diag;
    if (have_arm) {
      g.arm_index[cell] = static_cast<int>(g.arms.size());
      g.arms.push_back(arm);
    }
    if (obstacle_arm) g.cls[cell] = NodeClass::BOUNDARY_ADJ;
  }
  for (const BoundaryFace& f : g.boundary_faces)
    if (g.cls[f.cell] == NodeClass::FLUID) g.cls[f.cell] = NodeClass::BOUNDARY_ADJ;

  for (long long cell = 0; cell < ntot; ++cell)
    if (g.included(cell)) g.active.push_back(static_cast<int>(cell));

  // Plane faces x_j = 0 for the antisymmetric flux integrals.
  for (int j = 0; j < g.d; ++j) {
    for (int plus : g.active) {
      auto c = g.decompose(plus);
      if (c[j] != nhalf) continue;  // first layer on the positive side
      Vec3 xc = g.x(plus);
      Vec3 flo = xc, fhi = xc;
      for (int a = 0; a < g.d; ++a) {
        flo[a] -= 0.5 * h;
        fhi[a] += 0.5 * h;
      }
      double ap = face_aperture(obstacle, j, 0.0, flo, fhi, g.d);
      if (ap <= 0) continue;
      g.plane_faces[j].push_back({plus, ap * hd1});
    }
  }

  return grid;
}

double surface_integral(const ExteriorGrid& grid,
                        const std::vector<double>& face_values) {
  require(face_values.size() == grid.boundary_faces.size(),
          "surface_integral: one value per boundary face required");
  double s = 0;
  for (std::size_t i = 0; i < face_values.size(); ++i)
    s += face_values[i] * grid.boundary_faces[i].area;
  return s;
}

}  // namespace exnls
