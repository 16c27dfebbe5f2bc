#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "exnls/util.h"

// Exterior domain Omega = R^d \ Theta truncated at |x| = R_out, discretized
// on a uniform cell-centered grid that is symmetric under all coordinate
// reflections. Theta is a convex obstacle (ball or axis-aligned ellipsoid)
// containing the origin.

namespace exnls {

enum class ObstacleKind { Ball, Ellipsoid };

struct ObstacleSpec {
  int d = 2;
  ObstacleKind kind = ObstacleKind::Ball;
  double radius = 1.0;   // ball only
  Vec3 center{};         // ball only; ellipsoid is centered at the origin
  Vec3 semi{};           // ellipsoid semi-axes

  // Extremes of |x| over the obstacle boundary.
  double max_radius() const;  // M
  double min_radius() const;  // m

  bool inside(const Vec3& x) const;  // strictly inside Theta
  // First crossing of segment a + t(b-a), t in (0,1], with the boundary;
  // returns -1 if the segment does not reach the obstacle.
  double segment_crossing(const Vec3& a, const Vec3& b) const;
  Vec3 nearest_boundary_point(const Vec3& x) const;
  // Unit normal at a boundary point, pointing out of the fluid (same
  // convention as BoundaryFace::normal).
  Vec3 boundary_normal(const Vec3& x) const;
  // True when the obstacle is invariant under reflection of each axis.
  bool reflection_symmetric() const;
};

// kind: "ball" (params = {radius}) or "ellipsoid" (params = semi-axes).
ObstacleSpec make_obstacle(int d, const std::string& kind,
                           const std::vector<double>& params,
                           const Vec3& center = {});

enum class NodeClass : std::uint8_t { FLUID, OBSTACLE, BOUNDARY_ADJ, OUTER };

// One fragment of the obstacle boundary inside one grid cell. The normal
// points out of the fluid, i.e. into the obstacle, so x_b . n <= 0 when the
// origin lies inside Theta.
struct BoundaryFace {
  int cell = -1;
  Vec3 x_b{};
  Vec3 normal{};
  double area = 0;
};

// Dirichlet wall arms of one cell: per axis, the fraction of h from the cell
// center to the boundary crossing (1 = regular edge to a live neighbor).
struct ArmData {
  std::array<double, 3> theta_minus{{1, 1, 1}};
  std::array<double, 3> theta_plus{{1, 1, 1}};
  // Axes along which the neighbor is excluded (wall), encoded as bit masks.
  std::uint8_t wall_minus = 0;
  std::uint8_t wall_plus = 0;
};

// Face of the lattice lying on the coordinate plane x_j = 0, used by the
// antisymmetric flux integrals. `cell` is the cell on the positive side.
struct PlaneFace {
  int cell = -1;
  double weight = 0;  // fluid aperture * h^{d-1}
};

struct ExteriorGrid {
  int d = 2;
  double h = 0;
  double R_out = 0;
  ObstacleSpec obstacle;

  std::array<int, 3> nx{{1, 1, 1}};
  std::array<long long, 3> stride{{0, 0, 0}};
  long long ntot = 0;
  Vec3 lo{};  // center of cell (0,0,0)

  std::vector<NodeClass> cls;
  std::vector<int> active;     // included cells (FLUID or BOUNDARY_ADJ)
  std::vector<int> arm_index;  // -1 or index into arms
  std::vector<ArmData> arms;
  std::vector<double> diag;    // conductance diagonal, 0 for excluded cells
  std::vector<BoundaryFace> boundary_faces;
  std::array<std::vector<PlaneFace>, 3> plane_faces;
  // Lattice edges between two included cells whose center segment crosses
  // the obstacle (thin cuts); such edges carry no coupling.
  std::vector<std::array<int, 2>> blocked_edges;

  long long index(int i, int j, int k) const {
    return i * stride[0] + j * stride[1] + k * stride[2];
  }
  std::array<int, 3> decompose(long long cell) const {
    std::array<int, 3> c{{0, 0, 0}};
    for (int a = d - 1; a >= 0; --a) {
      c[a] = static_cast<int>(cell / stride[a]);
      cell -= c[a] * stride[a];
    }
    return c;
  }
  Vec3 x(long long cell) const {
    auto c = decompose(cell);
    Vec3 p{};
    for (int a = 0; a < d; ++a) p[a] = lo[a] + c[a] * h;
    return p;
  }
  bool included(long long cell) const {
    return cls[cell] == NodeClass::FLUID || cls[cell] == NodeClass::BOUNDARY_ADJ;
  }
  long long reflect(long long cell, int axis) const {
    auto c = decompose(cell);
    c[axis] = nx[axis] - 1 - c[axis];
    return index(c[0], c[1], c[2]);
  }
  // Cell whose center is nearest to p (clamped to the box).
  long long cell_at(const Vec3& p) const;
};

using GridPtr = std::shared_ptr<const ExteriorGrid>;

// Preconditions: R_out > 2 * M and h < m / 8.
GridPtr build_grid(const ObstacleSpec& obstacle, double R_out, double h);

// Sum of value * area over boundary faces; values must match
// grid.boundary_faces in length and order.
double surface_integral(const ExteriorGrid& grid,
                        const std::vector<double>& face_values);

// Exact fluid fraction of an axis-aligned face cut by the obstacle.
// Exposed for tests.
double face_aperture(const ObstacleSpec& obstacle, int face_axis,
                     double face_coord, const Vec3& lo, const Vec3& hi, int d);

}  // namespace exnls
