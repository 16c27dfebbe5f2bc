#pragma once

#include <functional>

#include "exnls/geometry.h"
#include "exnls/kernels.h"

// Complex fields on the exterior grid, their conserved functionals, and the
// initial-data constructors. Field values live on included cells only; the
// storage covers the full box with zeros elsewhere so stencils never branch.

namespace exnls {

struct ComplexField {
  GridPtr grid;
  CVec v;
  double time = 0;
};

ComplexField zero_field(const GridPtr& grid);

// Positive conductance form: out = diag .* u - sum of open-edge neighbors.
// The discrete Laplacian is -(1/h^2) times this. Symmetric by construction,
// which is what makes Crank-Nicolson exactly norm-conserving.
void apply_lc(const ExteriorGrid& grid, const CVec& in, CVec& out);

double mass(const ComplexField& f);
// Dirichlet form sum A|u_i - u_j|^2 + wall terms, equal to <u, Lc u> h^{d-2};
// approximates the squared H^1_0 seminorm.
double grad_sq(const ComplexField& f);
double lp1_norm(const ComplexField& f, double p);  // integral of |u|^{p+1}
double energy(const ComplexField& f, double p);
double annulus_mass(const ComplexField& f);  // mass in R_out - 2 < |x| < R_out
double max_abs(const ComplexField& f);

// Pointwise one-sided/centered gradient, one component array per axis.
// Wall arms contribute the boundary value 0 at the crossing distance.
std::array<CVec, 3> gradient(const ComplexField& f);

struct SymmetryClass {
  std::array<bool, 3> antisym{};  // axes with odd reflection symmetry
  static SymmetryClass all_axes(int d) {
    SymmetryClass s;
    for (int a = 0; a < d; ++a) s.antisym[a] = true;
    return s;
  }
};

// L^2 projection onto the antisymmetric class, exact at grid level.
void symmetrize(ComplexField& f, const SymmetryClass& cls);
bool is_antisymmetric(const ComplexField& f, const SymmetryClass& cls,
                      double rel_tol);

// Smooth data constructors. Every constructor multiplies by a radial cutoff
// vanishing for |x| <= max_radius so the data is Dirichlet compatible.
ComplexField gaussian_bump(const GridPtr& grid, double amp, const Vec3& center,
                           double width, const Vec3& wavevector,
                           double cutoff_margin = 0.5);
ComplexField ring_bump(const GridPtr& grid, double amp, double r0,
                       double width, int winding, double cutoff_margin = 0.5);

// u(t,x) = (T-t)^{-1} Q(|x-x0|/(T-t)) Psi(x) exp(i (4-|x-x0|^2)/(4(T-t))),
// with Psi a smooth cutoff vanishing for |x| <= psi_r0 and equal to 1 past
// psi_r1. Q is supplied as a radial function.
ComplexField pseudoconformal_ansatz(const GridPtr& grid,
                                    const std::function<double(double)>& Q,
                                    double T, double t, const Vec3& x0,
                                    double psi_r0, double psi_r1);

// Multilinear interpolation; `clean` reports whether every stencil corner is
// an included cell.
cplx interpolate(const ComplexField& f, const Vec3& p, bool* clean = nullptr);

// Tensor-product quadratic interpolation on the 3^d cell box around p.
// One order better than `interpolate`, needed where an O(h^2) sample error
// would be divided by h (boundary normal derivatives). `clean` reports
// whether the whole box is included; the value is unusable otherwise.
cplx interpolate_quad(const ComplexField& f, const Vec3& p,
                      bool* clean = nullptr);

}  // namespace exnls
