#include "exnls/linsolve.h"

#include <cmath>

#include "exnls/util.h"

namespace exnls {
namespace {

void precondition(const CVec& diag, const CVec& in, CVec& out) {
  if (diag.empty()) {
    out = in;
    return;
  }
  parallel_for(in.size(), [&](size_t i) {
    out[i] = (diag[i] != cplx(0)) ? in[i] / diag[i] : in[i];
  });
}

}  // namespace

SolveStats bicgstab(const ApplyOp& apply, const CVec& diag, const CVec& b,
                    CVec& x, double rel_tol, int max_iter) {
  size_t n = b.size();
  require(x.size() == n, "bicgstab: size mismatch");
  double bnorm = std::sqrt(norm2_sq(b));
  if (bnorm == 0) {
    x.assign(n, cplx(0));
    return {0, 0};
  }

  CVec r(n), rhat(n), p(n), v(n), s(n), t(n), phat(n), shat(n);
  apply(x, r);
  parallel_for(n, [&](size_t i) { r[i] = b[i] - r[i]; });
  rhat = r;
  cplx rho(1), alpha(1), omega(1);
  p.assign(n, cplx(0));
  v.assign(n, cplx(0));

  int restarts = 0;
  SolveStats st;
  for (int it = 1; it <= max_iter; ++it) {
    st.iterations = it;
    cplx rho1 = dot(rhat, r);
    if (std::abs(rho1) < 1e-300 * bnorm * bnorm) {
      // Shadow residual became orthogonal to r; re-seed and keep going.
      if (++restarts > 4) throw SolverError("bicgstab: repeated breakdown");
      rhat = r;
      rho1 = dot(rhat, r);
      p.assign(n, cplx(0));
      v.assign(n, cplx(0));
      rho = alpha = omega = cplx(1);
    }
    cplx beta = (rho1 / rho) * (alpha / omega);
    parallel_for(n, [&](size_t i) {
      p[i] = r[i] + beta * (p[i] - omega * v[i]);
    });
    precondition(diag, p, phat);
    apply(phat, v);
    cplx denom = dot(rhat, v);
    if (denom == cplx(0)) throw SolverError("bicgstab: stagnation");
    alpha = rho1 / denom;
    parallel_for(n, [&](size_t i) { s[i] = r[i] - alpha * v[i]; });
    double snorm = std::sqrt(norm2_sq(s));
    if (snorm <= rel_tol * bnorm) {
      axpy(alpha, phat, x);
      st.rel_residual = snorm / bnorm;
      return st;
    }
    precondition(diag, s, shat);
    apply(shat, t);
    double tt = norm2_sq(t);
    if (tt == 0) throw SolverError("bicgstab: stagnation");
    omega = dot(t, s) / tt;
    parallel_for(n, [&](size_t i) {
      x[i] += alpha * phat[i] + omega * shat[i];
      r[i] = s[i] - omega * t[i];
    });
    double rnorm = std::sqrt(norm2_sq(r));
    st.rel_residual = rnorm / bnorm;
    if (rnorm <= rel_tol * bnorm) return st;
    if (omega == cplx(0)) throw SolverError("bicgstab: omega breakdown");
    rho = rho1;
  }
  throw SolverError("bicgstab: no convergence in " +
                    std::to_string(max_iter) + " iterations (rel residual " +
                    format_g17(st.rel_residual) + ")");
}

}  // namespace exnls
