#pragma once

#include <functional>

#include "exnls/kernels.h"

namespace exnls {

// y = A x for the (complex symmetric) system matrix.
using ApplyOp = std::function<void(const CVec&, CVec&)>;

struct SolveStats {
  int iterations = 0;
  double rel_residual = 0;
};

// Preconditioned BiCGStab. `diag` is the matrix diagonal, used as a Jacobi
// preconditioner; pass an empty vector to disable. `x` holds the initial
// guess on entry and the solution on exit. Throws SolverError if the relative
// residual fails to reach rel_tol within max_iter iterations (breakdowns are
// retried by re-seeding the shadow residual before giving up).
SolveStats bicgstab(const ApplyOp& apply, const CVec& diag, const CVec& b,
                    CVec& x, double rel_tol, int max_iter);

}  // namespace exnls
