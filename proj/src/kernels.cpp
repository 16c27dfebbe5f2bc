#include "exnls/kernels.h"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace exnls {

namespace {
bool g_parallel = true;
}

void set_parallel(bool on) { g_parallel = on; }
bool parallel_enabled() { return g_parallel; }

namespace detail {

void run_blocks(std::size_t nblocks, void* ctx, void (*fn)(void*, std::size_t)) {
#ifdef _OPENMP
  if (g_parallel && nblocks > 1) {
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(nblocks); ++b)
      fn(ctx, static_cast<std::size_t>(b));
    return;
  }
#endif
  for (std::size_t b = 0; b < nblocks; ++b) fn(ctx, b);
}

}  // namespace detail

void axpy(cplx a, const CVec& x, CVec& y) {
  parallel_for(x.size(), [&](std::size_t i) { y[i] += a * x[i]; });
}

void xpay(const CVec& x, cplx a, CVec& y) {
  parallel_for(x.size(), [&](std::size_t i) { y[i] = x[i] + a * y[i]; });
}

void scale(cplx a, CVec& x) {
  parallel_for(x.size(), [&](std::size_t i) { x[i] *= a; });
}

cplx dot(const CVec& x, const CVec& y) {
  return det_sum_cplx(x.size(),
                      [&](std::size_t i) { return std::conj(x[i]) * y[i]; });
}

double norm2_sq(const CVec& x) {
  return det_sum(x.size(), [&](std::size_t i) { return std::norm(x[i]); });
}

}  // namespace exnls
