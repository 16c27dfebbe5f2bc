#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "exnls/util.h"

// Parallel primitives used by every hot loop in the solver.
//
// Reductions are computed over fixed 4096-element blocks: each block is
// summed left-to-right, block partials are combined in block order. The
// result is therefore bitwise identical whether the blocks are evaluated
// serially or by any number of OpenMP threads, which is what makes repeated
// runs byte-identical regardless of OMP_NUM_THREADS.

namespace exnls {

constexpr std::size_t kReduceBlock = 4096;

// Runtime switch between the OpenMP path and plain serial loops.
void set_parallel(bool on);
bool parallel_enabled();

namespace detail {
void run_blocks(std::size_t nblocks, void* ctx, void (*fn)(void*, std::size_t));
}

// f(i) -> void, applied for i in [0, n).
template <class F>
void parallel_for(std::size_t n, F&& f) {
  struct Ctx {
    F* f;
    std::size_t n;
  } ctx{&f, n};
  std::size_t nb = (n + kReduceBlock - 1) / kReduceBlock;
  detail::run_blocks(nb, &ctx, [](void* p, std::size_t b) {
    auto* c = static_cast<Ctx*>(p);
    std::size_t lo = b * kReduceBlock;
    std::size_t hi = lo + kReduceBlock < c->n ? lo + kReduceBlock : c->n;
    for (std::size_t i = lo; i < hi; ++i) (*c->f)(i);
  });
}

// Deterministic blocked sum of f(i), f returning double.
template <class F>
double det_sum(std::size_t n, F&& f) {
  std::size_t nb = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(nb, 0.0);
  struct Ctx {
    F* f;
    std::size_t n;
    double* partial;
  } ctx{&f, n, partial.data()};
  detail::run_blocks(nb, &ctx, [](void* p, std::size_t b) {
    auto* c = static_cast<Ctx*>(p);
    std::size_t lo = b * kReduceBlock;
    std::size_t hi = lo + kReduceBlock < c->n ? lo + kReduceBlock : c->n;
    double s = 0;
    for (std::size_t i = lo; i < hi; ++i) s += (*c->f)(i);
    c->partial[b] = s;
  });
  double total = 0;
  for (double s : partial) total += s;
  return total;
}

template <class F>
cplx det_sum_cplx(std::size_t n, F&& f) {
  std::size_t nb = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<cplx> partial(nb, cplx{0, 0});
  struct Ctx {
    F* f;
    std::size_t n;
    cplx* partial;
  } ctx{&f, n, partial.data()};
  detail::run_blocks(nb, &ctx, [](void* p, std::size_t b) {
    auto* c = static_cast<Ctx*>(p);
    std::size_t lo = b * kReduceBlock;
    std::size_t hi = lo + kReduceBlock < c->n ? lo + kReduceBlock : c->n;
    cplx s{0, 0};
    for (std::size_t i = lo; i < hi; ++i) s += (*c->f)(i);
    c->partial[b] = s;
  });
  cplx total{0, 0};
  for (cplx s : partial) total += s;
  return total;
}

using CVec = std::vector<cplx>;

// y = a*x + y
void axpy(cplx a, const CVec& x, CVec& y);
// y = x + a*y
void xpay(const CVec& x, cplx a, CVec& y);
void scale(cplx a, CVec& x);
// sum conj(x_i) y_i, deterministic.
cplx dot(const CVec& x, const CVec& y);
double norm2_sq(const CVec& x);

// Naive serial reference implementations (single left-to-right accumulation,
// no blocking). Kept for testing the parallel kernels and for the benchmark.
namespace ref {
cplx dot(const CVec& x, const CVec& y);
double norm2_sq(const CVec& x);
void axpy(cplx a, const CVec& x, CVec& y);
}  // namespace ref

}  // namespace exnls
