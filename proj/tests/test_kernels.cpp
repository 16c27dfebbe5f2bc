#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "exnls/kernels.h"
#include "exnls/linsolve.h"

using namespace exnls;

namespace {

CVec random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  CVec v(n);
  for (auto& z : v) z = {u(rng), u(rng)};
  return v;
}

struct ParallelGuard {
  bool saved = parallel_enabled();
  ~ParallelGuard() { set_parallel(saved); }
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("det_sum matches a plain loop") {
  // Sizes straddling the reduction block boundary, where partial-block
  // handling can go wrong.
  for (std::size_t n : {std::size_t{1}, kReduceBlock - 1, kReduceBlock,
                        kReduceBlock + 1, 3 * kReduceBlock + 17}) {
    std::vector<double> x(n);
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(-1, 1);
    for (auto& v : x) v = u(rng);
    double naive = 0;
    for (double v : x) naive += v;
    double blocked = det_sum(n, [&](std::size_t i) { return x[i]; });
    CHECK(blocked == doctest::Approx(naive).epsilon(1e-13));
  }
}

TEST_CASE("reductions are bitwise identical serial vs parallel") {
  ParallelGuard guard;
  const std::size_t n = 3 * kReduceBlock + 1234;
  CVec x = random_vec(n, 7), y = random_vec(n, 8);

  set_parallel(false);
  double s_norm = norm2_sq(x);
  cplx s_dot = dot(x, y);
  double s_sum = det_sum(n, [&](std::size_t i) { return std::norm(x[i]); });

  set_parallel(true);
  CHECK(norm2_sq(x) == s_norm);
  CHECK(dot(x, y) == s_dot);
  CHECK(det_sum(n, [&](std::size_t i) { return std::norm(x[i]); }) == s_sum);
}

TEST_CASE("blocked kernels agree with the naive references") {
  const std::size_t n = 2 * kReduceBlock + 99;
  CVec x = random_vec(n, 21), y = random_vec(n, 22);
  CHECK(std::abs(dot(x, y) - ref::dot(x, y)) < 1e-12 * n);
  CHECK(norm2_sq(x) == doctest::Approx(ref::norm2_sq(x)).epsilon(1e-13));

  CVec y1 = y, y2 = y;
  cplx a{0.3, -1.7};
  axpy(a, x, y1);
  ref::axpy(a, x, y2);
  for (std::size_t i = 0; i < n; i += n / 13)
    CHECK(y1[i] == y2[i]);  // same fused expression, identical rounding
}

TEST_CASE("axpy xpay scale definitions") {
  CVec x = {cplx{1, 2}, cplx{-3, 0.5}};
  CVec y = {cplx{0, 1}, cplx{2, -2}};
  cplx a{2, -1};

  CVec r = y;
  axpy(a, x, r);  // r = a x + y
  CHECK(r[0] == a * x[0] + y[0]);
  CHECK(r[1] == a * x[1] + y[1]);

  r = y;
  xpay(x, a, r);  // r = x + a y
  CHECK(r[0] == x[0] + a * y[0]);
  CHECK(r[1] == x[1] + a * y[1]);

  r = x;
  scale(a, r);
  CHECK(r[0] == a * x[0]);
  CHECK(r[1] == a * x[1]);
}

TEST_CASE("dot conjugates the left argument") {
  CVec x = {cplx{0, 1}};
  CVec y = {cplx{0, 1}};
  CHECK(dot(x, y) == cplx{1, 0});
}

TEST_CASE("parallel_for covers the index range exactly once") {
  ParallelGuard guard;
  for (bool par : {false, true}) {
    set_parallel(par);
    const std::size_t n = kReduceBlock + 321;
    std::vector<int> hits(n, 0);
    parallel_for(n, [&](std::size_t i) { hits[i]++; });
    for (std::size_t i = 0; i < n; ++i) REQUIRE(hits[i] == 1);
  }
}

TEST_CASE("bicgstab solves a complex symmetric system") {
  // Diagonally dominant tridiagonal complex symmetric matrix, the same
  // structural family as the Crank-Nicolson operator.
  const std::size_t n = 500;
  cplx dia{4, 1.5}, off{-1, 0.2};
  auto apply = [&](const CVec& in, CVec& out) {
    out.assign(n, cplx{0, 0});
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = dia * in[i];
      if (i > 0) out[i] += off * in[i - 1];
      if (i + 1 < n) out[i] += off * in[i + 1];
    }
  };
  CVec diag(n, dia);
  CVec xtrue = random_vec(n, 77);
  CVec b;
  apply(xtrue, b);

  CVec x(n, cplx{0, 0});
  SolveStats st = bicgstab(apply, diag, b, x, 1e-12, 200);
  CHECK(st.rel_residual <= 1e-12);
  CHECK(st.iterations > 0);
  double err = 0;
  for (std::size_t i = 0; i < n; ++i) err += std::norm(x[i] - xtrue[i]);
  CHECK(std::sqrt(err) < 1e-9 * std::sqrt(norm2_sq(xtrue)));

  SUBCASE("empty diag disables preconditioning but still converges") {
    CVec x0(n, cplx{0, 0});
    SolveStats st2 = bicgstab(apply, CVec{}, b, x0, 1e-12, 400);
    CHECK(st2.rel_residual <= 1e-12);
  }

  SUBCASE("iteration cap raises SolverError") {
    CVec x0(n, cplx{0, 0});
    CHECK_THROWS_AS(bicgstab(apply, diag, b, x0, 1e-14, 1), SolverError);
  }
}

TEST_CASE("bicgstab uses the initial guess") {
  const std::size_t n = 64;
  auto apply = [&](const CVec& in, CVec& out) { out = in; };  // identity
  CVec b = random_vec(n, 5);
  CVec x = b;  // exact solution already
  SolveStats st = bicgstab(apply, CVec{}, b, x, 1e-12, 10);
  CHECK(st.iterations <= 1);
  for (std::size_t i = 0; i < n; i += 7) CHECK(x[i] == b[i]);
}

}  // TEST_SUITE
