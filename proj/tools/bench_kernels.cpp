#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "exnls/field.h"
#include "exnls/kernels.h"

// Times the OpenMP kernel paths against the plain serial reference
// implementations on the vector primitives and the conductance operator.
// --smoke shrinks everything so the run doubles as a wiring check.

using namespace exnls;

namespace {

template <class F>
double best_ms(int reps, F&& f) {
  using clock = std::chrono::steady_clock;
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = clock::now();
    f();
    std::chrono::duration<double, std::milli> el = clock::now() - t0;
    best = std::min(best, el.count());
  }
  return best;
}

CVec random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CVec v(n);
  for (auto& z : v) z = cplx(u(rng), u(rng));
  return v;
}

void report(const char* name, double serial_ms, double omp_ms) {
  std::printf("%-14s %12.3f %12.3f %10.2fx\n", name, serial_ms, omp_ms,
              serial_ms / omp_ms);
}

}  // namespace

int main(int argc, char** argv) {
  bool smoke = false;
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--smoke") smoke = true;

  const std::size_t n = smoke ? (std::size_t(1) << 14) : (std::size_t(1) << 22);
  const int reps = smoke ? 3 : 7;
  const double h = smoke ? 1.0 / 10 : 1.0 / 48;

  CVec x = random_vec(n, 1);
  CVec y = random_vec(n, 2);
  const cplx a(0.3, -0.7);

  std::printf("vector length %zu, %d reps (best shown)\n", n, reps);
  std::printf("%-14s %12s %12s %10s\n", "kernel", "ref ms", "omp ms", "speedup");

  set_parallel(true);
  volatile double sink = 0;

  double t_ref = best_ms(reps, [&] { sink += std::abs(ref::dot(x, y)); });
  double t_omp = best_ms(reps, [&] { sink += std::abs(dot(x, y)); });
  report("dot", t_ref, t_omp);
  double dot_diff = std::abs(ref::dot(x, y) - dot(x, y));

  t_ref = best_ms(reps, [&] { sink += ref::norm2_sq(x); });
  t_omp = best_ms(reps, [&] { sink += norm2_sq(x); });
  report("norm2_sq", t_ref, t_omp);
  double norm_diff = std::abs(ref::norm2_sq(x) - norm2_sq(x));

  CVec y_ref = y, y_omp = y;
  t_ref = best_ms(reps, [&] { ref::axpy(a, x, y_ref); });
  t_omp = best_ms(reps, [&] { axpy(a, x, y_omp); });
  report("axpy", t_ref, t_omp);
  double axpy_diff = 0;
  for (std::size_t i = 0; i < n; ++i)
    axpy_diff = std::max(axpy_diff, std::abs(y_ref[i] - y_omp[i]));

  ObstacleSpec ball = make_obstacle(2, "ball", {1.0});
  GridPtr grid = build_grid(ball, 8.0, h);
  CVec in = random_vec(std::size_t(grid->ntot), 3);
  CVec out_serial(in.size(), cplx(0)), out_omp(in.size(), cplx(0));
  set_parallel(false);
  t_ref = best_ms(reps, [&] { apply_lc(*grid, in, out_serial); });
  set_parallel(true);
  t_omp = best_ms(reps, [&] { apply_lc(*grid, in, out_omp); });
  std::printf("%-14s %12.3f %12.3f %10.2fx  (%lld cells)\n", "apply_lc", t_ref,
              t_omp, t_ref / t_omp, grid->ntot);
  double lc_diff = 0;
  for (std::size_t i = 0; i < in.size(); ++i)
    lc_diff = std::max(lc_diff, std::abs(out_serial[i] - out_omp[i]));

  std::printf("\nagreement (max abs difference)\n");
  std::printf("  dot blocked-vs-naive   %.3e\n", dot_diff);
  std::printf("  norm2_sq               %.3e\n", norm_diff);
  std::printf("  axpy                   %.3e\n", axpy_diff);
  std::printf("  apply_lc serial-vs-omp %.3e (must be exactly 0)\n", lc_diff);

  (void)sink;
  return lc_diff == 0 && axpy_diff == 0 ? 0 : 1;
}
