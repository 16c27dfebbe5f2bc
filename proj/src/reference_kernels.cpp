#include "exnls/kernels.h"

// Serial reference kernels: one plain left-to-right accumulation, no
// blocking, no pragmas. The benchmark compares these against the
// production kernels and the unit tests pin down their agreement.

namespace exnls::ref {

cplx dot(const CVec& x, const CVec& y) {
  cplx s{0, 0};
  for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
  return s;
}

double norm2_sq(const CVec& x) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::norm(x[i]);
  return s;
}

void axpy(cplx a, const CVec& x, CVec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

}  // namespace exnls::ref
