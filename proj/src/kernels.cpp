#include "chainsq/kernels.hpp"

#include <omp.h>

namespace chainsq::kernels {

void csr_matvec_serial(const CsrView& a, std::span<const Complex> x, std::span<Complex> y) {
  for (std::size_t r = 0; r < a.dim; ++r) {
    Complex acc{0.0, 0.0};
    for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) acc += a.values[k] * x[a.col_idx[k]];
    y[r] = acc;
  }
}

void csr_matvec_omp(const CsrView& a, std::span<const Complex> x, std::span<Complex> y) {
  const auto n = static_cast<std::ptrdiff_t>(a.dim);
  const std::size_t* rp = a.row_ptr.data();
  const std::size_t* ci = a.col_idx.data();
  const Complex* v = a.values.data();
  const Complex* xp = x.data();
  Complex* yp = y.data();
#pragma omp parallel for schedule(static) if (a.dim >= kParallelThreshold)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    Complex acc{0.0, 0.0};
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) acc += v[k] * xp[ci[k]];
    yp[r] = acc;
  }
}

Complex dot_serial(std::span<const Complex> x, std::span<const Complex> y) {
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::conj(x[i]) * y[i];
  return acc;
}

Complex dot_omp(std::span<const Complex> x, std::span<const Complex> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  double re = 0.0;
  double im = 0.0;
#pragma omp parallel for reduction(+ : re, im) schedule(static) if (x.size() >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Complex p = std::conj(x[i]) * y[i];
    re += p.real();
    im += p.imag();
  }
  return {re, im};
}

int max_threads() { return omp_get_max_threads(); }

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace chainsq::kernels
