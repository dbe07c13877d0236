#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a serial reference kept for tests and benchmarks.

#include <cstddef>
#include <span>

#include "chainsq/types.hpp"

namespace chainsq::kernels {

struct CsrView {
  std::size_t dim;
  std::span<const std::size_t> row_ptr;
  std::span<const std::size_t> col_idx;
  std::span<const Complex> values;
};

void csr_matvec_serial(const CsrView& a, std::span<const Complex> x, std::span<Complex> y);
void csr_matvec_omp(const CsrView& a, std::span<const Complex> x, std::span<Complex> y);

// <x|y> = sum conj(x_i) y_i
Complex dot_serial(std::span<const Complex> x, std::span<const Complex> y);
Complex dot_omp(std::span<const Complex> x, std::span<const Complex> y);

// Below this dimension the OpenMP kernels run serially.
inline constexpr std::size_t kParallelThreshold = 4096;

int max_threads();
void set_threads(int n);

}  // namespace chainsq::kernels
