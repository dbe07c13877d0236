#pragma once

// Short-iterate Lanczos propagator for exp(-i H t) |psi> with a sparse
// Hermitian H and adaptive step control.

#include <cstddef>

#include "chainsq/chain.hpp"

namespace chainsq {

struct KrylovOptions {
  int subspace_dim = 30;
  // Local error bound per step, relative to the state norm.
  double tolerance = 1e-10;
  // Steps below this size (in units of 1/||H||) abort with KrylovError.
  double min_relative_step = 1e-9;
};

struct KrylovStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;  // step-size halvings
  std::size_t matvecs = 0;
  std::size_t breakdowns = 0;  // invariant subspaces found (treated as exact)
  double max_error_estimate = 0.0;
};

class KrylovPropagator {
 public:
  explicit KrylovPropagator(const SparseOperator& h, KrylovOptions options = {});

  std::size_t dim() const { return h_.dim(); }
  // psi <- exp(-i H dt) psi, dt >= 0.
  void advance(CVector& psi, double dt);

  const KrylovStats& stats() const { return stats_; }
  double norm_bound() const { return norm_bound_; }

 private:
  SparseOperator h_;
  KrylovOptions options_;
  KrylovStats stats_;
  double norm_bound_ = 0.0;  // max row sum of |H|
  double last_step_ = 0.0;
};

}  // namespace chainsq
