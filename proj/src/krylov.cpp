#include "chainsq/krylov.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace chainsq {

KrylovPropagator::KrylovPropagator(const SparseOperator& h, KrylovOptions options) : h_(h), options_(options) {
  if (options_.subspace_dim < 2) throw DomainError("Krylov subspace dimension must be >= 2");
  if (!(options_.tolerance > 0.0)) throw DomainError("Krylov tolerance must be positive");
  const auto rp = h_.row_ptr();
  const auto vals = h_.values();
  for (std::size_t r = 0; r < h_.dim(); ++r) {
    double s = 0.0;
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) s += std::abs(vals[k]);
    norm_bound_ = std::max(norm_bound_, s);
  }
}

void KrylovPropagator::advance(CVector& psi, double dt) {
  if (static_cast<std::size_t>(psi.size()) != h_.dim())
    throw DomainError(fmt::format("state dimension {} does not match operator dimension {}", psi.size(), h_.dim()));
  if (dt < 0.0) throw DomainError("negative time step");
  if (dt == 0.0 || norm_bound_ == 0.0) return;

  const Eigen::Index dim = psi.size();
  const int m_max = static_cast<int>(std::min<Eigen::Index>(options_.subspace_dim, dim));
  const double breakdown_tol = 1e-13 * norm_bound_;
  const double min_step = options_.min_relative_step / norm_bound_;

  CMatrix v(dim, m_max + 1);
  RVector alpha(m_max);
  RVector beta(m_max);
  CVector w(dim);

  double remaining = dt;
  while (remaining > 0.0) {
    const double nrm = psi.norm();
    if (nrm == 0.0) return;
    v.col(0) = psi / nrm;

    int k = m_max;
    bool exact = false;
    for (int j = 0; j < m_max; ++j) {
      h_.apply(std::span<const Complex>(v.col(j).data(), static_cast<std::size_t>(dim)),
               std::span<Complex>(w.data(), static_cast<std::size_t>(dim)));
      ++stats_.matvecs;
      alpha[j] = v.col(j).dot(w).real();
      w -= alpha[j] * v.col(j);
      if (j > 0) w -= beta[j - 1] * v.col(j - 1);
      // one full reorthogonalization pass keeps the basis orthonormal to
      // working precision for the short recurrences used here
      const CVector proj = v.leftCols(j + 1).adjoint() * w;
      w -= v.leftCols(j + 1) * proj;
      beta[j] = w.norm();
      if (beta[j] < breakdown_tol) {
        k = j + 1;
        exact = true;
        ++stats_.breakdowns;
        break;
      }
      v.col(j + 1) = w / beta[j];
    }

    Eigen::SelfAdjointEigenSolver<RMatrix> es;
    RVector diag = alpha.head(k);
    RVector sub = beta.head(std::max(k - 1, 0));
    if (k == 1) {
      es.compute(RMatrix::Constant(1, 1, alpha[0]));
    } else {
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    }
    const RMatrix& q = es.eigenvectors();
    const RVector& lam = es.eigenvalues();
    const RVector q_first = q.row(0).transpose();

    auto coefficients = [&](double tau) {
      CVector phase(k);
      for (int i = 0; i < k; ++i) phase[i] = std::exp(Complex{0.0, -lam[i] * tau}) * q_first[i];
      return CVector(q.cast<Complex>() * phase);
    };
    auto error_estimate = [&](const CVector& c) { return exact ? 0.0 : beta[k - 1] * std::abs(c[k - 1]); };

    double tau = last_step_ > 0.0 ? std::min(remaining, 2.0 * last_step_) : remaining;
    CVector c = coefficients(tau);
    double err = error_estimate(c);
    bool reduced = false;
    while (err > options_.tolerance) {
      tau *= 0.5;
      reduced = true;
      ++stats_.rejected;
      if (tau < min_step)
        throw KrylovError(fmt::format("Krylov step fell below {:.3g} (error estimate {:.3g})", min_step, err));
      c = coefficients(tau);
      err = error_estimate(c);
    }
    stats_.max_error_estimate = std::max(stats_.max_error_estimate, err);
    psi = nrm * (v.leftCols(k) * c);
    remaining -= tau;
    if (remaining < 1e-15 * dt) remaining = 0.0;
    last_step_ = reduced ? tau : std::max(last_step_, tau);
    ++stats_.steps;
  }
}

}  // namespace chainsq
