#include <doctest.h>

#include "chainsq/dynamics.hpp"
#include "generators.hpp"

using namespace chainsq;

namespace {

CVector exact(const CMatrix& h, const CVector& psi, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const CVector phase = (es.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
  return es.eigenvectors() * phase.asDiagonal() * (es.eigenvectors().adjoint() * psi);
}

}  // namespace

TEST_CASE("Krylov propagation matches dense exponentiation") {
  gen::Rng rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t dim = static_cast<std::size_t>(rng.integer(5, 200));
    const auto h = rng.hermitian_sparse(dim, 3);
    const CVector psi0 = rng.unit_vector(dim);
    const double t = rng.uniform(0.1, 20.0);
    CAPTURE(dim);
    CAPTURE(t);
    KrylovPropagator k(h, {20, 1e-12, 1e-9});
    CVector psi = psi0;
    k.advance(psi, t);
    CHECK((psi - exact(h.to_dense(), psi0, t)).norm() < 1e-9);
    CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
    CHECK(k.stats().matvecs > 0);
  }
}

TEST_CASE("Krylov edge cases") {
  gen::Rng rng(2);
  const auto h = rng.hermitian_sparse(30, 2);
  KrylovPropagator k(h);
  CVector psi = rng.unit_vector(30);
  const CVector copy = psi;
  k.advance(psi, 0.0);
  CHECK((psi - copy).norm() == 0.0);
  CHECK_THROWS_AS(k.advance(psi, -1.0), DomainError);

  // an eigenvector spans an invariant subspace: one breakdown, exact phase
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.to_dense());
  CVector v = es.eigenvectors().col(3);
  KrylovPropagator k2(h);
  k2.advance(v, 2.5);
  CHECK((v - std::exp(Complex(0.0, -2.5 * es.eigenvalues()(3))) * es.eigenvectors().col(3)).norm() < 1e-10);
  CHECK(k2.stats().breakdowns >= 1);

  // subspace larger than the space
  const auto small = rng.hermitian_sparse(4, 2);
  KrylovPropagator k3(small, {30, 1e-12, 1e-9});
  CVector w = rng.unit_vector(4);
  const CVector w0 = w;
  k3.advance(w, 3.0);
  CHECK((w - exact(small.to_dense(), w0, 3.0)).norm() < 1e-10);
}

TEST_CASE("sparse Krylov and dense propagators agree on a spin chain") {
  const auto cfg = ChainConfig::make(8, 1.0, 0.2, 1.1);
  const auto basis = build_basis(8);
  const auto h = build_h_se(cfg, basis) + build_h_flip(cfg, basis);
  auto krylov = make_full_propagator(h);
  EigenPropagator dense(h.to_dense());
  CVector a = coherent_state(8, 0.5 * kPi, 0.0, BasisTag::Full).amplitudes, b = a;
  for (int step = 0; step < 5; ++step) {
    krylov->advance(a, 7.0);
    dense.advance(b, 7.0);
  }
  CHECK((a - b).norm() < 1e-8);
  CHECK(krylov->energy(a) == doctest::Approx(dense.energy(b)).epsilon(1e-10));
}
