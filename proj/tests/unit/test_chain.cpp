#include <doctest.h>

#include <bit>

#include "chainsq/chain.hpp"
#include "generators.hpp"

using namespace chainsq;

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Reference 2^N operators from Kronecker products of 2x2 Pauli-type matrices.
CMatrix site_op(int n, int site, const CMatrix& op) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int j = n; j >= 1; --j) {
    const CMatrix f = j == site ? op : CMatrix::Identity(2, 2);
    CMatrix k(out.rows() * 2, out.cols() * 2);
    for (int a = 0; a < out.rows(); ++a)
      for (int b = 0; b < out.cols(); ++b) k.block(2 * a, 2 * b, 2, 2) = out(a, b) * f;
    out = k;
  }
  return out;
}

// Basis bit 0 = down, 1 = up.
CMatrix sp() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}
CMatrix sz() {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = -0.5;
  m(1, 1) = 0.5;
  return m;
}

}  // namespace

TEST_CASE("chain config validation") {
  CHECK_THROWS_AS(ChainConfig::make(7, 1.0, 0.1, 1.0), DomainError);
  CHECK_THROWS_AS(ChainConfig::make(2, 1.0, 0.1, 1.0), DomainError);
  CHECK_THROWS_AS(ChainConfig::make(8, 1.0, 0.1, 0.0), DomainError);
  CHECK_THROWS_AS(ChainConfig::make(8, 1.0, 0.1, 2.0 * kPi), DomainError);
  CHECK_NOTHROW(ChainConfig::make(8, 1.0, 0.0, 0.0));
  const auto c = ChainConfig::make(8, 1.0, 0.1, 1.0);
  CHECK(c.phi0 == doctest::Approx(1.0 * 9 / 2));
  CHECK(c.lowest_gap() == doctest::Approx(1.0 - std::cos(kPi / 8)));
  CHECK_NOTHROW(ChainConfig::make_unchecked(3, 1.0, 0.1, 1.0));
}

TEST_CASE("basis sizes and indexing") {
  for (int n : {2, 4, 6, 10}) {
    const auto full = build_basis(n);
    CHECK(full.size() == (std::size_t{1} << n));
    for (int up = 0; up <= n; ++up) {
      const double m = up - n / 2.0;
      const auto b = build_basis(n, m);
      CHECK(b.size() == static_cast<std::size_t>(binom(n, up)));
      for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(std::popcount(b.state(i)) == up);
        CHECK(b.index_of(b.state(i)) == i);
      }
    }
  }
  CHECK_THROWS_AS(build_basis(4, 3.0), DomainError);
  CHECK_THROWS_AS(build_basis(4, 0.5), DomainError);
}

TEST_CASE("exchange term matches Kronecker reference") {
  for (auto bc : {Boundary::Open, Boundary::Periodic}) {
    const int n = 5;
    const auto cfg = ChainConfig::make_unchecked(n, 0.7, 0.0, 1.0, std::nullopt, bc);
    const auto basis = build_basis(n);
    const CMatrix h = build_h_se(cfg, basis).to_dense();
    const auto dim = static_cast<Eigen::Index>(basis.size());
    CMatrix ref = CMatrix::Zero(dim, dim);
    const int bonds = bc == Boundary::Open ? n - 1 : n;
    for (int j = 1; j <= bonds; ++j) {
      const int k = j % n + 1;
      const CMatrix pj = site_op(n, j, sp()), pk = site_op(n, k, sp());
      ref += 0.7 * (site_op(n, j, sz()) * site_op(n, k, sz()) + 0.5 * (pj * pk.adjoint() + pj.adjoint() * pk) -
                    0.25 * CMatrix::Identity(dim, dim));
    }
    CHECK(gen::max_abs(h - ref) < 1e-13);
  }
}

TEST_CASE("two-site exchange spectrum: singlet -J, triplet 0") {
  const auto cfg = ChainConfig::make_unchecked(2, 1.3, 0.0, 1.0);
  const CMatrix h = build_h_se(cfg, build_basis(2)).to_dense();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  CHECK(es.eigenvalues()(0) == doctest::Approx(-1.3));
  for (int i = 1; i < 4; ++i) CHECK(std::abs(es.eigenvalues()(i)) < 1e-13);
}

TEST_CASE("spin-flip term matches Kronecker reference") {
  gen::Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = rng.integer(3, 6);
    const double omega = rng.uniform(0.01, 1.0), phi = rng.phase(), phi0 = rng.uniform(-3.0, 3.0);
    CAPTURE(trial);
    const auto cfg = ChainConfig::make_unchecked(n, 1.0, omega, phi, phi0);
    const CMatrix h = build_h_flip(cfg, build_basis(n)).to_dense();
    CMatrix ref = CMatrix::Zero(h.rows(), h.cols());
    for (int j = 1; j <= n; ++j) {
      const CMatrix p = std::exp(kI * (phi * j - phi0)) * site_op(n, j, sp());
      ref += 0.5 * omega * (p + p.adjoint());
    }
    CHECK(gen::max_abs(h - ref) < 1e-13);
  }
}

TEST_CASE("collective operators satisfy the spin algebra") {
  const int n = 6;
  const auto basis = build_basis(n);
  const auto x = build_collective(basis, Axis::X), y = build_collective(basis, Axis::Y), z = build_collective(basis, Axis::Z);
  CHECK(gen::max_abs((commutator(x, y) - z.scaled(kI)).to_dense()) < 1e-13);
  CHECK(gen::max_abs((commutator(y, z) - x.scaled(kI)).to_dense()) < 1e-13);
  CHECK(gen::max_abs((commutator(z, x) - y.scaled(kI)).to_dense()) < 1e-13);
  const auto s2 = build_total_spin_squared(basis);
  CHECK(gen::max_abs(commutator(s2, x).to_dense()) < 1e-12);
  // all-up state: S(S+1) with S = N/2
  const auto all_up = basis.index_of((std::uint64_t{1} << n) - 1);
  CHECK(s2.element(all_up, all_up).real() == doctest::Approx(3.0 * 4.0));
  CHECK(x.hermiticity_defect() < 1e-15);
}

TEST_CASE("exchange term conserves S_z and total spin") {
  const auto cfg = ChainConfig::make(6, 1.0, 0.0, 1.0);
  const auto basis = build_basis(6);
  const auto h = build_h_se(cfg, basis);
  CHECK(gen::max_abs(commutator(h, build_collective(basis, Axis::Z)).to_dense()) < 1e-13);
  CHECK(gen::max_abs(commutator(h, build_total_spin_squared(basis)).to_dense()) < 1e-12);
}

TEST_CASE("sparse operator algebra") {
  gen::Rng rng(3);
  const auto a = rng.hermitian_sparse(20, 3), b = rng.hermitian_sparse(20, 2);
  const CMatrix da = a.to_dense(), db = b.to_dense();
  CHECK(gen::max_abs((a * b).to_dense() - da * db) < 1e-12);
  CHECK(gen::max_abs((a + b).to_dense() - (da + db)) < 1e-13);
  CHECK(gen::max_abs(a.adjoint().to_dense() - da.adjoint()) < 1e-15);
  CHECK(a.hermiticity_defect() < 1e-15);
  const CVector v = rng.unit_vector(20);
  CHECK((a.apply(v) - da * v).norm() < 1e-12);
  CHECK(a.frobenius_norm() == doctest::Approx(da.norm()));
  // duplicate triplets accumulate
  const SparseOperator d(2, {{0, 1, 1.0}, {0, 1, 2.0}}, false);
  CHECK(d.element(0, 1) == Complex(3.0));
}
