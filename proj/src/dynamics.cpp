#include "chainsq/dynamics.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace chainsq {

namespace {

double log_binomial(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

void check_angles(double theta, double varphi) {
  if (!(theta >= 0.0 && theta <= kPi)) throw DomainError(fmt::format("theta = {} outside [0, pi]", theta));
  if (!(varphi >= 0.0 && varphi < 2.0 * kPi)) throw DomainError(fmt::format("varphi = {} outside [0, 2 pi)", varphi));
}

// c^k s^(n-k) with 0^0 = 1
double power_product(double c, int k, double s, int n_minus_k) {
  return (k == 0 ? 1.0 : std::pow(c, k)) * (n_minus_k == 0 ? 1.0 : std::pow(s, n_minus_k));
}

}  // namespace

StateVector coherent_state(int n_sites, double theta, double varphi, BasisTag tag) {
  if (n_sites < 1) throw DomainError("n_sites must be positive");
  check_angles(theta, varphi);
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  StateVector st;
  st.tag = tag;
  st.n_sites = n_sites;
  if (tag == BasisTag::Dicke) {
    st.amplitudes.resize(n_sites + 1);
    for (int k = 0; k <= n_sites; ++k) {  // k = N/2 + m up spins
      const int down = n_sites - k;
      const double mag = std::exp(0.5 * log_binomial(n_sites, k)) * power_product(c, k, s, down);
      st.amplitudes[k] = mag * std::exp(kI * (down * varphi));
    }
  } else {
    if (n_sites > 30) throw DomainError("full basis limited to N <= 30");
    const std::size_t dim = std::size_t{1} << n_sites;
    st.amplitudes.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t b = 0; b < dim; ++b) {
      const int k = std::popcount(b);
      const int down = n_sites - k;
      st.amplitudes[static_cast<Eigen::Index>(b)] = power_product(c, k, s, down) * std::exp(kI * (down * varphi));
    }
  }
  return st;
}

CVector project_to_dicke(int n_sites, const CVector& full) {
  if (full.size() != (Eigen::Index{1} << n_sites)) throw DomainError("state is not a full-basis vector");
  CVector out = CVector::Zero(n_sites + 1);
  for (Eigen::Index b = 0; b < full.size(); ++b) out[std::popcount(static_cast<std::uint64_t>(b))] += full[b];
  for (int k = 0; k <= n_sites; ++k) out[k] *= std::exp(-0.5 * log_binomial(n_sites, k));
  return out;
}

// ---------------------------------------------------------------- propagators

EigenPropagator::EigenPropagator(const CMatrix& h) {
  if (h.rows() != h.cols()) throw DomainError("Hamiltonian must be square");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  values_ = es.eigenvalues();
  vectors_ = es.eigenvectors();
}

void EigenPropagator::advance(CVector& psi, double dt) {
  if (psi.size() != values_.size()) throw DomainError("state/Hamiltonian dimension mismatch");
  if (dt < 0.0) throw DomainError("negative time step");
  CVector c = vectors_.adjoint() * psi;
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= std::exp(Complex{0.0, -values_[i] * dt});
  psi = vectors_ * c;
}

std::optional<double> EigenPropagator::moment_period() const {
  if (values_.size() < 2) return std::nullopt;
  const double width = values_.maxCoeff() - values_.minCoeff();
  if (!(width > 0.0)) return std::nullopt;
  return kPi * static_cast<double>(values_.size() - 1) / width;
}

double EigenPropagator::energy(const CVector& psi) const {
  const CVector c = vectors_.adjoint() * psi;
  return (c.cwiseAbs2().array() * values_.array()).sum();
}

SparseKrylovPropagator::SparseKrylovPropagator(const SparseOperator& h, KrylovOptions options)
    : h_(h), krylov_(h, options) {}

double SparseKrylovPropagator::energy(const CVector& psi) const { return psi.dot(h_.apply(psi)).real(); }

std::unique_ptr<Propagator> make_dicke_propagator(const CollectiveOperator& h) {
  return std::make_unique<EigenPropagator>(h.to_dense());
}

std::unique_ptr<Propagator> make_full_propagator(const SparseOperator& h, KrylovOptions options) {
  return std::make_unique<SparseKrylovPropagator>(h, options);
}

std::vector<CVector> evolve(Propagator& propagator, const CVector& psi0, const std::vector<double>& times) {
  if (static_cast<std::size_t>(psi0.size()) != propagator.dim()) throw DomainError("state/Hamiltonian dimension mismatch");
  std::vector<CVector> out;
  out.reserve(times.size());
  CVector psi = psi0;
  double t = 0.0;
  for (double target : times) {
    if (target < t) throw DomainError("output times must be ascending and non-negative");
    propagator.advance(psi, target - t);
    t = target;
    out.push_back(psi);
  }
  return out;
}

// ---------------------------------------------------------------- squeezing

SpinObservables SpinObservables::dicke(int n_sites) {
  SpinObservables o;
  o.n_sites_ = n_sites;
  o.tag_ = BasisTag::Dicke;
  o.dicke_ = {collective_operator(n_sites, CollectiveKind::Sx), collective_operator(n_sites, CollectiveKind::Sy),
              collective_operator(n_sites, CollectiveKind::Sz)};
  return o;
}

SpinObservables SpinObservables::full(int n_sites) {
  SpinObservables o;
  o.n_sites_ = n_sites;
  o.tag_ = BasisTag::Full;
  const auto basis = build_basis(n_sites);
  o.full_ = {build_collective(basis, Axis::X), build_collective(basis, Axis::Y), build_collective(basis, Axis::Z)};
  return o;
}

std::size_t SpinObservables::dim() const {
  return tag_ == BasisTag::Dicke ? static_cast<std::size_t>(n_sites_ + 1) : std::size_t{1} << n_sites_;
}

std::array<CVector, 3> SpinObservables::apply(const CVector& psi) const {
  if (static_cast<std::size_t>(psi.size()) != dim()) throw DomainError("state/observable dimension mismatch");
  if (tag_ == BasisTag::Dicke) return {dicke_[0].apply(psi), dicke_[1].apply(psi), dicke_[2].apply(psi)};
  return {full_[0].apply(psi), full_[1].apply(psi), full_[2].apply(psi)};
}

std::array<Eigen::Vector3d, 2> transverse_frame(const Eigen::Vector3d& n) {
  Eigen::Vector3d e1 = Eigen::Vector3d::UnitZ().cross(n);
  if (e1.norm() < 1e-6) e1 = Eigen::Vector3d::UnitX().cross(n);
  e1.normalize();
  const Eigen::Vector3d e2 = n.cross(e1);
  return {e1, e2};
}

SqueezingSample squeezing_parameter(const CVector& psi, const SpinObservables& ops) {
  const auto s = ops.apply(psi);
  const double norm2 = psi.squaredNorm();
  Eigen::Vector3d mean;
  for (int a = 0; a < 3; ++a) mean[a] = psi.dot(s[a]).real() / norm2;
  const double len = mean.norm();
  if (len < 1e-8 * ops.n_sites()) throw MeanSpinCollapse(fmt::format("mean spin |<S>| = {:.3g} collapsed", len));

  // symmetrized second moments Re<S_a psi|S_b psi>
  Eigen::Matrix3d cov;
  for (int a = 0; a < 3; ++a)
    for (int b = a; b < 3; ++b) cov(a, b) = cov(b, a) = s[a].dot(s[b]).real() / norm2 - mean[a] * mean[b];

  const auto frame = transverse_frame(mean / len);
  Eigen::Matrix2d c2;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c2(i, j) = frame[i].dot(cov * frame[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c2, Eigen::EigenvaluesOnly);
  SqueezingSample out;
  out.mean_spin = mean;
  out.var_min = es.eigenvalues()[0];
  out.xi2 = ops.n_sites() * out.var_min / (len * len);
  return out;
}

void SqueezingTrace::push(double t, const CVector& psi, const SpinObservables& ops) {
  times.push_back(t);
  norm_error.push_back(std::abs(psi.norm() - 1.0));
  try {
    const auto s = squeezing_parameter(psi, ops);
    xi2.push_back(s.xi2);
    mean_spin.push_back(s.mean_spin);
    var_min.push_back(s.var_min);
    collapsed.push_back(false);
  } catch (const MeanSpinCollapse&) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    xi2.push_back(nan);
    mean_spin.push_back(Eigen::Vector3d::Constant(nan));
    var_min.push_back(nan);
    collapsed.push_back(true);
  }
}

SqueezingTrace squeezing_trace(Propagator& propagator, const SpinObservables& ops, const CVector& psi0,
                               const std::vector<double>& times) {
  if (static_cast<std::size_t>(psi0.size()) != propagator.dim()) throw DomainError("state/Hamiltonian dimension mismatch");
  SqueezingTrace trace;
  CVector psi = psi0;
  double t = 0.0;
  for (double target : times) {
    if (target < t) throw DomainError("output times must be ascending and non-negative");
    propagator.advance(psi, target - t);
    t = target;
    trace.push(t, psi, ops);
  }
  return trace;
}

std::vector<double> log_time_grid(double t_max, int per_decade, int decades) {
  if (!(t_max > 0.0) || per_decade < 1 || decades < 1) throw DomainError("invalid log grid");
  std::vector<double> t{0.0};
  const int n = per_decade * decades;
  for (int i = 0; i <= n; ++i) t.push_back(t_max * std::pow(10.0, static_cast<double>(i - n) / per_decade));
  return t;
}

std::vector<double> uniform_time_grid(double t0, double t1, int points) {
  if (points < 2 || !(t1 > t0)) throw DomainError("invalid uniform grid");
  std::vector<double> t(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) t[i] = t0 + (t1 - t0) * i / (points - 1);
  t.back() = t1;
  return t;
}

}  // namespace chainsq
