#include "chainsq/effective.hpp"

#include <cmath>

#include <fmt/format.h>

#include "chainsq/spinwave.hpp"
#include "chainsq/summation.hpp"

namespace chainsq {

namespace {

void require_open(const ChainConfig& c) {
  if (c.boundary != Boundary::Open) throw DomainError("the effective model is defined for open chains");
}

void require_coupling_phase(const ChainConfig& c) {
  if (is_trivial_phase(c.phi)) throw DomainError(fmt::format("phi = {} is a trivial phase", c.phi));
}

double sz_value(int n_sites, int index) { return index - n_sites / 2.0; }

}  // namespace

// ---------------------------------------------------------------- band operator

CollectiveOperator::CollectiveOperator(int n_sites) : n_sites_(n_sites) {
  if (n_sites < 1) throw DomainError("n_sites must be positive");
  for (int d = -kBandwidth; d <= kBandwidth; ++d) {
    const int len = dim() - std::abs(d);
    diags_[d + kBandwidth].assign(static_cast<std::size_t>(std::max(len, 0)), Complex{0.0, 0.0});
  }
}

Complex CollectiveOperator::element(int row, int col) const {
  const int d = col - row;
  if (std::abs(d) > kBandwidth) return {0.0, 0.0};
  return diags_[d + kBandwidth][static_cast<std::size_t>(std::min(row, col))];
}

void CollectiveOperator::set(int row, int col, Complex value) {
  const int d = col - row;
  if (std::abs(d) > kBandwidth || row < 0 || col < 0 || row >= dim() || col >= dim())
    throw DomainError("element outside the band of a collective operator");
  diags_[d + kBandwidth][static_cast<std::size_t>(std::min(row, col))] = value;
}

void CollectiveOperator::add(int row, int col, Complex value) { set(row, col, element(row, col) + value); }

CMatrix CollectiveOperator::to_dense() const {
  CMatrix m = CMatrix::Zero(dim(), dim());
  for (int r = 0; r < dim(); ++r)
    for (int c = std::max(0, r - kBandwidth); c <= std::min(dim() - 1, r + kBandwidth); ++c) m(r, c) = element(r, c);
  return m;
}

CollectiveOperator CollectiveOperator::from_dense(int n_sites, const CMatrix& dense, double tol) {
  CollectiveOperator op(n_sites);
  if (dense.rows() != op.dim() || dense.cols() != op.dim()) throw DomainError("dense matrix has the wrong size");
  for (int r = 0; r < op.dim(); ++r)
    for (int c = 0; c < op.dim(); ++c) {
      if (std::abs(r - c) <= kBandwidth)
        op.set(r, c, dense(r, c));
      else if (std::abs(dense(r, c)) > tol)
        throw DomainError("matrix is not banded with bandwidth 2");
    }
  return op;
}

CVector CollectiveOperator::apply(const CVector& x) const {
  if (x.size() != dim()) throw DomainError("collective operator/vector dimension mismatch");
  CVector y = CVector::Zero(dim());
  for (int d = -kBandwidth; d <= kBandwidth; ++d) {
    const auto& diag = diags_[d + kBandwidth];
    for (std::size_t k = 0; k < diag.size(); ++k) {
      const int row = d >= 0 ? static_cast<int>(k) : static_cast<int>(k) - d;
      y[row] += diag[k] * x[row + d];
    }
  }
  return y;
}

double CollectiveOperator::hermiticity_defect() const {
  double worst = 0.0;
  for (int r = 0; r < dim(); ++r)
    for (int c = std::max(0, r - kBandwidth); c <= std::min(dim() - 1, r + kBandwidth); ++c)
      worst = std::max(worst, std::abs(element(r, c) - std::conj(element(c, r))));
  return worst;
}

CollectiveOperator& CollectiveOperator::operator+=(const CollectiveOperator& other) {
  if (other.n_sites_ != n_sites_) throw DomainError("collective operators of different N");
  for (std::size_t d = 0; d < diags_.size(); ++d)
    for (std::size_t k = 0; k < diags_[d].size(); ++k) diags_[d][k] += other.diags_[d][k];
  return *this;
}

CollectiveOperator operator*(CollectiveOperator a, Complex s) {
  for (auto& d : a.diags_)
    for (auto& v : d) v *= s;
  return a;
}

double raise_factor(int n_sites, double m) {
  const double s = n_sites / 2.0;
  const double v = (s - m) * (s + m + 1.0);
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

CollectiveOperator collective_operator(int n_sites, CollectiveKind kind) {
  CollectiveOperator op(n_sites);
  const int dim = op.dim();
  const double s = n_sites / 2.0;
  auto sp = [&](int i) { return raise_factor(n_sites, sz_value(n_sites, i)); };  // <i+1|S+|i>
  // <i+2|S+^2|i>
  auto sp2 = [&](int i) { return sp(i) * sp(i + 1); };

  switch (kind) {
    case CollectiveKind::Sz:
      for (int i = 0; i < dim; ++i) op.set(i, i, sz_value(n_sites, i));
      break;
    case CollectiveKind::Sz2:
      for (int i = 0; i < dim; ++i) op.set(i, i, std::pow(sz_value(n_sites, i), 2));
      break;
    case CollectiveKind::S2:
      for (int i = 0; i < dim; ++i) op.set(i, i, s * (s + 1.0));
      break;
    case CollectiveKind::Sp:
      for (int i = 0; i + 1 < dim; ++i) op.set(i + 1, i, sp(i));
      break;
    case CollectiveKind::Sm:
      for (int i = 0; i + 1 < dim; ++i) op.set(i, i + 1, sp(i));
      break;
    case CollectiveKind::Sx:
      for (int i = 0; i + 1 < dim; ++i) {
        op.set(i + 1, i, 0.5 * sp(i));
        op.set(i, i + 1, 0.5 * sp(i));
      }
      break;
    case CollectiveKind::Sy:
      for (int i = 0; i + 1 < dim; ++i) {
        op.set(i + 1, i, Complex{0.0, -0.5} * sp(i));
        op.set(i, i + 1, Complex{0.0, 0.5} * sp(i));
      }
      break;
    case CollectiveKind::Sp2_plus_Sm2:
    case CollectiveKind::Sp2_minus_Sm2: {
      const double sign = kind == CollectiveKind::Sp2_plus_Sm2 ? 1.0 : -1.0;
      for (int i = 0; i + 2 < dim; ++i) {
        op.set(i + 2, i, sp2(i));
        op.set(i, i + 2, sign * sp2(i));
      }
      break;
    }
    case CollectiveKind::Sx2:
    case CollectiveKind::Sy2: {
      // S_x^2 = (S+^2 + S-^2)/4 + (S^2 - S_z^2)/2, S_y^2 flips the first sign
      const double sign = kind == CollectiveKind::Sx2 ? 1.0 : -1.0;
      for (int i = 0; i < dim; ++i) op.set(i, i, 0.5 * (s * (s + 1.0) - std::pow(sz_value(n_sites, i), 2)));
      for (int i = 0; i + 2 < dim; ++i) {
        op.set(i + 2, i, 0.25 * sign * sp2(i));
        op.set(i, i + 2, 0.25 * sign * sp2(i));
      }
      break;
    }
  }
  return op;
}

// ---------------------------------------------------------------- coefficients

CouplingSplit split_coupling(const ChainConfig& config) {
  const int n = config.n_sites;
  CouplingSplit out;
  out.alpha_plus.resize(n);
  CompensatedComplexSum acc;
  for (int j = 1; j <= n; ++j) {
    out.alpha_plus[j - 1] = std::exp(kI * (config.phi * j - config.phi0));
    acc.add(out.alpha_plus[j - 1]);
  }
  out.a_plus = acc.value() / static_cast<double>(n);
  for (int j = 0; j < n; ++j) out.alpha_plus[j] -= out.a_plus;
  // (Omega/2)(A S+ + A* S-) = Omega Re A S_x - Omega Im A S_y
  out.v_x = config.omega * out.a_plus.real();
  out.v_y = -config.omega * out.a_plus.imag();
  return out;
}

ChiCoefficients chi_coefficients(const ChainConfig& config) {
  require_open(config);
  require_coupling_phase(config);
  const int n = config.n_sites;
  const CVector f = coupling_amplitudes(config);
  CompensatedSum diag;
  CompensatedComplexSum off;
  for (int q = 1; q < n; ++q) {
    // cos x - 1 = -2 sin^2(x/2) avoids the cancellation at small q/N
    const double denom = -2.0 * std::pow(std::sin(0.5 * kPi * q / n), 2);
    const Complex fq = f[q - 1];
    diag.add(std::norm(fq) / denom);
    off.add(fq * fq / denom);
  }
  const double pref = config.omega * config.omega / (4.0 * n * config.j_se * (n - 1));
  return {pref * diag.value(), pref * off.value()};
}

std::optional<int> commensurate_index(int n_sites, double phi, double tol) {
  const double x = phi * n_sites / (2.0 * kPi);
  const double r = std::round(x);
  if (std::abs(x - r) > tol) return std::nullopt;
  const long n = std::lround(r);
  if (n % n_sites == 0) return std::nullopt;
  return static_cast<int>(n);
}

ClosedFormF closed_form_F(const ChainConfig& config) {
  const auto n = commensurate_index(config.n_sites, config.phi);
  if (!n) throw DomainError(fmt::format("phi = {} is not commensurate with 2 pi / {}", config.phi, config.n_sites));
  const int nn = config.n_sites;
  const long k = ((*n % nn) + nn) % nn;
  const double phi = 2.0 * kPi * static_cast<double>(k) / nn;
  const double cm1 = std::cos(phi) - 1.0;
  if (2 * k == nn) {
    // phi = pi
    return {-1.0, std::exp(kI * ((nn + 1) * phi - 2.0 * config.phi0))};
  }
  return {2.0 / cm1, -std::exp(kI * (phi - 2.0 * config.phi0)) / cm1};
}

bool is_canonical_offset(const ChainConfig& config, double tol) {
  const double d = config.phi0 - default_phi0(config.n_sites, config.phi);
  return std::abs(std::remainder(d, kPi)) < tol;
}

EtaGamma eta_gamma(const ChainConfig& config) {
  const auto chi = chi_coefficients(config);
  if (chi.chi_z == 0.0 || !std::isfinite(chi.chi_z)) throw DegenerateError("chi_z = 0: eta and gamma undefined");
  // eta keeps only Re chi_x; outside the offset family (N+1) phi / 2 + n pi / 2
  // the imaginary part is generally finite and dropping it would be silent.
  if (std::abs(chi.chi_x.imag()) > 1e-10 * std::abs(chi.chi_x))
    throw DegenerateError(fmt::format("Im chi_x = {} is not negligible (phi0 = {}): eta undefined", chi.chi_x.imag(), config.phi0));
  const auto split = split_coupling(config);
  return {chi.chi_x.real() / chi.chi_z, -split.v_x / (2.0 * chi.chi_z)};
}

EffectiveParams effective_params(const ChainConfig& config) {
  EffectiveParams p;
  const auto split = split_coupling(config);
  const auto chi = chi_coefficients(config);
  const auto eg = eta_gamma(config);
  p.a_plus = split.a_plus;
  p.v_x = split.v_x;
  p.v_y = split.v_y;
  p.chi_z = chi.chi_z;
  p.chi_x = chi.chi_x;
  p.eta = eg.eta;
  p.gamma = eg.gamma;
  p.f_q = coupling_amplitudes(config);
  return p;
}

// ---------------------------------------------------------------- Hamiltonians

CollectiveOperator build_h_eff_general(const ChainConfig& config) {
  require_open(config);
  const int n = config.n_sites;
  const auto split = split_coupling(config);
  const auto chi = chi_coefficients(config);
  CollectiveOperator id(n);
  for (int i = 0; i < id.dim(); ++i) id.set(i, i, 1.0);
  CollectiveOperator sp2(n);
  CollectiveOperator sm2(n);
  const auto sp2_pm = collective_operator(n, CollectiveKind::Sp2_plus_Sm2);
  for (int i = 0; i + 2 < sp2.dim(); ++i) {
    sp2.set(i + 2, i, sp2_pm.element(i + 2, i));
    sm2.set(i, i + 2, sp2_pm.element(i, i + 2));
  }
  auto h = collective_operator(n, CollectiveKind::Sx) * split.v_x + collective_operator(n, CollectiveKind::Sy) * split.v_y;
  h += (collective_operator(n, CollectiveKind::S2) + collective_operator(n, CollectiveKind::Sz2) - id * static_cast<double>(n)) *
       (-2.0 * chi.chi_z);
  h += sp2 * chi.chi_x + sm2 * std::conj(chi.chi_x);
  return h;
}

CollectiveOperator build_h_eff(const ChainConfig& config) {
  require_open(config);
  if (!is_canonical_offset(config)) return build_h_eff_general(config);
  const int n = config.n_sites;
  const auto chi = chi_coefficients(config);
  const auto eg = eta_gamma(config);
  CollectiveOperator id(n);
  for (int i = 0; i < id.dim(); ++i) id.set(i, i, 1.0);
  auto bracket = collective_operator(n, CollectiveKind::S2) + collective_operator(n, CollectiveKind::Sz2) -
                 collective_operator(n, CollectiveKind::Sx2) * eg.eta + collective_operator(n, CollectiveKind::Sy2) * eg.eta +
                 collective_operator(n, CollectiveKind::Sx) * eg.gamma - id * static_cast<double>(n);
  return bracket * (-2.0 * chi.chi_z);
}

CMatrix schrieffer_wolff_reference(const ChainConfig& config) {
  require_open(config);
  require_coupling_phase(config);
  const int n = config.n_sites;
  if (n > 12) throw DomainError("Schrieffer-Wolff reference is limited to N <= 12");
  const auto basis = build_basis(n);
  const auto h_flip = build_h_flip(config, basis);
  const auto split = split_coupling(config);
  std::vector<Complex> amp(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) amp[j] = 0.5 * config.omega * split.alpha_plus[j];
  const auto h_tilde = build_site_flip(basis, amp);

  const int dim = n + 1;
  std::vector<CVector> dicke(dim);
  std::vector<CVector> tilde_on_dicke(dim);
  for (int i = 0; i < dim; ++i) {
    dicke[i] = dicke_vector_full(n, sz_value(n, i));
    tilde_on_dicke[i] = h_tilde.apply(dicke[i]);
  }

  CMatrix h = CMatrix::Zero(dim, dim);
  for (int c = 0; c < dim; ++c) {
    const CVector flip_c = h_flip.apply(dicke[c]);
    for (int r = 0; r < dim; ++r) h(r, c) = dicke[r].dot(flip_c);
  }

  for (int mi = 1; mi < dim - 1; ++mi) {  // spin waves exist for |m| <= N/2 - 1
    const double m = sz_value(n, mi);
    for (int q = 1; q < n; ++q) {
      const CVector w = spin_wave_state(n, m, q).to_full();
      const double minus_e = -config.j_se * (std::cos(kPi * q / n) - 1.0);
      // <w|H~|d_c>; <d_r|H~|w> = conj(<w|H~|d_r>)
      CVector ket(dim);
      for (int c = 0; c < dim; ++c) ket[c] = w.dot(tilde_on_dicke[c]);
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) h(r, c) += std::conj(ket[r]) * ket[c] / minus_e;
    }
  }
  return h;
}

}  // namespace chainsq
