#include "chainsq/spinwave.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace chainsq {

namespace {

void check_sector(int n_sites, double m) {
  const double ups = n_sites / 2.0 + m;
  if (std::abs(m) > n_sites / 2.0 + 1e-12 || std::abs(ups - std::round(ups)) > 1e-12)
    throw DomainError(fmt::format("invalid spin projection m = {} for N = {}", m, n_sites));
}

void check_q(int n_sites, int q) {
  if (q < 1 || q > n_sites - 1)
    throw DomainError(fmt::format("q = {} outside 1..N-1 (q = 0 belongs to the Dicke manifold)", q));
}

RVector profile_vector(int n_sites, int q) {
  RVector p(n_sites);
  if (q == 0) {
    p.setConstant(1.0 / std::sqrt(static_cast<double>(n_sites)));
    return p;
  }
  const double norm = std::sqrt(2.0 / n_sites);
  for (int j = 1; j <= n_sites; ++j) p[j - 1] = norm * std::cos(kPi / n_sites * (j - 0.5) * q);
  return p;
}

// sum_{j=1}^{N} e^{i x j}
Complex geometric_sum(int n, double x) {
  const double half = 0.5 * x;
  const double s = std::sin(half);
  const Complex phase = std::exp(kI * (half * (n + 1)));
  if (std::abs(s) < 1e-12) {
    // x = 2 pi k + d: each term is e^{i d j}
    const double d = std::remainder(x, 2.0 * kPi);
    return static_cast<double>(n) * std::exp(kI * (0.5 * d * (n + 1)));
  }
  return phase * (std::sin(half * n) / s);
}

}  // namespace

CVector SectorState::to_full() const {
  const auto b = basis();
  CVector full = CVector::Zero(Eigen::Index{1} << n_sites);
  for (std::size_t i = 0; i < b.size(); ++i) full[static_cast<Eigen::Index>(b.state(i))] = amplitudes[static_cast<Eigen::Index>(i)];
  return full;
}

DickeState dicke_state(int n_sites, double m) {
  check_sector(n_sites, m);
  const auto b = build_basis(n_sites, m);
  DickeState d;
  d.n_sites = n_sites;
  d.m = *b.m_sector();
  d.amplitudes = CVector::Constant(static_cast<Eigen::Index>(b.size()), 1.0 / std::sqrt(static_cast<double>(b.size())));
  return d;
}

CVector dicke_vector_full(int n_sites, double m) { return dicke_state(n_sites, m).to_full(); }

double c_coefficient(int n_sites, double m) {
  const double a = n_sites / 2.0 - m;
  return std::sqrt((n_sites - 1) / (a * (a + 1.0)));
}

StandingWaveProfile standing_wave(int n_sites, int q) {
  if (n_sites < 2) throw DomainError("n_sites must be >= 2");
  check_q(n_sites, q);
  return {n_sites, q, profile_vector(n_sites, q), std::cos(kPi * q / n_sites) - 1.0};
}

SpinWaveState spin_wave_state(int n_sites, double m, int q, SpinWaveBranch branch) {
  check_sector(n_sites, m);
  check_q(n_sites, q);
  if (std::abs(m) > n_sites / 2.0 - 1.0 + 1e-12)
    throw DomainError(fmt::format("no spin wave at extremal m = {}", m));
  const RVector p = profile_vector(n_sites, q);
  const auto b = build_basis(n_sites, m);
  const double sqrt_n = std::sqrt(static_cast<double>(n_sites));

  SpinWaveState st;
  st.n_sites = n_sites;
  st.m = *b.m_sector();
  st.q = q;
  st.amplitudes.resize(static_cast<Eigen::Index>(b.size()));

  // Raise: +sqrt(N) c_{N/2,m} sum_j p_j S_j^+ |m-1>. Each basis state of the
  // m sector is reached from |m-1> by raising any of its up sites.
  // Lower: -sqrt(N) c_{N/2,-m} sum_j p_j S_j^- |m+1>, reached through down sites.
  const bool raise = branch == SpinWaveBranch::Raise;
  const double source_m = raise ? st.m - 1.0 : st.m + 1.0;
  const double source_amp = dicke_state(n_sites, source_m).amplitudes[0].real();
  const double pref = raise ? sqrt_n * c_coefficient(n_sites, st.m) : -sqrt_n * c_coefficient(n_sites, -st.m);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const std::uint64_t bits = b.state(i);
    double acc = 0.0;
    for (int j = 1; j <= n_sites; ++j)
      if (site_up(bits, j) == raise) acc += p[j - 1];
    st.amplitudes[static_cast<Eigen::Index>(i)] = pref * source_amp * acc;
  }
  return st;
}

RMatrix one_magnon_matrix(int n_sites, Boundary boundary) {
  if (n_sites < 2) throw DomainError("n_sites must be >= 2");
  RMatrix h = RMatrix::Zero(n_sites, n_sites);
  for (int l = 0; l + 1 < n_sites; ++l) {
    h(l, l + 1) = h(l + 1, l) = 0.5;
    h(l, l) -= 0.5;
    h(l + 1, l + 1) -= 0.5;
  }
  if (boundary == Boundary::Periodic && n_sites > 2) {
    h(0, n_sites - 1) = h(n_sites - 1, 0) = 0.5;
    h(0, 0) -= 0.5;
    h(n_sites - 1, n_sites - 1) -= 0.5;
  }
  return h;
}

std::vector<OneMagnonMode> one_magnon_eigensystem(int n_sites) {
  const RMatrix h = one_magnon_matrix(n_sites, Boundary::Open);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
  std::vector<OneMagnonMode> modes;
  std::vector<bool> taken(static_cast<std::size_t>(n_sites), false);
  for (int k = 0; k < n_sites; ++k) {
    const RVector v = es.eigenvectors().col(k);
    int best_q = -1;
    double best = -1.0;
    for (int q = 0; q < n_sites; ++q) {
      if (taken[q]) continue;
      const double ov = std::abs(profile_vector(n_sites, q).dot(v));
      if (ov > best + 1e-12) {  // strict improvement keeps the lower q on ties
        best = ov;
        best_q = q;
      }
    }
    taken[best_q] = true;
    const RVector analytic = profile_vector(n_sites, best_q);
    OneMagnonMode mode;
    mode.q = best_q;
    mode.dicke_manifold = best_q == 0;
    mode.overlap = best;
    mode.analytic = {n_sites, best_q, analytic, std::cos(kPi * best_q / n_sites) - 1.0};
    const double sign = analytic.dot(v) < 0.0 ? -1.0 : 1.0;
    mode.numeric = {n_sites, best_q, sign * v, es.eigenvalues()[k]};
    modes.push_back(std::move(mode));
  }
  std::sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) { return a.q < b.q; });
  return modes;
}

CVector plane_wave_profile(int n_sites, int q) {
  CVector p(n_sites);
  for (int j = 1; j <= n_sites; ++j)
    p[j - 1] = std::exp(kI * (2.0 * kPi * q * j / n_sites)) / std::sqrt(static_cast<double>(n_sites));
  return p;
}

CVector coupling_amplitudes(const ChainConfig& config) {
  if (is_trivial_phase(config.phi)) throw DomainError("coupling amplitudes undefined for a trivial phase");
  const int n = config.n_sites;
  CVector alpha(n);
  for (int j = 1; j <= n; ++j) alpha[j - 1] = std::exp(kI * (config.phi * j - config.phi0));
  CVector f(n - 1);
  for (int q = 1; q < n; ++q) f[q - 1] = profile_vector(n, q).cast<Complex>().dot(alpha);
  return f;
}

CVector coupling_amplitudes_closed_form(const ChainConfig& config) {
  if (is_trivial_phase(config.phi)) throw DomainError("coupling amplitudes undefined for a trivial phase");
  // cos(theta (j - 1/2)) e^{i phi j} = (1/2)[e^{-i theta/2} e^{i(phi+theta) j} + e^{i theta/2} e^{i(phi-theta) j}]
  const int n = config.n_sites;
  const double norm = std::sqrt(2.0 / n);
  const Complex global = std::exp(-kI * config.phi0);
  CVector f(n - 1);
  for (int q = 1; q < n; ++q) {
    const double theta = kPi * q / n;
    const Complex s = 0.5 * (std::exp(-kI * (0.5 * theta)) * geometric_sum(n, config.phi + theta) +
                             std::exp(kI * (0.5 * theta)) * geometric_sum(n, config.phi - theta));
    f[q - 1] = norm * global * s;
  }
  return f;
}

}  // namespace chainsq
