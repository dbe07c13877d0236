#pragma once

// Analytic layer of the open chain: Dicke states, standing-wave one-magnon
// profiles and energies, spin-wave states in every magnetization sector and
// the coupling amplitudes f_q between the Dicke manifold and the spin waves.

#include <vector>

#include "chainsq/chain.hpp"

namespace chainsq {

// Sector-resolved state: amplitudes over build_basis(n_sites, m).
struct SectorState {
  int n_sites = 0;
  double m = 0.0;
  CVector amplitudes;

  ProductBasis basis() const { return build_basis(n_sites, m); }
  // Embeds into the full 2^N basis.
  CVector to_full() const;
};

struct DickeState : SectorState {};

struct SpinWaveState : SectorState {
  int q = 0;
};

struct StandingWaveProfile {
  int n_sites = 0;
  int q = 0;
  RVector p;           // p_j, j = 1..N stored at index j - 1
  double energy = 0.0;  // E_q / J_SE
};

enum class SpinWaveBranch { Raise, Lower };

// |m> = symmetric superposition over the m sector. Throws DomainError for
// |m| > N/2 or non-integer N/2 + m.
DickeState dicke_state(int n_sites, double m);

// Dicke state |m> directly in the 2^N basis.
CVector dicke_vector_full(int n_sites, double m);

// sqrt((N - 1) / ((N/2 - m)(N/2 - m + 1)));  pass -m for c_{N/2,-m}.
double c_coefficient(int n_sites, double m);

// p_j = sqrt(2/N) cos[(pi/N)(j - 1/2) q], energy cos(pi q/N) - 1. 1 <= q <= N-1.
StandingWaveProfile standing_wave(int n_sites, int q);

// Spin-wave state |m, q> built from the Dicke state |m - 1> (Raise) or
// |m + 1> (Lower). |m| <= N/2 - 1.
SpinWaveState spin_wave_state(int n_sites, double m, int q, SpinWaveBranch branch = SpinWaveBranch::Raise);

// The N x N one-magnon Hamiltonian (in units of J_SE) on the coordinate
// states S_l^+ |all down>. Open chains give the tridiagonal boundary-corrected
// matrix; periodic chains add the wrap hopping.
RMatrix one_magnon_matrix(int n_sites, Boundary boundary = Boundary::Open);

struct OneMagnonMode {
  int q = 0;                    // analytic label paired to this eigenvector
  bool dicke_manifold = false;  // true for the uniform q = 0 mode
  StandingWaveProfile numeric;  // eigenvector, sign aligned with the analytic profile
  StandingWaveProfile analytic;
  double overlap = 0.0;         // |<numeric|analytic>|
};

// Diagonalizes the open-chain one-magnon matrix and pairs every eigenvector
// with its analytic q by largest overlap (ties go to the lower q). Sorted by q.
std::vector<OneMagnonMode> one_magnon_eigensystem(int n_sites);

// Plane-wave profile N^{-1/2} e^{i 2 pi q j / N} of the periodic chain.
CVector plane_wave_profile(int n_sites, int q);

// f_q^+ = sum_j p_j^{(q)} e^{i(phi j - phi0)}, q = 1..N-1 at index q - 1.
CVector coupling_amplitudes(const ChainConfig& config);

// Same quantity from the geometric-series closed form.
CVector coupling_amplitudes_closed_form(const ChainConfig& config);

}  // namespace chainsq
