#pragma once

// Second-order (Schrieffer-Wolff) effective model of the weakly coupled open
// chain, expressed with collective spin operators on the (N+1)-dimensional
// Dicke manifold.

#include <array>
#include <vector>

#include "chainsq/chain.hpp"

namespace chainsq {

// Hermitian or general operator on the Dicke basis |m>, m = -N/2..N/2
// (row/column index m + N/2). Only the diagonals |row - col| <= 2 are stored.
class CollectiveOperator {
 public:
  static constexpr int kBandwidth = 2;

  CollectiveOperator() = default;
  explicit CollectiveOperator(int n_sites);

  int n_sites() const { return n_sites_; }
  int dim() const { return n_sites_ + 1; }

  Complex element(int row, int col) const;
  void set(int row, int col, Complex value);
  void add(int row, int col, Complex value);

  CMatrix to_dense() const;
  // Throws DomainError if `dense` has entries outside the band above `tol`.
  static CollectiveOperator from_dense(int n_sites, const CMatrix& dense, double tol = 1e-12);

  CVector apply(const CVector& x) const;
  double hermiticity_defect() const;

  CollectiveOperator& operator+=(const CollectiveOperator& other);
  friend CollectiveOperator operator+(CollectiveOperator a, const CollectiveOperator& b) { return a += b; }
  friend CollectiveOperator operator-(CollectiveOperator a, const CollectiveOperator& b) { return a += b * -1.0; }
  friend CollectiveOperator operator*(CollectiveOperator a, Complex s);
  friend CollectiveOperator operator*(Complex s, CollectiveOperator a) { return a * s; }

 private:
  int n_sites_ = 0;
  // diags_[offset + 2][min(row, col)], offset = col - row
  std::array<std::vector<Complex>, 5> diags_;
};

enum class CollectiveKind { Sz, Sp, Sm, Sx, Sy, Sz2, S2, Sx2, Sy2, Sp2_plus_Sm2, Sp2_minus_Sm2 };

CollectiveOperator collective_operator(int n_sites, CollectiveKind kind);

// Ladder factor A_+^{S,m} = sqrt((S - m)(S + m + 1)) for S = N/2.
double raise_factor(int n_sites, double m);

struct CouplingSplit {
  CVector alpha_plus;  // alpha_j^+ = e^{i(phi j - phi0)} - A^+, j = 1..N
  Complex a_plus;
  double v_x = 0.0;  // H_flip = H~ + v_x S_x + v_y S_y
  double v_y = 0.0;
};

CouplingSplit split_coupling(const ChainConfig& config);

struct ChiCoefficients {
  double chi_z = 0.0;
  Complex chi_x;
};

// chi_z = Omega^2/(4 N J (N-1)) sum_q |f_q|^2 / (cos(pi q/N) - 1),
// chi_x = Omega^2/(4 N J (N-1)) sum_q (f_q^+)^2 / (cos(pi q/N) - 1),
// both accumulated with compensated summation.
ChiCoefficients chi_coefficients(const ChainConfig& config);

struct ClosedFormF {
  double f_diag = 0.0;
  Complex f_off;
};

// Returns the commensurate index n if phi = 2 pi n / N (n not a multiple of N).
std::optional<int> commensurate_index(int n_sites, double phi, double tol = 1e-9);

// Closed forms of the dimensionless sums (chi = Omega^2/(4 J (N-1)) F) for
// commensurate phases. Throws DomainError otherwise.
ClosedFormF closed_form_F(const ChainConfig& config);

struct EtaGamma {
  double eta = 0.0;
  double gamma = 0.0;
};

// eta = Re chi_x / chi_z and gamma = -v_x / (2 chi_z), the coefficients of
//   H_eff = -2 chi_z (S^2 + S_z^2 - eta S_x^2 + eta S_y^2 + gamma S_x - N).
// A non-negligible Im chi_x (phi0 outside (N+1) phi / 2 + n pi / 2) is an error.
EtaGamma eta_gamma(const ChainConfig& config);

struct EffectiveParams {
  Complex a_plus;
  double v_x = 0.0;
  double v_y = 0.0;
  double chi_z = 0.0;
  Complex chi_x;
  double eta = 0.0;
  double gamma = 0.0;
  CVector f_q;
};

EffectiveParams effective_params(const ChainConfig& config);

// True when phi0 = (N+1) phi / 2 + n pi (mod 2 pi) for some integer n, i.e.
// Im chi_x = 0 and v_y = 0.
bool is_canonical_offset(const ChainConfig& config, double tol = 1e-9);

// First- plus second-order effective Hamiltonian on the Dicke manifold.
// Canonical offsets use the eta/gamma form; others the general form
//   v_x S_x + v_y S_y - 2 chi_z (S^2 + S_z^2 - N) + chi_x S_+^2 + conj(chi_x) S_-^2.
CollectiveOperator build_h_eff(const ChainConfig& config);
CollectiveOperator build_h_eff_general(const ChainConfig& config);

// Independent reference: projects H_flip onto the Dicke states and sums
// <m'|H~|m'',q><m'',q|H~|m>/(-E_q) over explicitly constructed spin-wave
// states in the 2^N space. Open chains, N <= 12.
CMatrix schrieffer_wolff_reference(const ChainConfig& config);

}  // namespace chainsq
