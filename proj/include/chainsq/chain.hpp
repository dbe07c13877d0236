#pragma once

// Many-body basis and microscopic operators of the spin-1/2 chain:
// the Heisenberg exchange term, the position-dependent spin-flip coupling
// and the collective spin components on the 2^N product space.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "chainsq/types.hpp"

namespace chainsq {

enum class Boundary { Open, Periodic };

// Collective (Dicke-manifold) computations only; the product basis stops at 30.
inline constexpr int kMaxSites = 10000;

struct ChainConfig {
  int n_sites = 8;
  double j_se = 1.0;
  double omega = 0.0;
  double phi = kPi;
  double phi0 = 0.0;
  Boundary boundary = Boundary::Open;

  // Validated constructor: N even and >= 4, phi not trivial when omega > 0.
  // phi0 defaults to phi (N + 1) / 2.
  static ChainConfig make(int n_sites, double j_se, double omega, double phi,
                          std::optional<double> phi0 = std::nullopt,
                          Boundary boundary = Boundary::Open);

  // Skips the N >= 4 / evenness rule. Unit tests only (N = 2, odd N).
  static ChainConfig make_unchecked(int n_sites, double j_se, double omega, double phi,
                                    std::optional<double> phi0 = std::nullopt,
                                    Boundary boundary = Boundary::Open);

  void validate() const;
  double default_phi0() const { return phi * (n_sites + 1) / 2.0; }
  // |E_{q=1}| for the open chain, J |cos(pi/N) - 1|.
  double lowest_gap() const;

  bool operator==(const ChainConfig&) const = default;
};

double default_phi0(int n_sites, double phi);
bool is_trivial_phase(double phi);

class ProductBasis {
 public:
  // Full 2^N basis, or the m sector if `m_sector` is set. Throws DomainError
  // for invalid sectors.
  static ProductBasis build(int n_sites, std::optional<double> m_sector = std::nullopt);

  int n_sites() const { return n_sites_; }
  std::size_t size() const { return states_.size(); }
  bool is_full() const { return !m_sector_.has_value(); }
  std::optional<double> m_sector() const { return m_sector_; }
  std::span<const std::uint64_t> states() const { return states_; }
  std::uint64_t state(std::size_t i) const { return states_[i]; }
  // Index of a bit pattern, or size() when absent.
  std::size_t index_of(std::uint64_t bits) const;

 private:
  int n_sites_ = 0;
  std::optional<double> m_sector_;
  std::vector<std::uint64_t> states_;
};

ProductBasis build_basis(int n_sites, std::optional<double> m_sector = std::nullopt);

struct Triplet {
  std::size_t row;
  std::size_t col;
  Complex value;
};

// Compressed-row complex operator. Immutable after construction.
class SparseOperator {
 public:
  SparseOperator() = default;
  SparseOperator(std::size_t dim, std::vector<Triplet> entries, bool hermitian);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return values_.size(); }
  bool hermitian() const { return hermitian_; }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_idx() const { return col_idx_; }
  std::span<const Complex> values() const { return values_; }

  // y = A x using the OpenMP kernel.
  CVector apply(const CVector& x) const;
  void apply(std::span<const Complex> x, std::span<Complex> y) const;

  Complex element(std::size_t row, std::size_t col) const;
  std::vector<Triplet> triplets() const;
  CMatrix to_dense() const;
  double frobenius_norm() const;
  // max |A_ij - conj(A_ji)|
  double hermiticity_defect() const;

  SparseOperator scaled(Complex s) const;
  friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b);
  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);
  SparseOperator adjoint() const;

 private:
  std::size_t dim_ = 0;
  bool hermitian_ = false;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<Complex> values_;
};

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b);

// J sum_bonds (S_j . S_{j+1} - 1/4); open chains have N - 1 bonds, periodic N.
SparseOperator build_h_se(const ChainConfig& config, const ProductBasis& basis);

// (Omega / 2) sum_{j=1..N} (e^{i(phi j - phi0)} S_j^+ + h.c.). Full basis only.
SparseOperator build_h_flip(const ChainConfig& config, const ProductBasis& basis);

// sum_j (a_j S_j^+ + h.c.) with arbitrary per-site amplitudes a_j.
SparseOperator build_site_flip(const ProductBasis& basis, std::span<const Complex> plus_amplitudes);

enum class Axis { X, Y, Z, Plus, Minus };

SparseOperator build_collective(const ProductBasis& basis, Axis axis);
// S_x^2 + S_y^2 + S_z^2
SparseOperator build_total_spin_squared(const ProductBasis& basis);

// Bit helpers. Site j (1-based) lives in bit j - 1; a set bit means spin up.
inline bool site_up(std::uint64_t bits, int site_1based) {
  return ((bits >> (site_1based - 1)) & 1U) != 0;
}

}  // namespace chainsq
