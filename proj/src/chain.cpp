#include "chainsq/chain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "chainsq/kernels.hpp"

namespace chainsq {

namespace {

constexpr double kTrivialPhaseTol = 1e-12;

ChainConfig make_impl(int n_sites, double j_se, double omega, double phi, std::optional<double> phi0,
                      Boundary boundary) {
  ChainConfig c;
  c.n_sites = n_sites;
  c.j_se = j_se;
  c.omega = omega;
  c.phi = phi;
  c.phi0 = phi0.value_or(default_phi0(n_sites, phi));
  c.boundary = boundary;
  return c;
}

void check_common(const ChainConfig& c) {
  if (!std::isfinite(c.j_se) || c.j_se == 0.0) throw DomainError("j_se must be finite and nonzero");
  if (!std::isfinite(c.omega) || c.omega < 0.0) throw DomainError("omega must be finite and >= 0");
  if (!std::isfinite(c.phi) || !std::isfinite(c.phi0)) throw DomainError("phases must be finite");
  if (c.omega > 0.0 && is_trivial_phase(c.phi))
    throw DomainError(fmt::format("phi = {} is a trivial phase (multiple of 2 pi): no coupling", c.phi));
}

// Builds a CSR operator row by row. `row_fn(r, out)` appends the entries of
// row r; rows are generated in parallel and concatenated in order.
template <class RowFn>
SparseOperator build_by_rows(std::size_t dim, bool hermitian, RowFn&& row_fn) {
  std::vector<std::vector<Triplet>> rows(dim);
  const auto n = static_cast<std::ptrdiff_t>(dim);
#pragma omp parallel for schedule(dynamic, 256) if (dim >= kernels::kParallelThreshold)
  for (std::ptrdiff_t r = 0; r < n; ++r) row_fn(static_cast<std::size_t>(r), rows[r]);
  std::size_t total = 0;
  for (const auto& row : rows) total += row.size();
  std::vector<Triplet> all;
  all.reserve(total);
  for (auto& row : rows) all.insert(all.end(), row.begin(), row.end());
  return SparseOperator(dim, std::move(all), hermitian);
}

void require_full(const ProductBasis& basis, const char* what) {
  if (!basis.is_full()) throw DomainError(fmt::format("{} requires the full (sector-unrestricted) basis", what));
}

}  // namespace

double default_phi0(int n_sites, double phi) { return phi * (n_sites + 1) / 2.0; }

bool is_trivial_phase(double phi) {
  const double r = std::remainder(phi, 2.0 * kPi);
  return std::abs(r) < kTrivialPhaseTol;
}

ChainConfig ChainConfig::make(int n_sites, double j_se, double omega, double phi, std::optional<double> phi0,
                              Boundary boundary) {
  ChainConfig c = make_impl(n_sites, j_se, omega, phi, phi0, boundary);
  c.validate();
  return c;
}

ChainConfig ChainConfig::make_unchecked(int n_sites, double j_se, double omega, double phi,
                                        std::optional<double> phi0, Boundary boundary) {
  if (n_sites < 2 || n_sites > kMaxSites) throw DomainError("n_sites out of range");
  ChainConfig c = make_impl(n_sites, j_se, omega, phi, phi0, boundary);
  check_common(c);
  return c;
}

void ChainConfig::validate() const {
  if (n_sites < 4 || n_sites % 2 != 0)
    throw DomainError(fmt::format("n_sites must be even and >= 4 (got {})", n_sites));
  if (n_sites > kMaxSites) throw DomainError(fmt::format("n_sites must be <= {}", kMaxSites));
  check_common(*this);
}

double ChainConfig::lowest_gap() const { return std::abs(j_se * (std::cos(kPi / n_sites) - 1.0)); }

// ---------------------------------------------------------------- basis

ProductBasis ProductBasis::build(int n_sites, std::optional<double> m_sector) {
  if (n_sites < 1 || n_sites > 30) throw DomainError(fmt::format("n_sites = {} outside [1, 30]", n_sites));
  ProductBasis b;
  b.n_sites_ = n_sites;
  const std::uint64_t dim = std::uint64_t{1} << n_sites;
  if (!m_sector) {
    b.states_.resize(dim);
    for (std::uint64_t s = 0; s < dim; ++s) b.states_[s] = s;
    return b;
  }
  const double m = *m_sector;
  const double ups = n_sites / 2.0 + m;
  if (!std::isfinite(m) || std::abs(m) > n_sites / 2.0 + 1e-12 || std::abs(ups - std::round(ups)) > 1e-12)
    throw DomainError(fmt::format("invalid magnetization sector m = {} for N = {}", m, n_sites));
  const int n_up = static_cast<int>(std::lround(ups));
  b.m_sector_ = n_up - n_sites / 2.0;
  for (std::uint64_t s = 0; s < dim; ++s)
    if (std::popcount(s) == n_up) b.states_.push_back(s);
  return b;
}

std::size_t ProductBasis::index_of(std::uint64_t bits) const {
  if (is_full()) return bits < states_.size() ? static_cast<std::size_t>(bits) : states_.size();
  auto it = std::lower_bound(states_.begin(), states_.end(), bits);
  if (it == states_.end() || *it != bits) return states_.size();
  return static_cast<std::size_t>(it - states_.begin());
}

ProductBasis build_basis(int n_sites, std::optional<double> m_sector) {
  if (n_sites < 2) throw DomainError("n_sites must be >= 2");
  return ProductBasis::build(n_sites, m_sector);
}

// ---------------------------------------------------------------- sparse operator

SparseOperator::SparseOperator(std::size_t dim, std::vector<Triplet> entries, bool hermitian)
    : dim_(dim), hermitian_(hermitian) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  row_ptr_.assign(dim + 1, 0);
  col_idx_.reserve(entries.size());
  values_.reserve(entries.size());
  std::size_t i = 0;
  for (std::size_t r = 0; r < dim; ++r) {
    while (i < entries.size() && entries[i].row == r) {
      const std::size_t c = entries[i].col;
      if (c >= dim) throw DomainError("triplet column out of range");
      Complex v{0.0, 0.0};
      while (i < entries.size() && entries[i].row == r && entries[i].col == c) v += entries[i++].value;
      if (v != Complex{0.0, 0.0}) {
        col_idx_.push_back(c);
        values_.push_back(v);
      }
    }
    row_ptr_[r + 1] = values_.size();
  }
  if (i != entries.size()) throw DomainError("triplet row out of range");
}

CVector SparseOperator::apply(const CVector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw DomainError("operator/vector dimension mismatch");
  CVector y(x.size());
  apply(std::span<const Complex>(x.data(), x.size()), std::span<Complex>(y.data(), y.size()));
  return y;
}

void SparseOperator::apply(std::span<const Complex> x, std::span<Complex> y) const {
  kernels::csr_matvec_omp({dim_, row_ptr_, col_idx_, values_}, x, y);
}

Complex SparseOperator::element(std::size_t row, std::size_t col) const {
  const auto b = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  const auto e = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  auto it = std::lower_bound(b, e, col);
  if (it == e || *it != col) return {0.0, 0.0};
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

std::vector<Triplet> SparseOperator::triplets() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  for (std::size_t r = 0; r < dim_; ++r)
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) t.push_back({r, col_idx_[k], values_[k]});
  return t;
}

CMatrix SparseOperator::to_dense() const {
  CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
  for (const auto& t : triplets()) m(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) = t.value;
  return m;
}

double SparseOperator::frobenius_norm() const {
  double s = 0.0;
  for (const auto& v : values_) s += std::norm(v);
  return std::sqrt(s);
}

double SparseOperator::hermiticity_defect() const {
  double worst = 0.0;
  for (const auto& t : triplets()) worst = std::max(worst, std::abs(t.value - std::conj(element(t.col, t.row))));
  return worst;
}

SparseOperator SparseOperator::scaled(Complex s) const {
  auto t = triplets();
  for (auto& e : t) e.value *= s;
  return SparseOperator(dim_, std::move(t), hermitian_ && s.imag() == 0.0);
}

SparseOperator SparseOperator::adjoint() const {
  auto t = triplets();
  for (auto& e : t) {
    std::swap(e.row, e.col);
    e.value = std::conj(e.value);
  }
  return SparseOperator(dim_, std::move(t), hermitian_);
}

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  if (a.dim() != b.dim()) throw DomainError("operator dimension mismatch");
  auto t = a.triplets();
  auto tb = b.triplets();
  t.insert(t.end(), tb.begin(), tb.end());
  return SparseOperator(a.dim(), std::move(t), a.hermitian() && b.hermitian());
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) { return a + b.scaled(-1.0); }

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
  if (a.dim() != b.dim()) throw DomainError("operator dimension mismatch");
  std::vector<Triplet> out;
  std::unordered_map<std::size_t, Complex> acc;
  for (std::size_t r = 0; r < a.dim(); ++r) {
    acc.clear();
    for (std::size_t k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
      const std::size_t mid = a.col_idx()[k];
      for (std::size_t l = b.row_ptr()[mid]; l < b.row_ptr()[mid + 1]; ++l)
        acc[b.col_idx()[l]] += a.values()[k] * b.values()[l];
    }
    for (const auto& [c, v] : acc) out.push_back({r, c, v});
  }
  return SparseOperator(a.dim(), std::move(out), false);
}

SparseOperator commutator(const SparseOperator& a, const SparseOperator& b) { return a * b - b * a; }

// ---------------------------------------------------------------- Hamiltonians

SparseOperator build_h_se(const ChainConfig& config, const ProductBasis& basis) {
  if (basis.n_sites() != config.n_sites) throw DomainError("basis built for a different number of sites");
  const int n = config.n_sites;
  const double j = config.j_se;
  std::vector<std::pair<int, int>> bonds;
  for (int s = 0; s + 1 < n; ++s) bonds.emplace_back(s, s + 1);
  if (config.boundary == Boundary::Periodic && n > 2) bonds.emplace_back(n - 1, 0);

  return build_by_rows(basis.size(), true, [&](std::size_t r, std::vector<Triplet>& out) {
    const std::uint64_t bits = basis.state(r);
    double diag = 0.0;
    for (const auto& [a, b] : bonds) {
      const bool ua = ((bits >> a) & 1U) != 0;
      const bool ub = ((bits >> b) & 1U) != 0;
      if (ua == ub) continue;  // S.S - 1/4 vanishes on parallel pairs
      diag -= 0.5 * j;
      const std::uint64_t flipped = bits ^ ((std::uint64_t{1} << a) | (std::uint64_t{1} << b));
      out.push_back({r, basis.index_of(flipped), Complex{0.5 * j, 0.0}});
    }
    if (diag != 0.0) out.push_back({r, r, Complex{diag, 0.0}});
  });
}

SparseOperator build_site_flip(const ProductBasis& basis, std::span<const Complex> plus_amplitudes) {
  require_full(basis, "spin-flip coupling");
  const int n = basis.n_sites();
  if (static_cast<int>(plus_amplitudes.size()) != n) throw DomainError("one amplitude per site required");
  return build_by_rows(basis.size(), true, [&](std::size_t r, std::vector<Triplet>& out) {
    const std::uint64_t bits = basis.state(r);
    for (int s = 0; s < n; ++s) {
      const std::uint64_t mask = std::uint64_t{1} << s;
      if (bits & mask) {
        // row has site up: reached by S^+ from the state with the site down
        out.push_back({r, basis.index_of(bits ^ mask), plus_amplitudes[s]});
      } else {
        out.push_back({r, basis.index_of(bits ^ mask), std::conj(plus_amplitudes[s])});
      }
    }
  });
}

SparseOperator build_h_flip(const ChainConfig& config, const ProductBasis& basis) {
  require_full(basis, "build_h_flip");
  if (basis.n_sites() != config.n_sites) throw DomainError("basis built for a different number of sites");
  std::vector<Complex> amp(static_cast<std::size_t>(config.n_sites));
  for (int j = 1; j <= config.n_sites; ++j)
    amp[j - 1] = 0.5 * config.omega * std::exp(kI * (config.phi * j - config.phi0));
  return build_site_flip(basis, amp);
}

SparseOperator build_collective(const ProductBasis& basis, Axis axis) {
  const int n = basis.n_sites();
  if (axis == Axis::Z) {
    return build_by_rows(basis.size(), true, [&](std::size_t r, std::vector<Triplet>& out) {
      const int ups = std::popcount(basis.state(r));
      const double sz = ups - n / 2.0;
      if (sz != 0.0) out.push_back({r, r, Complex{sz, 0.0}});
    });
  }
  require_full(basis, "collective S_x, S_y, S_+-");
  Complex c_raise;  // coefficient of S^+ contributions
  Complex c_lower;
  bool herm = true;
  switch (axis) {
    case Axis::X: c_raise = 0.5; c_lower = 0.5; break;
    case Axis::Y: c_raise = Complex{0.0, -0.5}; c_lower = Complex{0.0, 0.5}; break;
    case Axis::Plus: c_raise = 1.0; c_lower = 0.0; herm = false; break;
    case Axis::Minus: c_raise = 0.0; c_lower = 1.0; herm = false; break;
    default: break;
  }
  return build_by_rows(basis.size(), herm, [&](std::size_t r, std::vector<Triplet>& out) {
    const std::uint64_t bits = basis.state(r);
    for (int s = 0; s < n; ++s) {
      const std::uint64_t mask = std::uint64_t{1} << s;
      const Complex c = (bits & mask) ? c_raise : c_lower;
      if (c != Complex{0.0, 0.0}) out.push_back({r, basis.index_of(bits ^ mask), c});
    }
  });
}

SparseOperator build_total_spin_squared(const ProductBasis& basis) {
  // S^2 = S_- S_+ + S_z^2 + S_z
  const auto sp = build_collective(basis, Axis::Plus);
  const auto sm = build_collective(basis, Axis::Minus);
  const auto sz = build_collective(basis, Axis::Z);
  auto s2 = sm * sp + sz * sz + sz;
  return SparseOperator(s2.dim(), s2.triplets(), true);
}

}  // namespace chainsq
