#pragma once

// Hand-rolled generators for property tests. Seeds are fixed so failures
// reproduce; each property prints its case index on failure via CAPTURE.

#include <random>
#include <string>
#include <vector>

#include "chainsq/chain.hpp"

namespace gen {

using chainsq::CMatrix;
using chainsq::Complex;
using chainsq::CVector;

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(engine); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine); }
  Complex complex_normal() { return {normal(), normal()}; }

  int even_sites(int lo, int hi) { return 2 * integer((lo + 1) / 2, hi / 2); }

  // Phase in (0, 2 pi) kept away from the trivial points.
  double phase() {
    for (;;) {
      const double p = uniform(0.0, 2.0 * chainsq::kPi);
      if (p > 1e-3 && p < 2.0 * chainsq::kPi - 1e-3) return p;
    }
  }

  CVector unit_vector(std::size_t dim) {
    CVector v(static_cast<Eigen::Index>(dim));
    for (auto& x : v) x = complex_normal();
    return v / v.norm();
  }

  // Random Hermitian sparse operator with roughly `fill` entries per row.
  chainsq::SparseOperator hermitian_sparse(std::size_t dim, int fill) {
    std::vector<chainsq::Triplet> t;
    for (std::size_t r = 0; r < dim; ++r) {
      t.push_back({r, r, Complex(normal(), 0.0)});
      for (int k = 0; k < fill; ++k) {
        const auto c = static_cast<std::size_t>(integer(0, static_cast<int>(dim) - 1));
        if (c == r) continue;
        const Complex v = complex_normal();
        t.push_back({r, c, v});
        t.push_back({c, r, std::conj(v)});
      }
    }
    return chainsq::SparseOperator(dim, std::move(t), true);
  }

  std::string text(int max_len) {
    static const std::string alphabet = "abcXYZ019 ,\"\r\n;[]=#-_.";
    std::string s;
    const int len = integer(0, max_len);
    for (int i = 0; i < len; ++i) s += alphabet[static_cast<std::size_t>(integer(0, static_cast<int>(alphabet.size()) - 1))];
    return s;
  }
};

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace gen
