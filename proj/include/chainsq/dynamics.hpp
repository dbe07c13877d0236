#pragma once

// Time evolution on the full 2^N space or the Dicke manifold, and the spin
// squeezing parameter along trajectories.

#include <optional>
#include <array>
#include <memory>
#include <vector>

#include "chainsq/effective.hpp"
#include "chainsq/krylov.hpp"

namespace chainsq {

enum class BasisTag { Full, Dicke };

struct StateVector {
  BasisTag tag = BasisTag::Dicke;
  int n_sites = 0;
  CVector amplitudes;
};

// Spin coherent state |theta, varphi>: every spin along (theta, varphi),
// cos(theta/2)|up> + e^{i varphi} sin(theta/2)|down>. In the Dicke basis
//   a_m = sqrt(binom(N, N/2+m)) cos(theta/2)^{N/2+m} sin(theta/2)^{N/2-m} e^{i(N/2-m) varphi}.
StateVector coherent_state(int n_sites, double theta, double varphi, BasisTag tag);

// Projects a full-basis state onto the Dicke states.
CVector project_to_dicke(int n_sites, const CVector& full);

// Abstract unitary propagator exp(-i H dt).
class Propagator {
 public:
  virtual ~Propagator() = default;
  virtual std::size_t dim() const = 0;
  virtual void advance(CVector& psi, double dt) = 0;
  virtual double energy(const CVector& psi) const = 0;
  // Shortest oscillation period of low-order moments, when cheaply known.
  virtual std::optional<double> moment_period() const { return std::nullopt; }
};

// Exact propagation by diagonalizing a dense Hermitian matrix. Used for the
// (N+1)-dimensional Dicke problem and as a test oracle.
class EigenPropagator final : public Propagator {
 public:
  explicit EigenPropagator(const CMatrix& h);
  std::size_t dim() const override { return static_cast<std::size_t>(values_.size()); }
  void advance(CVector& psi, double dt) override;
  double energy(const CVector& psi) const override;
  const RVector& eigenvalues() const { return values_; }
  // pi over the mean level spacing: second moments beat at about twice it.
  std::optional<double> moment_period() const override;

 private:
  RVector values_;
  CMatrix vectors_;
};

class SparseKrylovPropagator final : public Propagator {
 public:
  explicit SparseKrylovPropagator(const SparseOperator& h, KrylovOptions options = {});
  std::size_t dim() const override { return krylov_.dim(); }
  void advance(CVector& psi, double dt) override { krylov_.advance(psi, dt); }
  double energy(const CVector& psi) const override;
  const KrylovStats& stats() const { return krylov_.stats(); }

 private:
  SparseOperator h_;
  KrylovPropagator krylov_;
};

std::unique_ptr<Propagator> make_dicke_propagator(const CollectiveOperator& h);
std::unique_ptr<Propagator> make_full_propagator(const SparseOperator& h, KrylovOptions options = {});

// States at each of `times` (ascending, >= 0), starting from `psi0` at t = 0.
std::vector<CVector> evolve(Propagator& propagator, const CVector& psi0, const std::vector<double>& times);

// Collective S_x, S_y, S_z on either basis.
class SpinObservables {
 public:
  static SpinObservables dicke(int n_sites);
  static SpinObservables full(int n_sites);

  int n_sites() const { return n_sites_; }
  BasisTag tag() const { return tag_; }
  std::size_t dim() const;
  std::array<CVector, 3> apply(const CVector& psi) const;

 private:
  int n_sites_ = 0;
  BasisTag tag_ = BasisTag::Dicke;
  std::array<CollectiveOperator, 3> dicke_;
  std::array<SparseOperator, 3> full_;
};

class MeanSpinCollapse : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SqueezingSample {
  double xi2 = 0.0;
  Eigen::Vector3d mean_spin = Eigen::Vector3d::Zero();
  double var_min = 0.0;
};

// Orthonormal transverse frame (e1, e2) around the unit vector n.
std::array<Eigen::Vector3d, 2> transverse_frame(const Eigen::Vector3d& n);

// xi^2 = N var_min / |<S>|^2 with var_min the smaller eigenvalue of the
// symmetrized transverse covariance. Throws MeanSpinCollapse when
// |<S>| < 1e-8 N.
SqueezingSample squeezing_parameter(const CVector& psi, const SpinObservables& ops);

struct SqueezingTrace {
  std::vector<double> times;
  std::vector<double> xi2;  // NaN where collapsed
  std::vector<Eigen::Vector3d> mean_spin;
  std::vector<double> var_min;
  std::vector<bool> collapsed;
  std::vector<double> norm_error;  // | ||psi|| - 1 |

  std::size_t size() const { return times.size(); }
  void push(double t, const CVector& psi, const SpinObservables& ops);
};

SqueezingTrace squeezing_trace(Propagator& propagator, const SpinObservables& ops, const CVector& psi0,
                               const std::vector<double>& times);

// Geometric grid of `per_decade` points per decade ending at t_max and
// spanning `decades` decades, preceded by t = 0.
std::vector<double> log_time_grid(double t_max, int per_decade, int decades);
std::vector<double> uniform_time_grid(double t0, double t1, int points);

}  // namespace chainsq
