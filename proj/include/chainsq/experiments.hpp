#pragma once

// Protocol drivers: eta/gamma scans, best-squeezing search on one trajectory,
// phi scans over many configurations, full-vs-effective comparisons and the
// open/periodic timescale comparison.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chainsq/dynamics.hpp"

namespace chainsq {

enum class Model { Full, Effective };

struct InitialState {
  double theta = 0.5 * kPi;
  double varphi = 0.0;
};

struct SearchOptions {
  int per_decade = 64;
  int decades = 4;
  int refine_points = 17;
  double relative_resolution = 1e-3;
  // t_max = factor x (analytic sizing estimate) when t_max is not given.
  double t_max_factor = 4.0;
  // Full-chain runs above this size are refused (hard ceiling 16).
  int full_chain_max_sites = 12;
  KrylovOptions krylov;
};

struct BestSqueezingResult {
  double phi = 0.0;
  double xi2_best = 1.0;
  double t_best = 0.0;
  double eta = 0.0;    // NaN when undefined (periodic chains, chi_z = 0)
  double gamma = 0.0;
  double t_max = 0.0;
  Model model = Model::Effective;
  bool warn_local_min = false;  // xi^2 still decreasing at t_max
  std::string error;            // non-empty for failed scan points
  bool ok() const { return error.empty(); }
};

class SqueezingSearchError : public std::runtime_error {
 public:
  SqueezingSearchError(const std::string& what, SqueezingTrace partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const SqueezingTrace& partial_trace() const { return partial_; }

 private:
  SqueezingTrace partial_;
};

// Global minimum of xi^2(t) on [0, t_max]: logarithmic coarse grid followed by
// uniform refinement from the stored state preceding the minimum.
BestSqueezingResult best_squeezing(Propagator& propagator, const SpinObservables& ops, const CVector& psi0,
                                   double t_max, const SearchOptions& options = {});

// Order-of-magnitude t_best used only to size t_max: OAT at phi = pi, the
// anisotropic two-axis form at other commensurate phases, and the
// rotation-averaged one-axis form elsewhere.
double t_best_sizing_estimate(const ChainConfig& config);

BestSqueezingResult best_squeezing(const ChainConfig& config, InitialState initial, Model model,
                                   std::optional<double> t_max = std::nullopt, const SearchOptions& options = {});

struct EffectiveRow {
  double phi = 0.0;
  double chi_z = 0.0;
  Complex chi_x;
  double v_x = 0.0;
  double v_y = 0.0;
  double eta = 0.0;
  double gamma = 0.0;
  std::string error;
};

EffectiveRow effective_row(const ChainConfig& config);
std::vector<EffectiveRow> scan_eta_gamma(const ChainConfig& base, const std::vector<double>& phis);

// Callback receiving rows in grid order as soon as the prefix is complete.
using ResultSink = std::function<void(std::size_t index, const BestSqueezingResult&)>;

// Parallel over grid points; results are order-stable. Points whose index is
// in `skip` are not computed (resume support) and come back with
// error "skipped".
std::vector<BestSqueezingResult> scan_best_squeezing(const ChainConfig& base, const std::vector<double>& phis,
                                                     InitialState initial, Model model, const SearchOptions& options = {},
                                                     const ResultSink& sink = {},
                                                     const std::vector<bool>& skip = {});

// Best squeezing of the pure twisting models at size N: OAT H = S_z^2 from
// |pi/2, 0> and TACT H = S_x^2 - S_y^2 from |0, 0>.
struct TwistingReference {
  double oat_xi2_best = 0.0;
  double tact_xi2_best = 0.0;
};
TwistingReference twisting_reference(int n_sites);

struct FullEffectiveComparison {
  double t_best_effective = 0.0;
  double t_end = 0.0;
  double max_deviation = 0.0;  // max_t |xi2_full - xi2_eff| on [0, t_end]
  std::size_t samples = 0;
};

FullEffectiveComparison compare_full_effective(const ChainConfig& config, InitialState initial, double t_end_factor = 1.2,
                                               int samples = 400, const SearchOptions& options = {});

struct BoundaryComparison {
  BestSqueezingResult open;
  BestSqueezingResult periodic;
  double ratio = 0.0;  // t_best periodic / t_best open
};

BoundaryComparison compare_boundaries(const ChainConfig& config, InitialState initial, const SearchOptions& options = {});

// Ratio xi2_best(H_eff without the gamma S_x term) / xi2_best(H_eff).
double gamma_irrelevance_ratio(const ChainConfig& config, InitialState initial, const SearchOptions& options = {});

std::vector<double> linspace_open(double lo, double hi, int points);

}  // namespace chainsq
