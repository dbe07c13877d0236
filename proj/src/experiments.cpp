#include "chainsq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include <fmt/format.h>
#include <omp.h>

namespace chainsq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sample_xi2(const CVector& psi, const SpinObservables& ops, bool& collapsed) {
  try {
    collapsed = false;
    return squeezing_parameter(psi, ops).xi2;
  } catch (const MeanSpinCollapse&) {
    collapsed = true;
    return kNaN;
  }
}

void check_full_size(const ChainConfig& config, const SearchOptions& options) {
  const int cap = std::min(options.full_chain_max_sites, 16);
  if (config.n_sites > cap)
    throw DomainError(fmt::format("full-chain model limited to N <= {} (got N = {})", cap, config.n_sites));
}

}  // namespace

std::vector<double> linspace_open(double lo, double hi, int points) {
  if (points < 1 || !(hi > lo)) throw DomainError("invalid open grid");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * (i + 1) / (points + 1);
  return g;
}

BestSqueezingResult best_squeezing(Propagator& propagator, const SpinObservables& ops, const CVector& psi0,
                                   double t_max, const SearchOptions& options) {
  if (!(t_max > 0.0)) throw DomainError("t_max must be positive");
  if (options.refine_points < 3) throw DomainError("refinement needs at least 3 points");
  const auto grid = log_time_grid(t_max, options.per_decade, options.decades);

  BestSqueezingResult res;
  res.t_max = t_max;
  SqueezingTrace trace;

  CVector psi = psi0;
  CVector prev1 = psi0;  // state at grid[i - 1]
  CVector prev2 = psi0;  // state at grid[i - 2]
  CVector state_lo = psi0;
  double t = 0.0;
  std::size_t best_i = 0;
  double best = std::numeric_limits<double>::infinity();
  std::size_t last_valid = 0;
  bool any_valid = false;

  for (std::size_t i = 0; i < grid.size(); ++i) {
    prev2 = prev1;
    prev1 = psi;
    propagator.advance(psi, grid[i] - t);
    t = grid[i];
    trace.push(t, psi, ops);
    if (trace.collapsed.back()) {
      if (!any_valid || best_i == last_valid)
        throw SqueezingSearchError(fmt::format("mean spin collapsed at t = {:.6g} before a squeezing minimum", t), trace);
      continue;
    }
    const double x = trace.xi2.back();
    if (!any_valid || x < best) {
      best = x;
      best_i = i;
      state_lo = i == 0 ? psi : (i == 1 ? prev1 : prev2);
    }
    any_valid = true;
    last_valid = i;
  }

  res.warn_local_min = best_i == grid.size() - 1;
  // The coarse grid can alias fast moment oscillations, so the first bracket
  // spans two coarse points each side and is sampled finely enough to resolve
  // the shortest moment period when the propagator knows it.
  const std::size_t lo_i = best_i < 2 ? 0 : best_i - 2;
  double lo = grid[lo_i];
  double hi = grid[std::min(best_i + 2, grid.size() - 1)];
  double t_best = grid[best_i];
  const auto period = propagator.moment_period();

  for (int iter = 0; iter < 60 && hi - lo > options.relative_resolution * std::max(t_best, 1e-300); ++iter) {
    std::size_t points = options.refine_points;
    if (period && *period > 0.0) {
      const double needed = std::ceil(8.0 * (hi - lo) / *period) + 1.0;
      points = std::max<std::size_t>(points, static_cast<std::size_t>(std::min(needed, 8193.0)));
    }
    const auto fine = uniform_time_grid(lo, hi, points);
    CVector s = state_lo;
    std::vector<CVector> states;
    std::vector<double> xs;
    states.reserve(fine.size());
    double tt = lo;
    for (double target : fine) {
      propagator.advance(s, target - tt);
      tt = target;
      bool collapsed = false;
      xs.push_back(sample_xi2(s, ops, collapsed));
      states.push_back(s);
    }
    std::size_t j = 0;
    double xj = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < xs.size(); ++k)
      if (!std::isnan(xs[k]) && xs[k] < xj) {
        xj = xs[k];
        j = k;
      }
    if (!std::isfinite(xj)) break;
    if (xj <= best) {
      best = xj;
      t_best = fine[j];
    }
    const std::size_t jl = j == 0 ? 0 : j - 1;
    const std::size_t jh = std::min(j + 1, fine.size() - 1);
    state_lo = states[jl];
    lo = fine[jl];
    hi = fine[jh];
  }

  res.xi2_best = best;
  res.t_best = t_best;
  return res;
}

double t_best_sizing_estimate(const ChainConfig& config) {
  ChainConfig open = config;
  open.boundary = Boundary::Open;
  const int n = config.n_sites;
  const auto chi = chi_coefficients(open);
  const double cz = std::abs(chi.chi_z);
  if (cz == 0.0) throw DegenerateError("chi_z = 0: no twisting timescale");
  double est = 0.0;
  const auto idx = commensurate_index(n, config.phi);
  if (idx && (((*idx % n) + n) % n) * 2 == n) {
    est = std::pow(n, -2.0 / 3.0) / (4.0 * cz);
  } else if (idx) {
    est = std::log(n / 2.0) / (2.0 * cz * n * std::sqrt(2.0));
  } else {
    const double eta = chi.chi_x.real() / chi.chi_z;
    est = std::pow(n, -2.0 / 3.0) / (cz * std::max(std::abs(1.0 + 3.0 * eta), 0.05));
  }
  // the periodic chain couples to a single mode and twists more slowly
  if (config.boundary == Boundary::Periodic) est *= 4.0;
  return est;
}

BestSqueezingResult best_squeezing(const ChainConfig& config, InitialState initial, Model model,
                                   std::optional<double> t_max, const SearchOptions& options) {
  config.validate();
  const double tm = t_max ? *t_max : options.t_max_factor * t_best_sizing_estimate(config);
  BestSqueezingResult res;
  if (model == Model::Effective) {
    auto prop = make_dicke_propagator(build_h_eff(config));
    const auto ops = SpinObservables::dicke(config.n_sites);
    const auto psi0 = coherent_state(config.n_sites, initial.theta, initial.varphi, BasisTag::Dicke);
    res = best_squeezing(*prop, ops, psi0.amplitudes, tm, options);
  } else {
    check_full_size(config, options);
    const auto basis = build_basis(config.n_sites);
    auto prop = make_full_propagator(build_h_se(config, basis) + build_h_flip(config, basis), options.krylov);
    const auto ops = SpinObservables::full(config.n_sites);
    const auto psi0 = coherent_state(config.n_sites, initial.theta, initial.varphi, BasisTag::Full);
    res = best_squeezing(*prop, ops, psi0.amplitudes, tm, options);
  }
  res.phi = config.phi;
  res.model = model;
  res.eta = res.gamma = kNaN;
  if (config.boundary == Boundary::Open) {
    try {
      const auto eg = eta_gamma(config);
      res.eta = eg.eta;
      res.gamma = eg.gamma;
    } catch (const DegenerateError&) {
    }
  }
  return res;
}

EffectiveRow effective_row(const ChainConfig& config) {
  EffectiveRow row;
  row.phi = config.phi;
  row.eta = row.gamma = row.chi_z = kNaN;
  try {
    const auto split = split_coupling(config);
    row.v_x = split.v_x;
    row.v_y = split.v_y;
    const auto chi = chi_coefficients(config);
    row.chi_z = chi.chi_z;
    row.chi_x = chi.chi_x;
    const auto eg = eta_gamma(config);
    row.eta = eg.eta;
    row.gamma = eg.gamma;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

std::vector<EffectiveRow> scan_eta_gamma(const ChainConfig& base, const std::vector<double>& phis) {
  std::vector<EffectiveRow> rows(phis.size());
  const auto count = static_cast<std::ptrdiff_t>(phis.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    ChainConfig c = base;
    c.phi = phis[i];
    c.phi0 = default_phi0(c.n_sites, c.phi);
    rows[i] = effective_row(c);
  }
  return rows;
}

std::vector<BestSqueezingResult> scan_best_squeezing(const ChainConfig& base, const std::vector<double>& phis,
                                                     InitialState initial, Model model, const SearchOptions& options,
                                                     const ResultSink& sink, const std::vector<bool>& skip) {
  if (phis.empty()) throw DomainError("empty phi grid");
  for (std::size_t i = 1; i < phis.size(); ++i)
    if (!(phis[i] > phis[i - 1])) throw DomainError("phi grid must be strictly increasing");
  if (model == Model::Full) check_full_size(base, options);

  std::vector<BestSqueezingResult> results(phis.size());
  std::vector<bool> done(phis.size(), false);
  std::size_t next_to_emit = 0;
  std::mutex mu;
  const auto count = static_cast<std::ptrdiff_t>(phis.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    BestSqueezingResult r;
    if (static_cast<std::size_t>(i) < skip.size() && skip[i]) {
      r.phi = phis[i];
      r.model = model;
      r.error = "skipped";
    } else {
      try {
        ChainConfig c = base;
        c.phi = phis[i];
        c.phi0 = default_phi0(c.n_sites, c.phi);
        r = best_squeezing(c, initial, model, std::nullopt, options);
      } catch (const std::exception& e) {
        r = BestSqueezingResult{};
        r.phi = phis[i];
        r.model = model;
        r.xi2_best = r.t_best = r.eta = r.gamma = kNaN;
        r.error = e.what();
      }
    }
    std::lock_guard<std::mutex> lock(mu);
    results[i] = r;
    done[i] = true;
    while (next_to_emit < results.size() && done[next_to_emit]) {
      if (sink) sink(next_to_emit, results[next_to_emit]);
      ++next_to_emit;
    }
  }
  return results;
}

TwistingReference twisting_reference(int n_sites) {
  if (n_sites < 2) throw DomainError("n_sites must be >= 2");
  const auto ops = SpinObservables::dicke(n_sites);
  SearchOptions opts;
  TwistingReference ref;
  {
    EigenPropagator prop(collective_operator(n_sites, CollectiveKind::Sz2).to_dense());
    const auto psi0 = coherent_state(n_sites, 0.5 * kPi, 0.0, BasisTag::Dicke);
    // one-axis period is pi; the first minimum sits near N^{-2/3}
    const double t_max = std::min(0.25 * kPi, 4.0 * std::pow(n_sites, -2.0 / 3.0));
    ref.oat_xi2_best = best_squeezing(prop, ops, psi0.amplitudes, t_max, opts).xi2_best;
  }
  {
    const CMatrix h = collective_operator(n_sites, CollectiveKind::Sx2).to_dense() -
                      collective_operator(n_sites, CollectiveKind::Sy2).to_dense();
    EigenPropagator prop(h);
    const auto psi0 = coherent_state(n_sites, 0.0, 0.0, BasisTag::Dicke);
    const double t_max = 4.0 * std::log(2.0 * n_sites) / n_sites;
    ref.tact_xi2_best = best_squeezing(prop, ops, psi0.amplitudes, t_max, opts).xi2_best;
  }
  return ref;
}

FullEffectiveComparison compare_full_effective(const ChainConfig& config, InitialState initial, double t_end_factor,
                                               int samples, const SearchOptions& options) {
  config.validate();
  check_full_size(config, options);
  if (samples < 2) throw DomainError("need at least 2 samples");
  FullEffectiveComparison out;
  out.t_best_effective = best_squeezing(config, initial, Model::Effective, std::nullopt, options).t_best;
  out.t_end = t_end_factor * out.t_best_effective;
  const auto times = uniform_time_grid(0.0, out.t_end, samples);

  auto eff_prop = make_dicke_propagator(build_h_eff(config));
  const auto eff = squeezing_trace(*eff_prop, SpinObservables::dicke(config.n_sites),
                                   coherent_state(config.n_sites, initial.theta, initial.varphi, BasisTag::Dicke).amplitudes, times);
  const auto basis = build_basis(config.n_sites);
  auto full_prop = make_full_propagator(build_h_se(config, basis) + build_h_flip(config, basis), options.krylov);
  const auto full = squeezing_trace(*full_prop, SpinObservables::full(config.n_sites),
                                    coherent_state(config.n_sites, initial.theta, initial.varphi, BasisTag::Full).amplitudes, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (eff.collapsed[i] || full.collapsed[i]) continue;
    out.max_deviation = std::max(out.max_deviation, std::abs(eff.xi2[i] - full.xi2[i]));
    ++out.samples;
  }
  return out;
}

BoundaryComparison compare_boundaries(const ChainConfig& config, InitialState initial, const SearchOptions& options) {
  BoundaryComparison out;
  ChainConfig open = config;
  open.boundary = Boundary::Open;
  ChainConfig periodic = config;
  periodic.boundary = Boundary::Periodic;
  out.open = best_squeezing(open, initial, Model::Full, std::nullopt, options);
  out.periodic = best_squeezing(periodic, initial, Model::Full, std::nullopt, options);
  out.ratio = out.periodic.t_best / out.open.t_best;
  return out;
}

double gamma_irrelevance_ratio(const ChainConfig& config, InitialState initial, const SearchOptions& options) {
  config.validate();
  const auto split = split_coupling(config);
  const double tm = options.t_max_factor * t_best_sizing_estimate(config);
  const auto ops = SpinObservables::dicke(config.n_sites);
  const auto psi0 = coherent_state(config.n_sites, initial.theta, initial.varphi, BasisTag::Dicke);
  auto with = make_dicke_propagator(build_h_eff(config));
  auto without = make_dicke_propagator(build_h_eff(config) -
                                       collective_operator(config.n_sites, CollectiveKind::Sx) * split.v_x);
  const double a = best_squeezing(*with, ops, psi0.amplitudes, tm, options).xi2_best;
  const double b = best_squeezing(*without, ops, psi0.amplitudes, tm, options).xi2_best;
  return b / a;
}

}  // namespace chainsq
