// chainsq: spin squeezing in open Heisenberg chains with position-dependent
// spin-flip coupling. See README.md for the subcommands and CSV schemas.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <omp.h>

#include "chainsq/config.hpp"
#include "chainsq/csv.hpp"
#include "chainsq/kernels.hpp"
#include "chainsq/spinwave.hpp"
#include "chainsq/validate.hpp"

namespace fs = std::filesystem;
using namespace chainsq;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct Globals {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  long long seed = 0;
};

RunManifest load(const Globals& g) {
  RunManifest m = g.config_path.empty() ? parse_config("", process_environment()) : load_config(g.config_path, process_environment());
  if (!g.out_dir.empty()) m.output.dir = g.out_dir;
  return m;
}

fs::path output_file(const RunManifest& m, const std::string& name) { return fs::path(m.output.dir) / (m.output.prefix + name); }

std::vector<Model> models_of(ModelSelector s) {
  switch (s) {
    case ModelSelector::Effective:
      return {Model::Effective};
    case ModelSelector::Full:
      return {Model::Full};
    default:
      return {Model::Effective, Model::Full};
  }
}

const char* model_tag(Model m) { return m == Model::Full ? "full" : "effective"; }

// ---------------------------------------------------------------- subcommands

int run_spectrum(const RunManifest& m) {
  const auto& c = m.chain;
  if (c.n_sites > m.search.full_max_sites)
    throw ConfigError("chain.N", fmt::format("spectrum needs exact diagonalization; N <= {} (search.full_max_sites)", m.search.full_max_sites));
  CsvWriter w(output_file(m, "spectrum.csv"), {{"m", "1"}, {"level", "1"}, {"energy", "J"}}, emit_manifest(m, "spectrum"));
  for (int k = 0; k <= c.n_sites; ++k) {
    const double mz = k - c.n_sites / 2.0;
    const auto basis = build_basis(c.n_sites, mz);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(build_h_se(c, basis).to_dense(), Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      w.row({mz, static_cast<long long>(i), es.eigenvalues()[i] / c.j_se});
  }
  std::cout << fmt::format("wrote {} ({} rows)\n", w.path().string(), w.rows_written());
  return 0;
}

int run_spinwaves(const RunManifest& m) {
  const auto& c = m.chain;
  const CVector f = coupling_amplitudes(c);
  CsvWriter w(output_file(m, "spinwaves.csv"),
              {{"q", "1"}, {"E_q", "J"}, {"re_f_q", "1"}, {"im_f_q", "1"}, {"abs_f_q_over_sqrt_N", "1"}},
              emit_manifest(m, "spinwaves"));
  for (int q = 1; q < c.n_sites; ++q) {
    const auto p = standing_wave(c.n_sites, q);
    const Complex fq = f[q - 1];
    w.row({static_cast<long long>(q), p.energy, fq.real(), fq.imag(), std::abs(fq) / std::sqrt(double(c.n_sites))});
  }
  std::cout << fmt::format("wrote {}\n", w.path().string());
  return 0;
}

std::vector<Column> effective_columns() {
  return {{"phi", "rad"}, {"chi_z", "J"},  {"re_chi_x", "J"}, {"im_chi_x", "J"},
          {"v_x", "J"},   {"v_y", "J"},    {"eta", "1"},      {"gamma", "1"}};
}

// energies in units of J
std::vector<CsvCell> effective_cells(const EffectiveRow& r, double j) {
  return {r.phi, r.chi_z / j, r.chi_x.real() / j, r.chi_x.imag() / j, r.v_x / j, r.v_y / j, r.eta, r.gamma};
}

void report_errors(const std::vector<std::pair<double, std::string>>& errors) {
  for (const auto& [phi, msg] : errors) std::cerr << fmt::format("warning: phi = {:.17g}: {}\n", phi, msg);
}

int run_effective_params(const RunManifest& m) {
  if (m.chain.boundary != Boundary::Open) throw ConfigError("chain.boundary", "the effective model needs open boundaries");
  CsvWriter w(output_file(m, "effective_params.csv"), effective_columns(), emit_manifest(m, "effective-params"));
  const auto row = effective_row(m.chain);
  w.row(effective_cells(row, m.chain.j_se));
  if (!row.error.empty()) report_errors({{row.phi, row.error}});
  std::cout << fmt::format("wrote {}\n", w.path().string());
  return 0;
}

int run_scan_phi(const RunManifest& m) {
  if (m.chain.boundary != Boundary::Open) throw ConfigError("chain.boundary", "the effective model needs open boundaries");
  CsvWriter w(output_file(m, "scan_phi.csv"), effective_columns(), emit_manifest(m, "scan-phi"));
  std::vector<std::pair<double, std::string>> errors;
  for (const auto& r : scan_eta_gamma(m.chain, m.phi_grid())) {
    w.row(effective_cells(r, m.chain.j_se));
    if (!r.error.empty()) errors.emplace_back(r.phi, r.error);
  }
  report_errors(errors);
  std::cout << fmt::format("wrote {} ({} rows, {} undefined)\n", w.path().string(), w.rows_written(), errors.size());
  return 0;
}

int run_evolve(const RunManifest& m) {
  const auto& c = m.chain;
  const auto opts = m.search_options();
  double t_end = m.search.evolve_t_end;
  if (t_end <= 0.0) t_end = m.search.t_max > 0.0 ? m.search.t_max : opts.t_max_factor * t_best_sizing_estimate(c);
  const auto times = uniform_time_grid(0.0, t_end, m.search.evolve_samples);
  const auto init = m.initial_state();
  for (Model model : models_of(m.scan.model)) {
    std::unique_ptr<Propagator> prop;
    SpinObservables ops;
    CVector psi0;
    if (model == Model::Effective) {
      if (c.boundary != Boundary::Open) throw ConfigError("chain.boundary", "the effective model needs open boundaries");
      prop = make_dicke_propagator(build_h_eff(c));
      ops = SpinObservables::dicke(c.n_sites);
      psi0 = coherent_state(c.n_sites, init.theta, init.varphi, BasisTag::Dicke).amplitudes;
    } else {
      if (c.n_sites > opts.full_chain_max_sites)
        throw ConfigError("chain.N", fmt::format("full model limited to N <= {}", opts.full_chain_max_sites));
      if (c.n_sites > 12) std::cerr << fmt::format("warning: full chain with N = {} is slow\n", c.n_sites);
      const auto basis = build_basis(c.n_sites);
      prop = make_full_propagator(build_h_se(c, basis) + build_h_flip(c, basis), opts.krylov);
      ops = SpinObservables::full(c.n_sites);
      psi0 = coherent_state(c.n_sites, init.theta, init.varphi, BasisTag::Full).amplitudes;
    }
    const auto tr = squeezing_trace(*prop, ops, psi0, times);
    CsvWriter w(output_file(m, fmt::format("evolve_{}.csv", model_tag(model))),
                {{"t", "1/J"}, {"xi2", "1"}, {"Sx", "1"}, {"Sy", "1"}, {"Sz", "1"}, {"var_min", "1"}, {"collapse_flag", "1"}},
                emit_manifest(m, "evolve"));
    for (std::size_t i = 0; i < tr.size(); ++i)
      w.row({tr.times[i] * c.j_se, tr.xi2[i], tr.mean_spin[i][0], tr.mean_spin[i][1], tr.mean_spin[i][2], tr.var_min[i],
             static_cast<bool>(tr.collapsed[i])});
    std::cout << fmt::format("wrote {}\n", w.path().string());
  }
  return 0;
}

int run_best_squeezing(const RunManifest& m, bool resume) {
  const auto& c = m.chain;
  const auto opts = m.search_options();
  const auto grid = m.phi_grid();
  const std::vector<Column> cols = {{"phi", "rad"}, {"xi2_best", "1"}, {"t_best", "1/J"},
                                    {"eta", "1"},   {"gamma", "1"},    {"warn_local_min", "1"}};
  const std::string manifest = emit_manifest(m, "best-squeezing");

  for (Model model : models_of(m.scan.model)) {
    const fs::path path = output_file(m, fmt::format("best_squeezing_{}.csv", model_tag(model)));
    std::vector<bool> skip(grid.size(), false);
    bool append = false;
    if (resume && fs::exists(path)) {
      const fs::path mp = manifest_path_for(path);
      std::ifstream in(mp);
      std::stringstream ss;
      ss << in.rdbuf();
      if (ss.str() != manifest) throw ConfigError("", fmt::format("cannot resume {}: manifest differs", path.string()));
      {
        // drop a partially written last row
        std::ifstream csv(path, std::ios::binary);
        const std::string text((std::istreambuf_iterator<char>(csv)), std::istreambuf_iterator<char>());
        const auto last = text.find_last_of('\n');
        const std::size_t keep = last == std::string::npos ? 0 : last + 1;
        if (keep < text.size()) fs::resize_file(path, keep);
      }
      const auto records = read_csv(path);
      const std::size_t done = records.empty() ? 0 : std::min(records.size() - 1, grid.size());
      for (std::size_t i = 0; i < done; ++i) skip[i] = true;
      append = !records.empty();
      std::cout << fmt::format("resuming {} after {} rows\n", path.string(), done);
    }
    CsvWriter w(path, cols, manifest, append);
    std::vector<std::pair<double, std::string>> errors;
    scan_best_squeezing(c, grid, m.initial_state(), model, opts,
                        [&](std::size_t i, const BestSqueezingResult& r) {
                          if (skip[i]) return;
                          w.row({r.phi, r.xi2_best, r.t_best * c.j_se, r.eta, r.gamma, r.warn_local_min});
                          if (!r.ok()) errors.emplace_back(r.phi, r.error);
                        },
                        skip);
    report_errors(errors);
    std::cout << fmt::format("wrote {} ({} failed points)\n", w.path().string(), errors.size());
  }

  const auto ref = twisting_reference(c.n_sites);
  CsvWriter rw(output_file(m, "twisting_reference.csv"), {{"N", "1"}, {"oat_xi2_best", "1"}, {"tact_xi2_best", "1"}},
               manifest);
  rw.row({static_cast<long long>(c.n_sites), ref.oat_xi2_best, ref.tact_xi2_best});
  return 0;
}

int run_validate(const RunManifest& m, const std::vector<int>& sizes) {
  const auto report = validate_all(sizes);
  const fs::path path = output_file(m, "validate.json");
  fs::create_directories(path.parent_path());
  {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("{}: cannot open for writing", path.string()));
    out << report.to_json().dump(2) << "\n";
  }
  {
    std::ofstream man(fs::path(path).replace_extension(".manifest.ini"));
    man << emit_manifest(m, "validate");
  }
  for (const auto& c : report.checks)
    if (!c.pass)
      std::cout << fmt::format("FAIL {} N={} residual={:.3g} tol={:.3g} {}\n", c.name, c.n_sites, c.residual, c.tolerance, c.detail);
  std::cout << fmt::format("{} checks, {} failures; report {}\n", report.checks.size(), report.failures(), path.string());
  return report.all_pass() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin squeezing in Heisenberg chains with position-dependent spin-flip coupling"};
  app.set_version_flag("--version", CHAINSQ_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "output directory (overrides output.dir)");
  app.add_option("--threads", g.threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", g.seed, "reserved; no stochastic component");

  auto* spectrum = app.add_subcommand("spectrum", "H_SE eigenvalues per magnetization sector");
  auto* spinwaves = app.add_subcommand("spinwaves", "standing-wave energies and coupling amplitudes f_q");
  auto* eff = app.add_subcommand("effective-params", "chi_z, chi_x, v_x, v_y, eta, gamma for the configured chain");
  auto* scan = app.add_subcommand("scan-phi", "effective-model parameters over the phi grid");
  auto* evolve = app.add_subcommand("evolve", "squeezing trace xi^2(t)");
  auto* best = app.add_subcommand("best-squeezing", "best squeezing over the phi grid");
  bool resume = false;
  best->add_flag("--resume", resume, "continue an interrupted scan from its CSV prefix");
  auto* validate = app.add_subcommand("validate", "run every oracle check and write a JSON report");
  std::vector<int> sizes = {4, 6, 8};
  validate->add_option("--sizes", sizes, "chain lengths to validate")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (g.threads > 0) kernels::set_threads(g.threads);
    const RunManifest m = load(g);
    if (*spectrum) return run_spectrum(m);
    if (*spinwaves) return run_spinwaves(m);
    if (*eff) return run_effective_params(m);
    if (*scan) return run_scan_phi(m);
    if (*evolve) return run_evolve(m);
    if (*best) return run_best_squeezing(m, resume);
    if (*validate) return run_validate(m, sizes);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
