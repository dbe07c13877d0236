#pragma once

// Run configuration: INI-style sections [chain], [scan], [search], [output]
// with arithmetic expressions for phases and energies, environment
// overrides and a deterministic manifest with a content hash.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chainsq/experiments.hpp"

namespace chainsq {

enum class ModelSelector { Effective, Full, Both };
enum class GridKind { Uniform, Commensurate };

struct ScanSettings {
  double phi_min = 0.0;
  double phi_max = 2.0 * kPi;
  int points = 200;
  GridKind grid = GridKind::Uniform;  // uniform grids exclude both end points
  ModelSelector model = ModelSelector::Effective;
  double theta = 0.5 * kPi;  // initial coherent state
  double varphi = 0.0;

  bool operator==(const ScanSettings&) const = default;
};

struct SearchSettings {
  int per_decade = 64;
  int decades = 4;
  int refine_points = 17;
  double relative_resolution = 1e-3;
  double t_max_factor = 4.0;
  double t_max = 0.0;  // 0: sized from the analytic estimate
  int krylov_dim = 30;
  double krylov_tol = 1e-10;
  int full_max_sites = 12;
  double evolve_t_end = 0.0;  // 0: t_max
  int evolve_samples = 400;

  bool operator==(const SearchSettings&) const = default;
};

struct OutputSettings {
  std::string dir = "out";
  std::string prefix;

  bool operator==(const OutputSettings&) const = default;
};

struct RunManifest {
  ChainConfig chain;
  ScanSettings scan;
  SearchSettings search;
  OutputSettings output;
  std::string version = CHAINSQ_VERSION;

  bool operator==(const RunManifest& o) const {
    return chain == o.chain && scan == o.scan && search == o.search && output == o.output;
  }

  SearchOptions search_options() const;
  InitialState initial_state() const;
  std::vector<double> phi_grid() const;
};

// Variables available to expressions: pi, N, J, E1 = |J| |cos(pi/N) - 1|.
// Supports + - * / ^, parentheses, unary minus and sqrt/sin/cos/abs/exp/log.
double evaluate_expression(const std::string& text, const std::map<std::string, double>& variables);

// Environment lookup, replaceable in tests.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_environment();
inline constexpr const char* kEnvPrefix = "CHAINSQ_";

// Parses the document, applies environment overrides (CHAINSQ_<SECTION>_<KEY>,
// upper case) and defaults, resolves expressions and validates. Throws
// ConfigError with the dotted key path.
RunManifest parse_config(const std::string& text, const EnvLookup& env = {});
RunManifest load_config(const std::string& path, const EnvLookup& env = {});

// Canonical text with every value explicit (17 significant digits) and a
// [manifest] section holding the version and the SHA-256 of the body.
std::string emit_manifest(const RunManifest& manifest, const std::string& command = {});
std::string manifest_hash(const RunManifest& manifest);

std::string sha256_hex(const std::string& data);

// Key list per section, in emission order.
const std::vector<std::pair<std::string, std::vector<std::string>>>& config_schema();

}  // namespace chainsq
