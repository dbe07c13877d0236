#pragma once

// Aggregated oracle checks with a machine-readable report.

#include <string>
#include <vector>

#include <json.hpp>

namespace chainsq {

struct CheckResult {
  std::string name;
  int n_sites = 0;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct Observation {
  std::string name;
  std::string detail;
  double value = 0.0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  std::vector<Observation> observations;

  bool all_pass() const;
  std::size_t failures() const;
  nlohmann::json to_json() const;
};

// Full-chain oracles run for N <= 12; the Schrieffer-Wolff construction for
// N <= 10. Larger entries only get the analytic checks.
ValidationReport validate_all(const std::vector<int>& n_sites_list, bool with_observations = true);

}  // namespace chainsq
