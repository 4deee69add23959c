#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "shiftlab/rng.hpp"

namespace shiftlab {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Validated experiment description. Unknown fields are rejected.
struct ExperimentConfig {
  std::string mode;  // pq-halfspace | tdsboost | forster-check | weakdist
  nlohmann::json scenario;  // {"name": ..., ...params}
  double eps = 0.1;
  double delta = 0.05;
  std::optional<double> eta;  // agnostic mode of tdsboost
  int trials = 1;
  std::uint64_t seed = 0;
  std::string out_dir;  // empty: nothing written
  int workers = 1;
  std::optional<double> trial_budget_ms;
  nlohmann::json extra;  // validated mode-specific knobs

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

/// Per-trial long-format rows plus a deterministic aggregate. Rerunning
/// with the same config and seed reproduces csv_bytes() exactly; wall-clock
/// timings are kept out of the report.
struct Report {
  struct Row {
    int trial = 0;
    std::string metric;
    double value = 0.0;
  };

  std::vector<Row> rows;
  nlohmann::ordered_json aggregate;
  std::vector<double> wall_ms;  // per trial; excluded from csv/json

  std::string csv_bytes() const;
  std::string timings_csv_bytes() const;
};

/// Execute the configured pipeline over trial-count independent streams
/// (per-trial seeds derived by the documented splitmix of the master seed).
/// Writes report.csv + report.json (+ timings.csv) under out_dir when set.
Report run_experiment(const ExperimentConfig& config);

}  // namespace shiftlab
