#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "relaystop/channel_model.hpp"
#include "relaystop/protocol_simulator.hpp"
#include "relaystop/rate_distribution.hpp"
#include "relaystop/system_params.hpp"
#include "relaystop/threshold_solver.hpp"

namespace relaystop {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct OracleConfig {
  int grid_points = 500;
  std::optional<double> lo, hi;  // default [0, largest sampled rate]
};

struct SweepConfig {
  std::string axis;
  std::vector<double> values;
  bool simulate = false;
};

/// Everything one CLI run needs. `seed` drives both the estimator sample
/// and the simulator (they use disjoint substreams).
struct ExperimentConfig {
  Scenario scenario = Scenario::FullCsi;
  std::uint64_t seed = 1;
  SystemParams params;
  bool p1_given = false;
  EstimatorConfig est;
  SimConfig sim;
  ChannelModel model;
  std::optional<RateDistribution> rate_hook;  // scenario 1 only
  OracleConfig oracle;
  SweepConfig sweep;
  std::filesystem::path out_dir;  // empty: write nothing
};

/// Parses and validates a config document. Unknown keys and bad values
/// throw ErrorKind::Config with the dotted path of the field.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// The normalised config (defaults filled in), as echoed in summaries.
json to_json(const ExperimentConfig& cfg);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> packets;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::string> scenario;
  std::optional<std::string> axis;
  std::optional<std::vector<double>> values;
};

/// Applies command-line flags on top of a loaded config and revalidates.
void apply(ExperimentConfig& cfg, const Overrides& ov);

struct CheckResult {
  std::string name;  // acceptance check this verdict stands for
  bool pass = false;
  std::string detail;
};

struct ReportSummary {
  std::string command;
  json config;
  std::uint64_t seed = 0;
  json results = json::object();
  std::vector<CheckResult> verdicts;
  double runtime_seconds = 0.0;

  bool all_pass() const;
  /// Everything except "runtime" is bit-reproducible from (config, seed).
  json to_json() const;
};

ReportSummary cmd_solve(const ExperimentConfig& cfg);
ReportSummary cmd_simulate(const ExperimentConfig& cfg);
ReportSummary cmd_compare(const ExperimentConfig& cfg);
ReportSummary cmd_sweep(const ExperimentConfig& cfg);
ReportSummary cmd_oracle(const ExperimentConfig& cfg);

/// Per-packet log, one row per record; relays are written one-based.
void write_packets_csv(const std::filesystem::path& path, const SimStats& stats);

/// Writes summary.json into cfg.out_dir (if set).
void write_summary(const ExperimentConfig& cfg, const ReportSummary& summary);

/// Field names accepted as sweep axes.
const std::vector<std::string>& sweep_axes();

/// Copy of `p` with `axis` set to `value`; integer fields must get integral
/// values.
SystemParams with_axis(SystemParams p, const std::string& axis, double value);

}  // namespace relaystop
