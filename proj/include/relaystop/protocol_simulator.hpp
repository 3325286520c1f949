#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "relaystop/channel_model.hpp"
#include "relaystop/contention.hpp"
#include "relaystop/rate_distribution.hpp"
#include "relaystop/stopping_policies.hpp"
#include "relaystop/threshold_solver.hpp"

namespace relaystop {

struct SimConfig {
  std::int64_t packets = 100'000;
  std::uint64_t seed = 1;
  std::int64_t sub_observation_cap = 1'000'000;
  std::int64_t main_observation_cap = 1'000'000;
  ContentionMode contention_mode = ContentionMode::FastGeometric;
};

/// One renewal cycle: every observation up to and including the delivered
/// packet.
struct PacketRecord {
  std::int64_t main_observations = 0;
  std::int64_t sub_observations = 0;  // 0 with full CSI
  double rate_at_stop = 0.0;
  std::size_t relay = 0;              // zero-based
  double elapsed = 0.0;               // contention + transmission time
  double bits = 0.0;                  // (T/2) * rate_at_stop

  bool operator==(const PacketRecord&) const = default;
};

struct SimStats {
  std::vector<PacketRecord> records;
  double total_bits = 0.0;
  double total_time = 0.0;
  double throughput = 0.0;                   // total_bits / total_time
  std::optional<double> throughput_stderr;   // set when >= 2 packets

  bool operator==(const SimStats&) const = default;
};

/// Where full-CSI observations come from: fading channels, or a finite rate
/// distribution used by the closed-form tests (relay is then always 0).
using FullCsiSource = std::variant<ChannelModel, RateDistribution>;

/// Full-CSI protocol under the pure-threshold rule. Throws
/// NonTerminatingContention when a packet needs more than
/// main_observation_cap observations.
SimStats run_scenario1(const SystemParams& params, const PolicySpec& spec,
                       const SimConfig& cfg, const FullCsiSource& source = ChannelModel{});

/// Bi-level protocol (source contention, broadcast, relay contention) under
/// either bi-level policy. `est` controls the per-observation sub-layer
/// solves. Throws CappedPacket when a sub-layer exceeds
/// sub_observation_cap.
SimStats run_scenario2(const SystemParams& params, const PolicySpec& spec,
                       const SimConfig& cfg, const EstimatorConfig& est,
                       const ChannelModel& model = {});

/// Aggregates records into totals, throughput and (when possible) stderr.
SimStats summarize(std::vector<PacketRecord> records);

/// Ratio-estimator standard error of total_bits / total_time over i.i.d.
/// renewal cycles (delta method). Throws InsufficientData below 2 packets.
std::pair<double, double> throughput_ci(const SimStats& stats);

struct StoppingTimeStats {
  std::map<std::int64_t, std::int64_t> histogram;  // N -> count
  double mean = 0.0;
  std::vector<double> sorted_rates;                // rate_at_stop, ascending

  /// Empirical CDF of the rate at the stopping observation.
  double rate_cdf(double x) const;
};

StoppingTimeStats stopping_time_stats(const SimStats& stats);

}  // namespace relaystop
