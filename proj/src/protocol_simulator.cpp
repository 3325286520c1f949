#include "relaystop/protocol_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "relaystop/errors.hpp"

namespace relaystop {

namespace {

void validate(const SimConfig& cfg) {
  require(cfg.packets >= 1, ErrorKind::InvalidParameter, "packets: must be >= 1");
  require(cfg.sub_observation_cap >= 1, ErrorKind::InvalidParameter,
          "sub_observation_cap: must be >= 1");
  require(cfg.main_observation_cap >= 1, ErrorKind::InvalidParameter,
          "main_observation_cap: must be >= 1");
}

[[noreturn]] void main_cap_exceeded(std::int64_t packet, std::int64_t cap) {
  std::ostringstream os;
  os << "packet " << packet << ": no stop within " << cap
     << " main-layer observations (threshold above the attainable rate?)";
  fail(ErrorKind::NonTerminatingContention, os.str());
}

// Draws one full-CSI observation: best rate and relay.
struct FullCsiDraw {
  const SystemParams& params;
  Rng& rng;
  std::discrete_distribution<Eigen::Index>* atoms;

  RelayRate operator()(const ChannelModel& model) const {
    return best_relay_rate(params, sample_realization(rng, params, model));
  }
  RelayRate operator()(const RateDistribution& dist) const {
    return {dist.values()[(*atoms)(rng)], 0};
  }
};

}  // namespace

SimStats run_scenario1(const SystemParams& params, const PolicySpec& spec,
                       const SimConfig& cfg, const FullCsiSource& source) {
  validate(params, false);
  validate(cfg);
  require(spec.kind == PolicyKind::FullCsi, ErrorKind::InvalidPolicy,
          "run_scenario1: needs a full-csi policy");

  Rng rng = make_stream(cfg.seed, streams::kSimulator);
  std::discrete_distribution<Eigen::Index> atoms;
  if (const auto* dist = std::get_if<RateDistribution>(&source))
    atoms = std::discrete_distribution<Eigen::Index>(dist->weights().begin(),
                                                     dist->weights().end());
  const FullCsiDraw draw{params, rng, &atoms};

  std::vector<PacketRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.packets));
  for (std::int64_t packet = 0; packet < cfg.packets; ++packet) {
    PacketRecord rec;
    for (;;) {
      if (++rec.main_observations > cfg.main_observation_cap)
        main_cap_exceeded(packet, cfg.main_observation_cap);
      rec.elapsed += contend(cfg.contention_mode, rng, params.K, params.p0, params.tau).elapsed;
      const RelayRate obs = std::visit(draw, source);
      const Decision d = full_csi_decide(spec, obs.rate, obs.relay);
      if (const auto* stop = std::get_if<Stop>(&d)) {
        rec.rate_at_stop = obs.rate;
        rec.relay = stop->relay;
        break;
      }
    }
    rec.elapsed += params.t_data;
    rec.bits = params.t_data / 2.0 * rec.rate_at_stop;
    records.push_back(rec);
  }
  return summarize(std::move(records));
}

SimStats run_scenario2(const SystemParams& params, const PolicySpec& spec,
                       const SimConfig& cfg, const EstimatorConfig& est,
                       const ChannelModel& model) {
  validate(params, true);
  validate(cfg);
  validate(est);
  require(spec.kind != PolicyKind::FullCsi, ErrorKind::InvalidPolicy,
          "run_scenario2: needs a bi-level policy");
  const bool optimal = spec.kind == PolicyKind::OptimalBiLevel;
  const double T = params.t_data;
  const double slot = params.tau / 2.0;

  Rng rng = make_stream(cfg.seed, streams::kSimulator);
  std::vector<PacketRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.packets));

  for (std::int64_t packet = 0; packet < cfg.packets; ++packet) {
    PacketRecord rec;
    Eigen::ArrayXd f_sq;
    double lambda_sub = 0.0, w_star = 0.0;

    // Main layer: sources contend, the winner sees only its first hop.
    for (;;) {
      if (++rec.main_observations > cfg.main_observation_cap)
        main_cap_exceeded(packet, cfg.main_observation_cap);
      rec.elapsed += contend(cfg.contention_mode, rng, params.K, params.p0, slot).elapsed;
      f_sq = sample_first_hop(rng, params, model);
      const SubLayerRate rate = make_sub_layer(params, model, f_sq, est.quad_points);
      Verdict v;
      if (optimal) {
        w_star = solve_sub_W(params, rate, spec.gamma_star, est).value;
        v = optimal_main_decide(spec, w_star, T);
      } else {
        const SubLayerStats st = solve_sub_layer_intuitive(params, rate, est);
        lambda_sub = st.lambda_sub;
        v = intuitive_main_decide(spec, st, T);
      }
      if (v == Verdict::Stop) break;
    }
    rec.elapsed += T / 2.0;  // broadcast to the relays

    // Sub layer: relays contend, the winner sees its fresh second hop.
    for (;;) {
      if (++rec.sub_observations > cfg.sub_observation_cap) {
        std::ostringstream os;
        os << "packet " << packet << ": sub layer exceeded " << cfg.sub_observation_cap
           << " observations";
        fail(ErrorKind::CappedPacket, os.str());
      }
      const ContentionOutcome c =
          contend(cfg.contention_mode, rng, params.L, params.p1, slot);
      rec.elapsed += c.elapsed;
      const double g_sq = sample_second_hop(rng, params, model);
      const double rate = af_rate(params.p_s_power, params.p_r_power,
                                  f_sq[static_cast<Eigen::Index>(c.winner)], g_sq);
      const Verdict v = optimal ? optimal_sub_decide(spec, w_star, rate, T)
                                : intuitive_sub_decide(lambda_sub, rate);
      if (v == Verdict::Stop) {
        rec.rate_at_stop = rate;
        rec.relay = c.winner;
        break;
      }
    }
    rec.elapsed += T / 2.0;
    rec.bits = T / 2.0 * rec.rate_at_stop;
    records.push_back(rec);
  }
  return summarize(std::move(records));
}

SimStats summarize(std::vector<PacketRecord> records) {
  SimStats s;
  s.records = std::move(records);
  for (const auto& r : s.records) {
    s.total_bits += r.bits;
    s.total_time += r.elapsed;
  }
  s.throughput = s.total_time > 0.0 ? s.total_bits / s.total_time : 0.0;
  if (s.records.size() >= 2) s.throughput_stderr = throughput_ci(s).second;
  return s;
}

std::pair<double, double> throughput_ci(const SimStats& stats) {
  const auto n = stats.records.size();
  require(n >= 2, ErrorKind::InsufficientData,
          "throughput_ci: need at least 2 packets, got " + std::to_string(n));
  const double ratio = stats.total_bits / stats.total_time;
  const double mean_time = stats.total_time / static_cast<double>(n);
  // Residuals b - R t, shifted by the first packet's so that identical
  // packets give exactly zero spread.
  const PacketRecord& first = stats.records.front();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = stats.records[i];
    d[i] = (r.bits - first.bits) - ratio * (r.elapsed - first.elapsed);
  }
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(n - 1);
  return {ratio, std::sqrt(var / static_cast<double>(n)) / mean_time};
}

double StoppingTimeStats::rate_cdf(double x) const {
  if (sorted_rates.empty()) return 0.0;
  const auto it = std::upper_bound(sorted_rates.begin(), sorted_rates.end(), x);
  return static_cast<double>(it - sorted_rates.begin()) /
         static_cast<double>(sorted_rates.size());
}

StoppingTimeStats stopping_time_stats(const SimStats& stats) {
  StoppingTimeStats out;
  double sum = 0.0;
  out.sorted_rates.reserve(stats.records.size());
  for (const auto& r : stats.records) {
    ++out.histogram[r.main_observations];
    sum += static_cast<double>(r.main_observations);
    out.sorted_rates.push_back(r.rate_at_stop);
  }
  if (!stats.records.empty()) out.mean = sum / static_cast<double>(stats.records.size());
  std::sort(out.sorted_rates.begin(), out.sorted_rates.end());
  return out;
}

}  // namespace relaystop
