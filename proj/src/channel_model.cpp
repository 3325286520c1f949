#include "relaystop/channel_model.hpp"

#include <sstream>

#include "relaystop/errors.hpp"

namespace relaystop {

double sample_gain_sq(Rng& rng, double variance) {
  if (!(variance > 0.0)) {
    std::ostringstream os;
    os << "variance: must be > 0, got " << variance;
    fail(ErrorKind::InvalidParameter, os.str());
  }
  std::exponential_distribution<double> exp(1.0 / variance);
  return exp(rng);
}

RelayRate best_relay_rate(const SystemParams& params,
                          const ChannelRealization& ch) {
  require(ch.has_second_hop(), ErrorKind::InvalidState,
          "best_relay_rate: second-hop gains are not observed");
  const auto n = static_cast<Eigen::Index>(params.L);
  require(ch.f_sq.size() == n && ch.g_sq.size() == n, ErrorKind::InvalidState,
          "best_relay_rate: gain vectors must have length L");

  const Eigen::ArrayXd rates =
      af_rate(params.p_s_power, params.p_r_power, ch.f_sq, ch.g_sq);
  // maxCoeff reports the first maximiser, i.e. the lowest relay index.
  Eigen::Index best = 0;
  const double rate = rates.maxCoeff(&best);
  return {rate, static_cast<std::size_t>(best)};
}

Eigen::ArrayXd best_relay_rates(const SystemParams& params,
                                const Eigen::ArrayXXd& f_sq,
                                const Eigen::ArrayXXd& g_sq) {
  return af_rate(params.p_s_power, params.p_r_power, f_sq, g_sq)
      .colwise()
      .maxCoeff()
      .transpose();
}

double sample_hop(Rng& rng, const HopModel& hop, double variance) {
  if (hop.deterministic()) return hop.point_value;
  return sample_gain_sq(rng, variance);
}

Eigen::ArrayXd sample_first_hop(Rng& rng, const SystemParams& params,
                                const ChannelModel& model) {
  Eigen::ArrayXd f(params.L);
  for (auto& v : f) v = sample_hop(rng, model.first_hop, params.sigma_f_sq);
  return f;
}

double sample_second_hop(Rng& rng, const SystemParams& params,
                         const ChannelModel& model) {
  return sample_hop(rng, model.second_hop, params.sigma_g_sq);
}

ChannelRealization sample_realization(Rng& rng, const SystemParams& params,
                                      const ChannelModel& model) {
  ChannelRealization ch;
  ch.f_sq = sample_first_hop(rng, params, model);
  ch.g_sq.resize(params.L);
  for (auto& v : ch.g_sq) v = sample_second_hop(rng, params, model);
  return ch;
}

}  // namespace relaystop
