#include "relaystop/threshold_solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "relaystop/errors.hpp"

namespace relaystop {

void validate(const EstimatorConfig& est) {
  require(est.mc_samples >= 1, ErrorKind::InvalidParameter, "mc_samples: must be >= 1");
  require(est.quad_points == 0 || est.quad_points >= 2, ErrorKind::InvalidParameter,
          "quad_points: must be 0 (exact) or >= 2");
  require(est.tol > 0.0, ErrorKind::InvalidParameter, "tol: must be > 0");
  require(est.mc_tol > 0.0, ErrorKind::InvalidParameter, "mc_tol: must be > 0");
  require(est.max_iter >= 50, ErrorKind::InvalidParameter, "max_iter: must be >= 50");
}

namespace {

double half(const SystemParams& p) { return p.t_data / 2.0; }

// Fills an L x N block; row j is drawn from its own substream so that a
// sample for L relays extends the sample for fewer relays.
Eigen::ArrayXXd sample_hop_block(const SystemParams& params, const HopModel& hop,
                                 double variance, std::uint64_t seed,
                                 std::uint64_t stream_base, Eigen::Index n) {
  Eigen::ArrayXXd out(params.L, n);
  for (Eigen::Index j = 0; j < params.L; ++j) {
    Rng rng = make_stream(seed, stream_base + static_cast<std::uint64_t>(j));
    for (Eigen::Index i = 0; i < n; ++i) out(j, i) = sample_hop(rng, hop, variance);
  }
  return out;
}

double outer_tol(const EstimatorConfig& est, std::size_t sample_size) {
  return sample_size > 1 ? est.mc_tol : est.tol;
}

}  // namespace

// ---------------------------------------------------------------------------
// Full CSI

RateDistribution full_csi_rate_sample(const SystemParams& params,
                                      const ChannelModel& model,
                                      const EstimatorConfig& est) {
  validate(params, false);
  validate(est);
  if (model.deterministic()) {
    const double r = af_rate(params.p_s_power, params.p_r_power,
                             model.first_hop.point_value, model.second_hop.point_value);
    return RateDistribution::point_mass(r);
  }
  const auto n = static_cast<Eigen::Index>(est.mc_samples);
  const Eigen::ArrayXXd f = sample_hop_block(params, model.first_hop, params.sigma_f_sq,
                                             est.seed, streams::kFirstHop, n);
  const Eigen::ArrayXXd g = sample_hop_block(params, model.second_hop, params.sigma_g_sq,
                                             est.seed, streams::kSecondHop, n);
  return RateDistribution::empirical(best_relay_rates(params, f, g));
}

double expected_positive_part_full_csi(const SystemParams& params,
                                       const RateDistribution& rates, double lambda) {
  const double T = params.t_data;
  return (rates.weights() * (half(params) * rates.values() - lambda * T).max(0.0)).sum();
}

double expected_positive_part_full_csi(const SystemParams& params, double lambda,
                                       const EstimatorConfig& est) {
  return expected_positive_part_full_csi(params, full_csi_rate_sample(params, {}, est),
                                         lambda);
}

double full_csi_residual(const SystemParams& params, const RateDistribution& rates,
                         double lambda) {
  const double ps = source_success_prob(params);
  return expected_positive_part_full_csi(params, rates, lambda) - lambda * params.tau / ps;
}

ThresholdSolution solve_full_csi_lambda(const SystemParams& params,
                                        const RateDistribution& rates,
                                        const EstimatorConfig& est) {
  validate(params, false);
  validate(est);
  auto G = [&](double lambda) { return full_csi_residual(params, rates, lambda); };
  const double g0 = G(0.0);
  if (g0 == 0.0) return {0.0, 0.0, 0, 0.0, 0.0};
  const auto [hi, g_hi] = expand_upper_bracket(G, 1.0, est.max_iter, "full-CSI lambda");
  return bisect_decreasing(G, 0.0, hi, g0, g_hi, est.tol, est.max_iter, "full-CSI lambda");
}

ThresholdSolution solve_full_csi_lambda(const SystemParams& params,
                                        const EstimatorConfig& est,
                                        const ChannelModel& model) {
  return solve_full_csi_lambda(params, full_csi_rate_sample(params, model, est), est);
}

OracleResult oracle_threshold_search(const SystemParams& params,
                                     const RateDistribution& rates,
                                     const std::vector<double>& grid) {
  require(!grid.empty(), ErrorKind::InvalidParameter, "oracle grid: must be nonempty");
  const double T = params.t_data;
  const double cost = params.tau / source_success_prob(params);

  OracleResult out;
  out.throughput.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  out.best_throughput = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double p_stop = 0.0, stopped_rate = 0.0;
    for (Eigen::Index i = 0; i < rates.size(); ++i) {
      if (rates.values()[i] >= grid[k]) {
        p_stop += rates.weights()[i];
        stopped_rate += rates.weights()[i] * rates.values()[i];
      }
    }
    if (p_stop <= 0.0) continue;
    const double thr = (T / 2.0) * stopped_rate / (T * p_stop + cost);
    out.throughput[k] = thr;
    if (thr > out.best_throughput) {
      out.best_throughput = thr;
      out.best_threshold = grid[k];
    }
  }
  require(std::isfinite(out.best_throughput), ErrorKind::InvalidParameter,
          "oracle grid: every threshold has zero stopping probability");
  return out;
}

// ---------------------------------------------------------------------------
// Sub-layer

double sub_layer_tail_prob(const SystemParams& params, const Eigen::ArrayXd& f_sq,
                           double threshold) {
  return ExponentialSecondHop(params, f_sq, 2).tail_prob(threshold);
}

double sub_layer_expected_positive_part(const SystemParams& params,
                                        const Eigen::ArrayXd& f_sq, double lambda,
                                        const EstimatorConfig& est) {
  return ExponentialSecondHop(params, f_sq, est.quad_points).expected_positive_part(lambda);
}

SubLayerStats solve_sub_layer_intuitive(const SystemParams& params,
                                        const SubLayerRate& rate,
                                        const EstimatorConfig& est) {
  const double T = params.t_data;
  const double pr = relay_success_prob(params);
  const double slope = params.tau / (T * pr);

  SubLayerStats st;
  const double sup = rate.sup();
  if (sup <= 0.0) {
    st.r2 = T / 2.0 + params.tau / (2.0 * pr);
    return st;
  }

  auto fd = [&](double lambda) {
    return std::pair{rate.expected_positive_part(lambda) - slope * lambda,
                     -rate.tail_prob(lambda) - slope};
  };
  const double guess = rate.mean() / (1.0 + slope);
  const ThresholdSolution sol =
      newton_decreasing(fd, 0.0, sup, guess, est.tol, est.max_iter, "sub-layer lambda");

  st.lambda_sub = sol.value;
  st.residual = sol.residual;
  st.p_stop = rate.tail_prob(st.lambda_sub);
  st.r2 = T / 2.0 + params.tau / (2.0 * pr * st.p_stop);
  st.r1 = st.lambda_sub * st.r2;
  return st;
}

SubLayerStats solve_sub_layer_intuitive(const SystemParams& params,
                                        const Eigen::ArrayXd& f_sq,
                                        const EstimatorConfig& est) {
  return solve_sub_layer_intuitive(
      params, SubLayerRate(ExponentialSecondHop(params, f_sq, est.quad_points)), est);
}

ThresholdSolution solve_sub_W(const SystemParams& params, const SubLayerRate& rate,
                              double gamma, const EstimatorConfig& est,
                              std::optional<double> guess) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    std::ostringstream os;
    os << "gamma: must be finite and >= 0, got " << gamma;
    fail(ErrorKind::InvalidParameter, os.str());
  }
  const double h = half(params);
  const double pr = relay_success_prob(params);
  const double cost = gamma * params.tau / (2.0 * pr);
  const double sup = rate.sup();

  const double lo = -h * gamma - cost;   // residual >= 0 here
  const double hi = h * (sup - gamma);   // residual = -cost <= 0 here
  // With gamma = 0 every W >= hi solves the equation; report the least root.
  if (cost == 0.0 || lo >= hi) return {hi, 0.0, 0, hi, hi};

  auto fd = [&](double w) {
    const double s = gamma + w / h;
    return std::pair{h * rate.expected_positive_part(s) - cost, -rate.tail_prob(s)};
  };
  const double x0 = guess.value_or(h * (rate.mean() - gamma) - cost);
  return newton_decreasing(fd, lo, hi, x0, est.tol, est.max_iter, "sub-layer W*");
}

ThresholdSolution solve_sub_W(const SystemParams& params, const Eigen::ArrayXd& f_sq,
                              double gamma, const EstimatorConfig& est) {
  return solve_sub_W(params, SubLayerRate(ExponentialSecondHop(params, f_sq, est.quad_points)),
                     gamma, est);
}

// ---------------------------------------------------------------------------
// Main layer

std::vector<SubLayerRate> first_hop_sample(const SystemParams& params,
                                           const ChannelModel& model,
                                           const EstimatorConfig& est) {
  validate(params, true);
  validate(est);
  std::vector<SubLayerRate> out;
  if (model.first_hop.deterministic()) {
    const Eigen::ArrayXd f = Eigen::ArrayXd::Constant(params.L, model.first_hop.point_value);
    out.push_back(make_sub_layer(params, model, f, est.quad_points));
    return out;
  }
  const auto n = static_cast<Eigen::Index>(est.mc_samples);
  const Eigen::ArrayXXd f = sample_hop_block(params, model.first_hop, params.sigma_f_sq,
                                             est.seed, streams::kFirstHop, n);
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    out.push_back(make_sub_layer(params, model, f.col(i), est.quad_points));
  return out;
}

double main_residual_intuitive(const SystemParams& params,
                               const std::vector<SubLayerStats>& stats, double gamma) {
  const double h = half(params);
  double sum = 0.0;
  for (const auto& st : stats) sum += std::max(st.r1 - gamma * st.r2 - gamma * h, 0.0);
  const double ps = source_success_prob(params);
  return sum / static_cast<double>(stats.size()) - gamma * params.tau / (2.0 * ps);
}

IntuitiveSolution solve_main_intuitive(const SystemParams& params,
                                       const std::vector<SubLayerRate>& sample,
                                       const EstimatorConfig& est) {
  validate(params, true);
  validate(est);
  require(!sample.empty(), ErrorKind::InvalidParameter, "first-hop sample: empty");
  IntuitiveSolution out;
  out.stats.reserve(sample.size());
  for (const auto& rate : sample) out.stats.push_back(solve_sub_layer_intuitive(params, rate, est));

  auto H = [&](double gamma) { return main_residual_intuitive(params, out.stats, gamma); };
  const double h0 = H(0.0);
  if (h0 == 0.0) {
    out.gamma = {0.0, 0.0, 0, 0.0, 0.0};
    return out;
  }
  const auto [hi, h_hi] = expand_upper_bracket(H, 1.0, est.max_iter, "intuitive gamma");
  out.gamma = bisect_decreasing(H, 0.0, hi, h0, h_hi, outer_tol(est, sample.size()),
                                est.max_iter, "intuitive gamma");
  return out;
}

ThresholdSolution solve_main_gamma_intuitive(const SystemParams& params,
                                             const EstimatorConfig& est,
                                             const ChannelModel& model) {
  return solve_main_intuitive(params, first_hop_sample(params, model, est), est).gamma;
}

OptimalMainLayer::OptimalMainLayer(const SystemParams& params,
                                   const std::vector<SubLayerRate>& sample,
                                   const EstimatorConfig& est)
    : params_(params),
      sample_(sample),
      est_(est),
      warm_(sample.size(), -1.0),
      zero_from_(sample.size(), std::numeric_limits<double>::infinity()) {
  validate(params_, true);
  validate(est_);
  require(!sample_.empty(), ErrorKind::InvalidParameter, "first-hop sample: empty");
}

double OptimalMainLayer::residual(double gamma) {
  require(gamma >= 0.0, ErrorKind::InvalidParameter, "gamma: must be >= 0");
  const double h = half(params_);
  const double ps = source_success_prob(params_);
  const double pr = relay_success_prob(params_);
  // In rate units the sub-layer threshold s = gamma + W/h solves
  // E[max(R - s, 0)] = target, and W - h gamma = h (s - 2 gamma).
  const double target = gamma * params_.tau / (params_.t_data * pr);
  const double s_tol = est_.tol / h;

  double sum = 0.0;
  for (std::size_t i = 0; i < sample_.size(); ++i) {
    const SubLayerRate& rate = sample_[i];
    if (gamma == 0.0) {
      sum += h * rate.sup();
      continue;
    }
    // W*_i(gamma) - h gamma decreases in gamma, so a realization that
    // contributes nothing at some gamma contributes nothing above it.
    if (gamma >= zero_from_[i]) continue;
    const double lo = 2.0 * gamma;
    const double sup = rate.sup();
    if (lo >= sup || rate.expected_positive_part(lo) <= target) {
      zero_from_[i] = gamma;
      continue;
    }

    auto fd = [&](double s) {
      return std::pair{rate.expected_positive_part(s) - target, -rate.tail_prob(s)};
    };
    const double x0 = warm_[i] > lo ? warm_[i] : 0.5 * (lo + sup);
    const ThresholdSolution sol =
        newton_decreasing(fd, lo, sup, x0, s_tol, est_.max_iter, "sub-layer W*");
    warm_[i] = sol.value;
    sum += h * (sol.value - lo);
  }
  return sum / static_cast<double>(sample_.size()) - gamma * params_.tau / (2.0 * ps);
}

double OptimalMainLayer::w_star(std::size_t i, double gamma) const {
  return solve_sub_W(params_, sample_.at(i), gamma, est_).value;
}

ThresholdSolution OptimalMainLayer::solve() {
  auto J = [this](double gamma) { return residual(gamma); };
  const double j0 = residual(0.0);
  if (j0 == 0.0) return {0.0, 0.0, 0, 0.0, 0.0};
  const auto [hi, j_hi] = expand_upper_bracket(J, 1.0, est_.max_iter, "optimal gamma");
  return bisect_decreasing(J, 0.0, hi, j0, j_hi, outer_tol(est_, sample_.size()),
                           est_.max_iter, "optimal gamma");
}

ThresholdSolution solve_main_gamma_optimal(const SystemParams& params,
                                           const std::vector<SubLayerRate>& sample,
                                           const EstimatorConfig& est) {
  OptimalMainLayer layer(params, sample, est);
  return layer.solve();
}

ThresholdSolution solve_main_gamma_optimal(const SystemParams& params,
                                           const EstimatorConfig& est,
                                           const ChannelModel& model) {
  const auto sample = first_hop_sample(params, model, est);
  return solve_main_gamma_optimal(params, sample, est);
}

}  // namespace relaystop
