#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

#include "relaystop/channel_model.hpp"
#include "relaystop/rate_distribution.hpp"
#include "relaystop/root_finding.hpp"
#include "relaystop/system_params.hpp"

namespace relaystop {

/// How expectations are estimated and how tightly roots are solved.
///
/// First-hop (L-dimensional) expectations use a fixed, seed-determined
/// Monte Carlo sample reused for every evaluation; second-hop expectations
/// are deterministic (exact when quad_points = 0, else Gauss-Legendre).
/// `tol` bounds residuals of the deterministic per-realization equations,
/// `mc_tol` those of the outer Monte Carlo equations.
struct EstimatorConfig {
  std::int64_t mc_samples = 100'000;
  int quad_points = 0;
  std::uint64_t seed = 1;
  double tol = 1e-9;
  double mc_tol = 1e-6;
  int max_iter = 200;
};

void validate(const EstimatorConfig& est);

/// Intuitive-rule sub-layer quantities for one first-hop realization.
struct SubLayerStats {
  double lambda_sub = 0.0;  // maximal sub-layer throughput
  double r1 = 0.0;          // expected delivered bits, lambda_sub * r2
  double r2 = 0.0;          // expected sub-layer duration, >= T/2
  double p_stop = 1.0;      // P(R_m >= lambda_sub)
  double residual = 0.0;
};

// ---------------------------------------------------------------------------
// Full CSI: the winner sees both hops and stops when R >= 2 lambda*.

/// Fixed sample of best-relay rates for the full-CSI problem. Relay j's
/// gains come from their own substream, so the sample for L relays is a
/// prefix-extension of the sample for fewer relays.
RateDistribution full_csi_rate_sample(const SystemParams& params,
                                      const ChannelModel& model,
                                      const EstimatorConfig& est);

/// E[max((T/2) R - lambda T, 0)] over `rates`.
double expected_positive_part_full_csi(const SystemParams& params,
                                       const RateDistribution& rates,
                                       double lambda);
double expected_positive_part_full_csi(const SystemParams& params, double lambda,
                                       const EstimatorConfig& est);

/// G(lambda) = E[max((T/2) R - lambda T, 0)] - lambda tau / p_s.
double full_csi_residual(const SystemParams& params, const RateDistribution& rates,
                         double lambda);

ThresholdSolution solve_full_csi_lambda(const SystemParams& params,
                                        const RateDistribution& rates,
                                        const EstimatorConfig& est);
ThresholdSolution solve_full_csi_lambda(const SystemParams& params,
                                        const EstimatorConfig& est,
                                        const ChannelModel& model = {});

struct OracleResult {
  double best_threshold = 0.0;
  double best_throughput = 0.0;
  std::vector<double> throughput;  // per grid point, NaN where skipped
};

/// Brute-force renewal-reward evaluation of every pure threshold rule on
/// `grid`:
///   throughput(theta) = (T/2) E[R 1{R >= theta}] / (T P(R >= theta) + tau/p_s).
/// Grid points with P(R >= theta) = 0 are skipped.
OracleResult oracle_threshold_search(const SystemParams& params,
                                     const RateDistribution& rates,
                                     const std::vector<double>& grid);

// ---------------------------------------------------------------------------
// Sub-layer (second hop unobserved by the source).

/// P(R_m >= threshold) for a Rayleigh second hop, closed form.
double sub_layer_tail_prob(const SystemParams& params, const Eigen::ArrayXd& f_sq,
                           double threshold);

/// E[max(R_m - lambda, 0)] for a Rayleigh second hop.
double sub_layer_expected_positive_part(const SystemParams& params,
                                        const Eigen::ArrayXd& f_sq, double lambda,
                                        const EstimatorConfig& est);

/// Solves E[max(R_m - lambda, 0)] = lambda tau / (T p_r) and derives the
/// intuitive rule's r1, r2 and stop probability. A realization whose rate
/// is identically zero yields lambda_sub = 0, p_stop = 1, r1 = 0,
/// r2 = T/2 + tau/(2 p_r).
SubLayerStats solve_sub_layer_intuitive(const SystemParams& params,
                                        const SubLayerRate& rate,
                                        const EstimatorConfig& est);
SubLayerStats solve_sub_layer_intuitive(const SystemParams& params,
                                        const Eigen::ArrayXd& f_sq,
                                        const EstimatorConfig& est);

/// W*(gamma): root of E[max((T/2) R_m - (T/2) gamma - W, 0)] = gamma tau / (2 p_r).
/// The sub-layer stops when (T/2) R_m >= W* + (T/2) gamma. `guess` only
/// seeds the iteration.
ThresholdSolution solve_sub_W(const SystemParams& params, const SubLayerRate& rate,
                              double gamma, const EstimatorConfig& est,
                              std::optional<double> guess = std::nullopt);
ThresholdSolution solve_sub_W(const SystemParams& params, const Eigen::ArrayXd& f_sq,
                              double gamma, const EstimatorConfig& est);

// ---------------------------------------------------------------------------
// Main layer of the bi-level problems.

/// Fixed set of first-hop realizations (sub-layer distributions), one per
/// Monte Carlo sample, or a single one when the channel is deterministic.
std::vector<SubLayerRate> first_hop_sample(const SystemParams& params,
                                           const ChannelModel& model,
                                           const EstimatorConfig& est);

/// H(gamma) = mean[max(r1 - gamma r2 - gamma T/2, 0)] - gamma tau / (2 p_s).
double main_residual_intuitive(const SystemParams& params,
                               const std::vector<SubLayerStats>& stats, double gamma);

struct IntuitiveSolution {
  ThresholdSolution gamma;
  std::vector<SubLayerStats> stats;  // per sample realization
};

IntuitiveSolution solve_main_intuitive(const SystemParams& params,
                                       const std::vector<SubLayerRate>& sample,
                                       const EstimatorConfig& est);
ThresholdSolution solve_main_gamma_intuitive(const SystemParams& params,
                                             const EstimatorConfig& est,
                                             const ChannelModel& model = {});

/// Evaluates J(gamma) = mean[max(W*_i(gamma) - (T/2) gamma, 0)] - tau gamma / (2 p_s)
/// over a fixed sample. Keeps per-realization warm starts between calls;
/// results do not depend on the call history beyond solver tolerance.
/// At gamma = 0 the sub-layer equation degenerates and W*(0) is taken as
/// its least root, (T/2) times the supremum rate. `sample` must outlive
/// the object.
class OptimalMainLayer {
 public:
  OptimalMainLayer(const SystemParams& params, const std::vector<SubLayerRate>& sample,
                   const EstimatorConfig& est);

  double residual(double gamma);
  ThresholdSolution solve();

  /// Value of the sub-layer threshold for realization i at gamma.
  double w_star(std::size_t i, double gamma) const;

 private:
  SystemParams params_;
  const std::vector<SubLayerRate>& sample_;
  EstimatorConfig est_;
  std::vector<double> warm_;       // last solved sub-layer rate threshold s_i
  std::vector<double> zero_from_;  // gamma at which realization i stopped contributing
};

ThresholdSolution solve_main_gamma_optimal(const SystemParams& params,
                                           const std::vector<SubLayerRate>& sample,
                                           const EstimatorConfig& est);
ThresholdSolution solve_main_gamma_optimal(const SystemParams& params,
                                           const EstimatorConfig& est,
                                           const ChannelModel& model = {});

}  // namespace relaystop
