#pragma once

#include <Eigen/Core>

#include <variant>

#include "relaystop/channel_model.hpp"
#include "relaystop/quadrature.hpp"
#include "relaystop/system_params.hpp"

namespace relaystop {

/// A finitely supported rate distribution: atoms `values` with
/// probabilities `weights` (normalised to sum to one). An empirical Monte
/// Carlo sample is the special case of equal weights.
class RateDistribution {
 public:
  RateDistribution() = default;
  RateDistribution(Eigen::ArrayXd values, Eigen::ArrayXd weights);

  static RateDistribution empirical(Eigen::ArrayXd samples);
  static RateDistribution point_mass(double rate);

  const Eigen::ArrayXd& values() const { return values_; }
  const Eigen::ArrayXd& weights() const { return weights_; }
  Eigen::Index size() const { return values_.size(); }

  double mean() const { return (weights_ * values_).sum(); }
  double sup() const { return values_.maxCoeff(); }

  /// P(R >= t)
  double tail_prob(double t) const {
    return (values_ >= t).select(weights_, 0.0).sum();
  }

  /// E[max(R - lambda, 0)]; valid for any real lambda.
  double expected_positive_part(double lambda) const {
    return (weights_ * (values_ - lambda).max(0.0)).sum();
  }

 private:
  Eigen::ArrayXd values_;
  Eigen::ArrayXd weights_;
};

/// Sub-layer rate R_m given first-hop gains when |g|^2 ~ Exp(sigma_g_sq)
/// and the winning relay is uniform over the L relays.
///
/// Tail probabilities are closed form (the AF rate inverts in |g|^2).
/// E[max(R - lambda, 0)] is the tail integral over [lambda, saturation];
/// with quad_points = 0 it is evaluated exactly through the exponential
/// integral, otherwise by Gauss-Legendre with that many nodes.
class ExponentialSecondHop {
 public:
  ExponentialSecondHop(const SystemParams& params, const Eigen::ArrayXd& f_sq,
                       int quad_points);

  double tail_prob(double t) const;
  double expected_positive_part(double lambda) const;
  double sup() const { return saturation_.maxCoeff(); }
  double mean() const { return expected_positive_part(0.0); }

  const Eigen::ArrayXd& saturation() const { return saturation_; }

 private:
  double relay_exponent(Eigen::Index j, double t) const;  // -ln P(R_j >= t)
  double relay_tail(Eigen::Index j, double t) const;
  double relay_excess(Eigen::Index j, double lambda) const;

  double inv_snr_g_;           // 1 / (pr * sigma_g_sq)
  Eigen::ArrayXd snr_f_;       // ps * f_sq
  Eigen::ArrayXd scale_;       // (1 + ps f) / (pr * sigma_g_sq)
  Eigen::ArrayXd saturation_;  // log2(1 + ps f)
  const GaussLegendre<double>* rule_ = nullptr;
};

/// Distribution of the sub-layer rate conditioned on one first-hop
/// realization: either the Rayleigh second hop or a finite-support hook.
class SubLayerRate {
 public:
  using Model = std::variant<ExponentialSecondHop, RateDistribution>;

  explicit SubLayerRate(ExponentialSecondHop m) : model_(std::move(m)) {}
  explicit SubLayerRate(RateDistribution m) : model_(std::move(m)) {}

  double tail_prob(double t) const;
  double expected_positive_part(double lambda) const;
  double sup() const;
  double mean() const { return expected_positive_part(0.0); }

  const Model& model() const { return model_; }

 private:
  Model model_;
};

/// Builds the sub-layer distribution for `f_sq` under `model`'s second hop.
/// A point-mass second hop gives L equiprobable atoms af_rate(f_j, g).
SubLayerRate make_sub_layer(const SystemParams& params, const ChannelModel& model,
                            const Eigen::ArrayXd& f_sq, int quad_points);

}  // namespace relaystop
