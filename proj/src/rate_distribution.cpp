#include "relaystop/rate_distribution.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "relaystop/errors.hpp"

namespace relaystop {

RateDistribution::RateDistribution(Eigen::ArrayXd values, Eigen::ArrayXd weights)
    : values_(std::move(values)), weights_(std::move(weights)) {
  require(values_.size() > 0 && values_.size() == weights_.size(),
          ErrorKind::InvalidParameter,
          "rate distribution: need matching, nonempty values and weights");
  require((values_ >= 0.0).all() && values_.allFinite(), ErrorKind::InvalidParameter,
          "rate distribution: rates must be finite and >= 0");
  require((weights_ >= 0.0).all() && weights_.sum() > 0.0, ErrorKind::InvalidParameter,
          "rate distribution: weights must be >= 0 with positive total");
  weights_ /= weights_.sum();
}

RateDistribution RateDistribution::empirical(Eigen::ArrayXd samples) {
  const auto n = samples.size();
  require(n > 0, ErrorKind::InvalidParameter, "rate distribution: empty sample");
  return {std::move(samples), Eigen::ArrayXd::Constant(n, 1.0 / static_cast<double>(n))};
}

RateDistribution RateDistribution::point_mass(double rate) {
  return {Eigen::ArrayXd::Constant(1, rate), Eigen::ArrayXd::Ones(1)};
}

namespace {

// e^z E1(z) for z > 0; the asymptotic series takes over before e^z
// overflows.
double scaled_e1(double z) {
  if (z < 40.0) return -std::exp(z) * std::expint(-z);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = -term * k / z;
    if (std::abs(next) >= std::abs(term)) break;
    term = next;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum / z;
}

}  // namespace

ExponentialSecondHop::ExponentialSecondHop(const SystemParams& params,
                                           const Eigen::ArrayXd& f_sq,
                                           int quad_points)
    : inv_snr_g_(1.0 / (params.p_r_power * params.sigma_g_sq)),
      rule_(quad_points > 0 ? &gauss_legendre(quad_points) : nullptr) {
  require(f_sq.size() == params.L, ErrorKind::InvalidState,
          "sub-layer: first-hop gains must have length L");
  require((f_sq >= 0.0).all() && f_sq.allFinite(), ErrorKind::InvalidParameter,
          "sub-layer: first-hop gains must be finite and >= 0");
  snr_f_ = params.p_s_power * f_sq.min(kGainCap);
  scale_ = (1.0 + snr_f_) / (params.p_r_power * params.sigma_g_sq);
  saturation_ = snr_f_.log1p() / std::numbers::ln2;
}

double ExponentialSecondHop::relay_exponent(Eigen::Index j, double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= saturation_[j]) return std::numeric_limits<double>::infinity();
  // rate_j >= t  <=>  |g|^2 >= a (1 + ps f) / (pr (ps f - a)),  a = 2^t - 1
  const double a = std::expm1(t * std::numbers::ln2);
  const double denom = snr_f_[j] - a;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return a * scale_[j] / denom;
}

double ExponentialSecondHop::relay_tail(Eigen::Index j, double t) const {
  return std::exp(-relay_exponent(j, t));
}

// With x = -ln P(R_j >= t) as the variable, t(x) = log2(1 + s x / (c + x))
// and the tail integral becomes
//   int_{x0}^inf e^-x t'(x) dx = [e^u E1(u + x0) - e^c E1(c + x0)] / ln 2,
// where s = ps f, c = (1 + s) / (pr sigma_g^2) and u = c / (1 + s).
double ExponentialSecondHop::relay_excess(Eigen::Index j, double lambda) const {
  if (lambda >= saturation_[j]) return 0.0;
  if (rule_)
    return rule_->integrate([&](double t) { return relay_tail(j, t); }, lambda,
                            saturation_[j]);
  const double x0 = relay_exponent(j, lambda);
  const double diff = scaled_e1(inv_snr_g_ + x0) - scaled_e1(scale_[j] + x0);
  return std::max(diff, 0.0) * std::exp(-x0) / std::numbers::ln2;
}

double ExponentialSecondHop::tail_prob(double t) const {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < saturation_.size(); ++j) sum += relay_tail(j, t);
  return sum / static_cast<double>(saturation_.size());
}

double ExponentialSecondHop::expected_positive_part(double lambda) const {
  if (lambda < 0.0) return expected_positive_part(0.0) - lambda;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < saturation_.size(); ++j) sum += relay_excess(j, lambda);
  return sum / static_cast<double>(saturation_.size());
}

double SubLayerRate::tail_prob(double t) const {
  return std::visit([t](const auto& m) { return m.tail_prob(t); }, model_);
}

double SubLayerRate::expected_positive_part(double lambda) const {
  return std::visit([lambda](const auto& m) { return m.expected_positive_part(lambda); },
                    model_);
}

double SubLayerRate::sup() const {
  return std::visit([](const auto& m) { return m.sup(); }, model_);
}

SubLayerRate make_sub_layer(const SystemParams& params, const ChannelModel& model,
                            const Eigen::ArrayXd& f_sq, int quad_points) {
  if (model.second_hop.deterministic()) {
    const Eigen::ArrayXd g =
        Eigen::ArrayXd::Constant(f_sq.size(), model.second_hop.point_value);
    return SubLayerRate(RateDistribution(
        af_rate(params.p_s_power, params.p_r_power, f_sq, g),
        Eigen::ArrayXd::Ones(f_sq.size())));
  }
  return SubLayerRate(ExponentialSecondHop(params, f_sq, quad_points));
}

}  // namespace relaystop
