#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>

#include "relaystop/rng.hpp"
#include "relaystop/system_params.hpp"

namespace relaystop {

/// Squared gains are clamped here before any arithmetic.
inline constexpr double kGainCap = 1e300;

/// Squared channel gains seen by one winning source: |f_j|^2 towards each
/// relay and |g_j|^2 from each relay to the destination. `g_sq` is empty
/// when the second hop is unobserved.
struct ChannelRealization {
  Eigen::ArrayXd f_sq;
  Eigen::ArrayXd g_sq;

  bool has_second_hop() const { return g_sq.size() > 0; }
};

/// Distribution of one hop's squared gains. Rayleigh draws are exponential
/// with the variance from SystemParams; PointMass is a deterministic test
/// channel.
struct HopModel {
  enum class Kind { Rayleigh, PointMass };
  Kind kind = Kind::Rayleigh;
  double point_value = 0.0;

  static HopModel rayleigh() { return {}; }
  static HopModel point_mass(double v) { return {Kind::PointMass, v}; }
  bool deterministic() const { return kind == Kind::PointMass; }
};

struct ChannelModel {
  HopModel first_hop;
  HopModel second_hop;

  bool deterministic() const {
    return first_hop.deterministic() && second_hop.deterministic();
  }
};

struct RelayRate {
  double rate = 0.0;
  std::size_t relay = 0;  // zero-based
};

/// One draw of |h|^2 for h ~ CN(0, variance), i.e. Exp(mean = variance).
double sample_gain_sq(Rng& rng, double variance);

/// Achievable amplify-and-forward rate in bits/s/Hz:
///   log2(1 + ps pr f g / (1 + ps f + pr g)).
/// Evaluated as a/(1+a+b)*b so that capped gains never overflow.
template <typename Scalar>
Scalar af_rate(Scalar ps, Scalar pr, Scalar f_sq, Scalar g_sq) {
  using std::log1p;
  using std::min;
  const Scalar cap(kGainCap);
  const Scalar a = ps * min(f_sq, cap);
  const Scalar b = pr * min(g_sq, cap);
  const Scalar snr = a / (Scalar(1) + a + b) * b;
  return log1p(snr) / Scalar(std::numbers::ln2);
}

/// Coefficient-wise af_rate over arrays of equal shape.
template <typename DerivedF, typename DerivedG>
Eigen::Array<typename DerivedF::Scalar, DerivedF::RowsAtCompileTime,
             DerivedF::ColsAtCompileTime>
af_rate(typename DerivedF::Scalar ps, typename DerivedF::Scalar pr,
        const Eigen::ArrayBase<DerivedF>& f_sq,
        const Eigen::ArrayBase<DerivedG>& g_sq) {
  using Scalar = typename DerivedF::Scalar;
  const Scalar cap(kGainCap);
  const auto a = (ps * f_sq.derived().min(cap)).eval();
  const auto b = (pr * g_sq.derived().min(cap)).eval();
  return (a / (Scalar(1) + a + b) * b).log1p() / Scalar(std::numbers::ln2);
}

/// Supremum of af_rate over g_sq: log2(1 + ps f_sq).
template <typename Scalar>
Scalar rate_saturation(Scalar ps, Scalar f_sq) {
  using std::log1p;
  using std::min;
  return log1p(ps * min(f_sq, Scalar(kGainCap))) / Scalar(std::numbers::ln2);
}

/// Best-relay rate with ties going to the lowest index. Throws InvalidState
/// when the second hop is missing or the lengths disagree with params.L.
RelayRate best_relay_rate(const SystemParams& params,
                          const ChannelRealization& ch);

/// Column-wise best rate over an L x N block of realizations.
Eigen::ArrayXd best_relay_rates(const SystemParams& params,
                                const Eigen::ArrayXXd& f_sq,
                                const Eigen::ArrayXXd& g_sq);

double sample_hop(Rng& rng, const HopModel& hop, double variance);

/// Fresh first-hop gains for all L relays.
Eigen::ArrayXd sample_first_hop(Rng& rng, const SystemParams& params,
                                const ChannelModel& model);

/// Fresh second-hop gain of one relay.
double sample_second_hop(Rng& rng, const SystemParams& params,
                         const ChannelModel& model);

ChannelRealization sample_realization(Rng& rng, const SystemParams& params,
                                      const ChannelModel& model);

}  // namespace relaystop
