#include "relaystop/stopping_policies.hpp"

#include <cmath>
#include <string>

#include "relaystop/errors.hpp"

namespace relaystop {

const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::FullCsi: return "full-csi";
    case PolicyKind::IntuitiveBiLevel: return "intuitive-bilevel";
    case PolicyKind::OptimalBiLevel: return "optimal-bilevel";
  }
  return "?";
}

namespace {

void expect_kind(const PolicySpec& spec, PolicyKind kind, const char* op) {
  if (spec.kind != kind)
    fail(ErrorKind::InvalidPolicy, std::string(op) + ": expects a " + to_string(kind) +
                                       " policy, got " + to_string(spec.kind));
}

void expect_finite(double v, const char* name) {
  require(std::isfinite(v), ErrorKind::InvalidPolicy,
          std::string(name) + ": threshold must be finite");
}

Verdict verdict(bool stop) { return stop ? Verdict::Stop : Verdict::Continue; }

}  // namespace

PolicySpec PolicySpec::full_csi(double lambda_star) {
  expect_finite(lambda_star, "lambda_star");
  return {PolicyKind::FullCsi, lambda_star, 0.0};
}

PolicySpec PolicySpec::intuitive(double gamma_star) {
  expect_finite(gamma_star, "gamma_star");
  return {PolicyKind::IntuitiveBiLevel, 0.0, gamma_star};
}

PolicySpec PolicySpec::optimal(double gamma_star) {
  expect_finite(gamma_star, "gamma_star");
  return {PolicyKind::OptimalBiLevel, 0.0, gamma_star};
}

Decision full_csi_decide(const PolicySpec& spec, double rate, std::size_t best_relay) {
  expect_kind(spec, PolicyKind::FullCsi, "full_csi_decide");
  if (rate >= 2.0 * spec.lambda_star) return Stop{best_relay};
  return Continue{};
}

Verdict intuitive_main_decide(const PolicySpec& spec, const SubLayerStats& stats,
                              double t_data) {
  expect_kind(spec, PolicyKind::IntuitiveBiLevel, "intuitive_main_decide");
  const double g = spec.gamma_star;
  return verdict(stats.r1 - g * stats.r2 >= g * t_data / 2.0);
}

Verdict intuitive_sub_decide(double lambda_sub, double rate_m) {
  expect_finite(lambda_sub, "lambda_sub");
  return verdict(rate_m >= lambda_sub);
}

Verdict optimal_main_decide(const PolicySpec& spec, double w_star, double t_data) {
  expect_kind(spec, PolicyKind::OptimalBiLevel, "optimal_main_decide");
  return verdict(w_star >= t_data / 2.0 * spec.gamma_star);
}

Verdict optimal_sub_decide(const PolicySpec& spec, double w_star, double rate_m,
                           double t_data) {
  expect_kind(spec, PolicyKind::OptimalBiLevel, "optimal_sub_decide");
  const double h = t_data / 2.0;
  return verdict(h * rate_m >= w_star + h * spec.gamma_star);
}

}  // namespace relaystop
