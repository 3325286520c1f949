#include <doctest.h>

#include <cmath>
#include <numbers>

#include "relaystop/errors.hpp"
#include "relaystop/threshold_solver.hpp"

using namespace relaystop;

namespace {

const double kUnitRateGain = 1.0 + std::numbers::sqrt2;  // af_rate(1,1,x,x) = 1

// T = 2, tau/p_s = 0.2.
SystemParams hook_params() {
  SystemParams p;
  p.tau = 0.2;
  p.t_data = 2.0;
  return p;
}

// T = 2, tau = 0.2, p_s = p_r = 0.5.
SystemParams bilevel_hook_params() {
  SystemParams p = hook_params();
  p.p0 = 0.5;
  p.p1 = 0.5;
  return p;
}

const ChannelModel kUnitRate{HopModel::point_mass(kUnitRateGain),
                             HopModel::point_mass(kUnitRateGain)};

SystemParams standard(int L = 2) {
  return SystemParams{4, L, 10.0, 10.0, 1.0, 1.0, 0.1, 1.0, 0.25, 0.5};
}

EstimatorConfig small_est(std::int64_t n = 2000) {
  EstimatorConfig e;
  e.mc_samples = n;
  return e;
}

RateDistribution two_point() {
  Eigen::ArrayXd v(2);
  v << 0.0, 2.0;
  return RateDistribution(v, Eigen::ArrayXd::Ones(2));
}

// Independent full-CSI fixed point for a finite distribution: on each
// interval between atoms G is linear, so solve it piecewise.
double finite_support_lambda(const SystemParams& p, const RateDistribution& d) {
  const double T = p.t_data, cost = p.tau / source_success_prob(p);
  for (double lam = 0.0;;) {
    double a = 0.0, b = 0.0;  // G(x) = a - b x on the current piece
    double next = INFINITY;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double knot = d.values()[i] / 2.0;
      if (knot > lam) {
        a += d.weights()[i] * T / 2.0 * d.values()[i];
        b += d.weights()[i] * T;
        next = std::min(next, knot);
      }
    }
    const double root = a / (b + cost);
    if (root <= next) return root;
    lam = next;
  }
}

}  // namespace

TEST_CASE("full-CSI expected positive part") {
  SystemParams p = standard();
  const EstimatorConfig est = small_est(5000);
  const RateDistribution rates = full_csi_rate_sample(p, {}, est);
  CHECK(expected_positive_part_full_csi(p, rates, 0.0) ==
        doctest::Approx(p.t_data / 2.0 * rates.mean()).epsilon(1e-14));
  CHECK(expected_positive_part_full_csi(p, rates, rates.sup() / 2.0) == 0.0);
  CHECK(expected_positive_part_full_csi(p, rates, rates.sup()) == 0.0);

  SystemParams h = hook_params();
  CHECK(expected_positive_part_full_csi(h, RateDistribution::point_mass(1.0), 0.25) ==
        doctest::Approx(0.5));
}

TEST_CASE("full-CSI closed forms") {
  const SystemParams p = hook_params();
  const EstimatorConfig est;
  const ThresholdSolution c = solve_full_csi_lambda(p, est, kUnitRate);
  CHECK(c.value == doctest::Approx(1.0 / 2.2).epsilon(1e-9));
  CHECK(std::abs(c.residual) <= est.tol);
  const ThresholdSolution c2 = solve_full_csi_lambda(p, RateDistribution::point_mass(1.0), est);
  CHECK(c2.value == doctest::Approx(1.0 / 2.2).epsilon(1e-9));

  const ThresholdSolution t = solve_full_csi_lambda(p, two_point(), est);
  CHECK(t.value == doctest::Approx(5.0 / 6.0).epsilon(1e-9));
  CHECK(t.value == doctest::Approx(finite_support_lambda(p, two_point())).epsilon(1e-9));
}

TEST_CASE("full-CSI agrees with a piecewise-linear oracle on random finite supports") {
  Rng rng = make_stream(8);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::ArrayXd v(7), w(7);
    for (int i = 0; i < 7; ++i) {
      v[i] = u(rng);
      w[i] = 0.1 + u(rng);
    }
    SystemParams p = standard();
    p.tau = 0.05 + u(rng) / 5.0;
    const RateDistribution d(v, w);
    const ThresholdSolution s = solve_full_csi_lambda(p, d, EstimatorConfig{});
    CHECK(s.value == doctest::Approx(finite_support_lambda(p, d)).epsilon(1e-8));
  }
}

TEST_CASE("full-CSI on Rayleigh channels: contract and uniqueness") {
  for (const SystemParams& p : {standard(), standard(1), SystemParams{8, 4, 1, 1, 1, 1, 0.5, 1, 0.125, 0.25}}) {
    const EstimatorConfig est = small_est(20000);
    const RateDistribution rates = full_csi_rate_sample(p, {}, est);
    const ThresholdSolution s = solve_full_csi_lambda(p, rates, est);
    CHECK(std::abs(s.residual) <= est.tol);
    CHECK(s.bracket_width() <= est.tol * std::max(1.0, s.value));
    CHECK(s.value > 0.0);
    int changes = 0;
    double prev = full_csi_residual(p, rates, 0.0);
    const double top = 2.0 * std::max(1.0, s.bracket_hi);
    for (int k = 1; k < 200; ++k) {
      const double g = full_csi_residual(p, rates, top * k / 199.0);
      if ((g < 0.0) != (prev < 0.0)) ++changes;
      prev = g;
    }
    CHECK(changes == 1);
  }
}

TEST_CASE("full-CSI solve is reproducible and sample-driven") {
  const SystemParams p = standard();
  EstimatorConfig a = small_est(5000), b = a;
  CHECK(solve_full_csi_lambda(p, a).value == solve_full_csi_lambda(p, b).value);
  b.seed = 2;
  CHECK(solve_full_csi_lambda(p, a).value != solve_full_csi_lambda(p, b).value);
}

TEST_CASE("full-CSI optimum does not decrease with more relays") {
  const EstimatorConfig est = small_est(20000);
  double prev = 0.0;
  for (int L : {1, 2, 4, 8}) {
    const double lam = solve_full_csi_lambda(standard(L), est).value;
    CHECK(lam >= prev);
    prev = lam;
  }
}

TEST_CASE("grid oracle") {
  const SystemParams p = hook_params();
  // Two-point hook, grid {0, 1}.
  OracleResult o = oracle_threshold_search(p, two_point(), {0.0, 1.0});
  CHECK(o.throughput[0] == doctest::Approx(1.0 / 2.2));
  CHECK(o.throughput[1] == doctest::Approx(5.0 / 6.0));
  CHECK(o.best_threshold == 1.0);
  CHECK(o.best_throughput == doctest::Approx(5.0 / 6.0).epsilon(1e-15));

  // Constant rate, grid containing 0.
  o = oracle_threshold_search(p, RateDistribution::point_mass(1.0), {0.0, 0.5, 1.0, 1.5});
  CHECK(o.best_throughput == doctest::Approx(1.0 / 2.2).epsilon(1e-15));
  CHECK(std::isnan(o.throughput[3]));

  // Singleton grid at 2 lambda* reproduces lambda*.
  const SystemParams s = standard();
  const EstimatorConfig est = small_est(20000);
  const RateDistribution rates = full_csi_rate_sample(s, {}, est);
  const double lam = solve_full_csi_lambda(s, rates, est).value;
  o = oracle_threshold_search(s, rates, {2.0 * lam});
  CHECK(o.best_throughput == doctest::Approx(lam).epsilon(1e-6));

  CHECK_THROWS_AS(oracle_threshold_search(p, two_point(), {}), Error);
  CHECK_THROWS_AS(oracle_threshold_search(p, two_point(), {3.0}), Error);
}

TEST_CASE("intuitive sub-layer closed forms") {
  SystemParams p = bilevel_hook_params();
  const EstimatorConfig est;
  const SubLayerStats zero = solve_sub_layer_intuitive(p, Eigen::ArrayXd::Zero(1), est);
  CHECK(zero.lambda_sub == 0.0);
  CHECK(zero.p_stop == 1.0);
  CHECK(zero.r1 == 0.0);
  CHECK(zero.r2 == doctest::Approx(1.0 + 0.2));

  const SubLayerRate unit = make_sub_layer(p, kUnitRate, Eigen::ArrayXd::Constant(1, kUnitRateGain), 0);
  const SubLayerStats st = solve_sub_layer_intuitive(p, unit, est);
  CHECK(st.lambda_sub == doctest::Approx(1.0 / 1.2).epsilon(1e-9));
  CHECK(st.p_stop == 1.0);
  CHECK(st.r2 == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(st.r1 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("intuitive sub-layer on Rayleigh second hops") {
  SystemParams p = standard(3);
  const EstimatorConfig est;
  Rng rng = make_stream(4);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::ArrayXd f = sample_first_hop(rng, p, {});
    const SubLayerStats st = solve_sub_layer_intuitive(p, f, est);
    const double sat = (f * p.p_s_power).log1p().maxCoeff() / std::numbers::ln2;
    CHECK(std::abs(st.residual) <= est.tol);
    CHECK(st.lambda_sub >= 0.0);
    CHECK(st.lambda_sub < sat);
    CHECK(st.r1 == st.lambda_sub * st.r2);
    CHECK(st.r2 >= p.t_data / 2.0);
  }
}

TEST_CASE("sub-layer W* closed forms") {
  SystemParams p = bilevel_hook_params();
  const EstimatorConfig est;
  const SubLayerRate unit = make_sub_layer(p, kUnitRate, Eigen::ArrayXd::Constant(1, kUnitRateGain), 0);
  const ThresholdSolution w = solve_sub_W(p, unit, 0.4, est);
  CHECK(w.value == doctest::Approx(0.52).epsilon(1e-9));
  CHECK(std::abs(w.residual) <= est.tol);

  // Rate identically zero: max(-(T/2) gamma - W, 0) = gamma tau / (2 p_r).
  const double gamma = 0.3;
  const ThresholdSolution z = solve_sub_W(p, Eigen::ArrayXd::Zero(1), gamma, est);
  const double expect = -p.t_data / 2.0 * gamma - gamma * p.tau / (2.0 * 0.5);
  CHECK(z.value == doctest::Approx(expect).epsilon(1e-9));
  CHECK(std::max(-p.t_data / 2.0 * gamma - z.value, 0.0) ==
        doctest::Approx(gamma * p.tau / (2.0 * 0.5)).epsilon(1e-9));

  // gamma = 0: least root is (T/2) times the supremum rate.
  SystemParams s = standard(2);
  Eigen::ArrayXd f(2);
  f << 0.5, 2.0;
  const ThresholdSolution top = solve_sub_W(s, f, 0.0, est);
  CHECK(top.value == doctest::Approx(s.t_data / 2.0 * std::log2(1.0 + 20.0)).epsilon(1e-14));
  CHECK(top.residual == 0.0);

  try {
    solve_sub_W(s, f, -0.1, est);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidParameter);
  }
}

TEST_CASE("W* is nonincreasing in gamma for each realization") {
  SystemParams p = standard(2);
  const EstimatorConfig est;
  Rng rng = make_stream(6);
  for (int i = 0; i < 100; ++i) {
    const Eigen::ArrayXd f = sample_first_hop(rng, p, {});
    double prev = INFINITY;
    for (int k = 0; k <= 40; ++k) {
      const double w = solve_sub_W(p, f, 0.05 * k, est).value;
      CHECK(w <= prev + 1e-12);
      prev = w;
    }
  }
}

TEST_CASE("bi-level closed forms on the deterministic hook") {
  const SystemParams p = bilevel_hook_params();
  const EstimatorConfig est;
  const double expect = (2.0 * 1.0 / 2.0) / (2.0 + 0.2 + 0.2);
  const ThresholdSolution gi = solve_main_gamma_intuitive(p, est, kUnitRate);
  const ThresholdSolution go = solve_main_gamma_optimal(p, est, kUnitRate);
  CHECK(std::abs(gi.value - expect) <= 1e-8);
  CHECK(std::abs(go.value - expect) <= 1e-8);
  CHECK(go.value == doctest::Approx(0.416667).epsilon(1e-6));
}

TEST_CASE("intuitive main layer on Rayleigh channels") {
  const SystemParams p = standard();
  const EstimatorConfig est = small_est();
  const auto sample = first_hop_sample(p, {}, est);
  const IntuitiveSolution sol = solve_main_intuitive(p, sample, est);
  double mean_r1 = 0.0;
  for (const auto& st : sol.stats) mean_r1 += st.r1;
  mean_r1 /= static_cast<double>(sol.stats.size());
  CHECK(main_residual_intuitive(p, sol.stats, 0.0) == doctest::Approx(mean_r1).epsilon(1e-14));
  CHECK(mean_r1 > 0.0);
  CHECK(std::abs(sol.gamma.residual) <= est.mc_tol);
  CHECK(std::abs(main_residual_intuitive(p, sol.stats, sol.gamma.value)) <= est.mc_tol);
}

TEST_CASE("optimal main layer: contract, shape and dominance") {
  const SystemParams p = standard();
  const EstimatorConfig est = small_est();
  const auto sample = first_hop_sample(p, {}, est);
  OptimalMainLayer layer(p, sample, est);
  const ThresholdSolution go = layer.solve();
  CHECK(std::abs(go.residual) <= est.mc_tol);

  // V(gamma) decreasing on a grid, with its sign change at gamma*.
  OptimalMainLayer fresh(p, sample, est);
  double prev = INFINITY;
  double last_positive = 0.0, first_negative = INFINITY;
  for (int k = 0; k <= 60; ++k) {
    const double g = 0.04 * k;
    const double v = fresh.residual(g);
    CHECK(v < prev);
    prev = v;
    if (v > 0.0) last_positive = g;
    if (v < 0.0) first_negative = std::min(first_negative, g);
  }
  CHECK(last_positive <= go.value);
  CHECK(go.value <= first_negative);
  CHECK(first_negative - last_positive == doctest::Approx(0.04));

  // J at gamma = 0 is (T/2) times the mean supremum rate.
  double mean_sup = 0.0;
  for (const auto& r : sample) mean_sup += r.sup();
  mean_sup /= static_cast<double>(sample.size());
  CHECK(fresh.residual(0.0) == doctest::Approx(p.t_data / 2.0 * mean_sup).epsilon(1e-14));

  // Residual does not depend on evaluation history beyond tolerance.
  OptimalMainLayer other(p, sample, est);
  CHECK(std::abs(other.residual(go.value) - fresh.residual(go.value)) <= 1e-9);

  // w_star agrees with the in-layer rate-unit solve.
  for (std::size_t i = 0; i < 20; ++i) {
    const double w = layer.w_star(i, go.value);
    CHECK(w == doctest::Approx(solve_sub_W(p, sample[i], go.value, est).value));
  }

  const ThresholdSolution gi = solve_main_intuitive(p, sample, est).gamma;
  CHECK(go.value >= gi.value - 10.0 * est.mc_tol);
}

TEST_CASE("optimal gamma does not decrease with a stronger second hop") {
  const EstimatorConfig est = small_est();
  double prev = 0.0;
  for (double sg : {0.5, 1.0, 2.0}) {
    SystemParams p = standard();
    p.sigma_g_sq = sg;
    const double g = solve_main_gamma_optimal(p, est).value;
    CHECK(g >= prev);
    prev = g;
  }
}

TEST_CASE("bi-level optimum at fixed relay success probability vs relay count") {
  // With the forwarding relay picked by contention rather than by channel,
  // extra relays dilute the first-hop selection gain. Pinned behaviour.
  const EstimatorConfig est = small_est(5000);
  const double p1_for[] = {0.4, 0.27639320225002106, 0.21805, 0.18415};
  double prev = INFINITY;
  for (int L = 1; L <= 4; ++L) {
    SystemParams p = standard(L);
    p.p1 = p1_for[L - 1];
    CHECK(relay_success_prob(p) == doctest::Approx(0.4).epsilon(1e-3));
    const double g = solve_main_gamma_optimal(p, est).value;
    CHECK(g < prev);
    prev = g;
  }
}

TEST_CASE("strict dominance gap configuration") {
  // Four relays, strong first hop, weak second hop.
  SystemParams p{4, 4, 10.0, 10.0, 4.0, 0.25, 0.1, 1.0, 0.25, 0.25};
  const EstimatorConfig est = small_est(5000);
  const auto sample = first_hop_sample(p, {}, est);
  const double gi = solve_main_intuitive(p, sample, est).gamma.value;
  const double go = solve_main_gamma_optimal(p, sample, est).value;
  CHECK(go - gi > 100.0 * est.mc_tol);
}

TEST_CASE("estimator and parameter validation") {
  EstimatorConfig e;
  e.max_iter = 10;
  CHECK_THROWS_AS(validate(e), Error);
  e = EstimatorConfig{};
  e.quad_points = 1;
  CHECK_THROWS_AS(validate(e), Error);
  e = EstimatorConfig{};
  e.tol = 0.0;
  CHECK_THROWS_AS(validate(e), Error);

  SystemParams p = standard();
  p.p0 = 1.0;
  try {
    solve_full_csi_lambda(p, EstimatorConfig{});
    FAIL("expected throw");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::InvalidParameter);
    CHECK(std::string(err.what()).find("p0") != std::string::npos);
  }
  p = standard();
  p.p1 = 0.0;
  CHECK_THROWS_AS(solve_main_gamma_optimal(p, small_est()), Error);
  CHECK_NOTHROW(solve_full_csi_lambda(p, small_est()));
}
