// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "relaystop/errors.hpp"
#include "relaystop/experiment.hpp"
#include "relaystop/protocol_simulator.hpp"
#include "relaystop/threshold_solver.hpp"
#include "support/stats.hpp"

using namespace relaystop;

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects sub-checks of one criterion.
class Criterion {
 public:
  void check(bool ok, const std::string& what) {
    ok_ = ok_ && ok;
    if (!notes_.empty()) notes_ += "; ";
    notes_ += (ok ? "" : "[X] ") + what;
  }
  bool ok() const { return ok_; }
  const std::string& notes() const { return notes_; }

 private:
  bool ok_ = true;
  std::string notes_;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const double kUnitRateGain = 1.0 + std::numbers::sqrt2;  // af_rate(1,1,x,x) = 1
const ChannelModel kUnitRate{HopModel::point_mass(kUnitRateGain),
                             HopModel::point_mass(kUnitRateGain)};

struct Named {
  const char* name;
  SystemParams p;
};

const Named kStandard[] = {
    {"A", {4, 2, 10.0, 10.0, 1.0, 1.0, 0.1, 1.0, 0.25, 0.5}},
    {"B", {8, 4, 1.0, 1.0, 1.0, 1.0, 0.5, 1.0, 0.125, 0.25}},
    {"C", {2, 1, 100.0, 10.0, 1.0, 2.0, 0.05, 2.0, 0.5, 1.0}},
};
const SystemParams& kA = kStandard[0].p;

EstimatorConfig est_n(std::int64_t n, std::uint64_t seed = 1) {
  EstimatorConfig e;
  e.mc_samples = n;
  e.seed = seed;
  return e;
}

SimConfig sim_n(std::int64_t packets, std::uint64_t seed = 1) {
  SimConfig c;
  c.packets = packets;
  c.seed = seed;
  return c;
}

// Every estimator and simulator run uses master seed 1 (the CLI default)
// unless a check needs an independent draw.

// Results shared between criteria.
struct Shared {
  double lambda_a = 0.0;  // scenario-1 threshold of config A, 10^6 samples
  SimStats sim_a;         // 10^5 packets at 2 lambda_a
};

// ---------------------------------------------------------------------------

Criterion fixed_point() {
  Criterion c;
  for (const Named& cfg : kStandard) {
    const auto t0 = Clock::now();
    const EstimatorConfig est = est_n(100'000);
    const RateDistribution rates = full_csi_rate_sample(cfg.p, {}, est);
    const ThresholdSolution s = solve_full_csi_lambda(cfg.p, rates, est);
    const double g = full_csi_residual(cfg.p, rates, s.value);
    int changes = 0;
    const double top = 2.0 * std::max(1.0, s.bracket_hi);
    double prev = full_csi_residual(cfg.p, rates, 0.0);
    for (int k = 1; k < 200; ++k) {
      const double v = full_csi_residual(cfg.p, rates, top * k / 199.0);
      if ((v < 0.0) != (prev < 0.0)) ++changes;
      prev = v;
    }
    const double t = seconds(t0);
    c.check(std::abs(g) <= 1e-6 && changes == 1 && t < 30.0,
            std::string(cfg.name) + fmt(": lambda*=%.6f |G|=%.1e", s.value, std::abs(g)) +
                " sign changes=" + std::to_string(changes) + fmt(" %.2fs", t));
  }
  return c;
}

Criterion oracle_agreement() {
  Criterion c;
  for (const Named& cfg : kStandard) {
    const EstimatorConfig est = est_n(100'000);
    const RateDistribution rates = full_csi_rate_sample(cfg.p, {}, est);
    const double lam = solve_full_csi_lambda(cfg.p, rates, est).value;
    const double step = rates.sup() / 499.0;
    std::vector<double> grid(500);
    for (int k = 0; k < 500; ++k) grid[k] = step * k;
    const OracleResult o = oracle_threshold_search(cfg.p, rates, grid);
    const double rel = std::abs(o.best_throughput - lam) / lam;
    const double dist = std::abs(o.best_threshold - 2.0 * lam);
    c.check(rel <= 0.005 && dist <= step,
            std::string(cfg.name) + fmt(": rel thr delta %.1e, threshold delta %.4f vs step %.4f",
                                        rel, dist, step));
  }
  // Two-point hook through the report layer: T=2, tau/p_s=0.2.
  json doc{{"schema_version", kSchemaVersion},
           {"params", {{"tau", 0.2}, {"t_data", 2.0}}},
           {"channel", {{"rate_distribution", {{"values", {0.0, 2.0}}, {"weights", {1.0, 1.0}}}}}}};
  const ReportSummary r = cmd_oracle(parse_config(doc));
  const double lam = r.results["thresholds"][0]["value"].get<double>();
  const double best = r.results["oracle"]["best_throughput"].get<double>();
  c.check(std::abs(lam - 5.0 / 6.0) <= 1e-9 && std::abs(best - 5.0 / 6.0) <= 1e-15 && r.all_pass(),
          fmt("two-point: lambda*=%.12f oracle=%.15f", lam, best));
  return c;
}

Criterion scenario1_consistency(Shared& sh) {
  Criterion c;
  const auto t0 = Clock::now();
  sh.lambda_a = solve_full_csi_lambda(kA, est_n(1'000'000)).value;
  sh.sim_a = run_scenario1(kA, PolicySpec::full_csi(sh.lambda_a), sim_n(100'000));
  const double t = seconds(t0);
  const double se = *sh.sim_a.throughput_stderr;
  const double diff = std::abs(sh.sim_a.throughput - sh.lambda_a);
  c.check(diff <= 3.0 * se, fmt("|%.5f - %.5f| <= 3*%.5f", sh.sim_a.throughput, sh.lambda_a, se));
  c.check(se / sh.sim_a.throughput < 0.005, fmt("relative stderr %.4f%%", 100.0 * se / sh.sim_a.throughput));
  c.check(t < 120.0, fmt("%.1fs", t));
  return c;
}

Criterion stopping_time(const Shared& sh) {
  Criterion c;
  const double thr = 2.0 * sh.lambda_a;
  // Independent draw for the rate distribution.
  const RateDistribution ref = full_csi_rate_sample(kA, {}, est_n(1'000'000, 977));
  const double q = ref.tail_prob(thr);  // 1 - F(2 lambda*)
  const StoppingTimeStats st = stopping_time_stats(sh.sim_a);
  const double n = static_cast<double>(sh.sim_a.records.size());

  std::vector<double> obs, expct;
  const std::int64_t top = st.histogram.rbegin()->first;
  for (std::int64_t k = 1; k <= top; ++k) {
    const auto it = st.histogram.find(k);
    obs.push_back(it == st.histogram.end() ? 0.0 : static_cast<double>(it->second));
    expct.push_back(n * q * std::pow(1.0 - q, static_cast<double>(k - 1)));
  }
  expct.back() = n * std::pow(1.0 - q, static_cast<double>(top - 1));  // P(N >= top)
  const testsupport::GofResult chi = testsupport::chi_square_gof(obs, expct);
  c.check(chi.p_value > 0.01, fmt("chi-square p=%.3f (dof %.0f)", chi.p_value, static_cast<double>(chi.dof)));

  c.check(std::abs(st.mean * q - 1.0) <= 0.02, fmt("mean N %.4f vs %.4f", st.mean, 1.0 / q));

  double contention = 0.0;
  for (const auto& r : sh.sim_a.records) contention += r.elapsed - kA.t_data;
  contention /= n;
  const double wald = kA.tau / source_success_prob(kA) * st.mean;
  c.check(std::abs(contention / wald - 1.0) <= 0.02,
          fmt("contention time %.4f vs %.4f", contention, wald));

  c.check(st.sorted_rates.front() >= thr, fmt("min rate at stop %.5f >= %.5f", st.sorted_rates.front(), thr));

  std::vector<double> truncated;
  for (Eigen::Index i = 0; i < ref.size(); ++i)
    if (ref.values()[i] >= thr) truncated.push_back(ref.values()[i]);
  const testsupport::GofResult ks = testsupport::ks_two_sample(st.sorted_rates, truncated);
  c.check(ks.p_value > 0.01, fmt("KS D=%.4f p=%.3f", ks.statistic, ks.p_value));
  return c;
}

Criterion local_optimality(const Shared& sh) {
  Criterion c;
  // Common simulator seed across arms.
  const SimConfig cfg = sim_n(100'000);
  for (const Named* named : {&kStandard[0], &kStandard[2]}) {
    const SystemParams& p = named->p;
    const double lam =
        named == &kStandard[0] ? sh.lambda_a : solve_full_csi_lambda(p, est_n(1'000'000)).value;
    const SimStats mid = named == &kStandard[0] ? sh.sim_a
                                                : run_scenario1(p, PolicySpec::full_csi(lam), cfg);
    for (double m : {0.8, 1.2}) {
      const SimStats arm = run_scenario1(p, PolicySpec::full_csi(m * lam), cfg);
      const double margin = mid.throughput - arm.throughput;
      const double pooled = 3.0 * std::hypot(*mid.throughput_stderr, *arm.throughput_stderr);
      c.check(margin > pooled, std::string(named->name) +
                                   fmt(" x%.1f: margin %.5f > %.5f", m, margin, pooled));
    }
  }
  return c;
}

Criterion bilevel_closed_forms() {
  Criterion c;
  const EstimatorConfig est;
  // p_s = p_r = 0.5: gamma* = 1 / (2 + 0.2 + 0.2).
  SystemParams half;
  half.tau = 0.2;
  half.t_data = 2.0;
  half.p0 = 0.5;
  half.p1 = 0.5;
  const double expect = (half.t_data / 2.0) / (half.t_data + half.tau / 1.0 + half.tau / 1.0);
  const double gi = solve_main_gamma_intuitive(half, est, kUnitRate).value;
  const double go = solve_main_gamma_optimal(half, est, kUnitRate).value;
  c.check(std::abs(gi - expect) <= 1e-8 && std::abs(go - expect) <= 1e-8,
          fmt("p=1/2: intuitive %.10f optimal %.10f expect %.10f", gi, go, expect));

  // Certain contention makes every cycle identical.
  SystemParams one = half;
  one.p0 = 1.0;
  one.p1 = 1.0;
  const double expect1 = (one.t_data / 2.0) / (one.t_data + one.tau / 2.0 + one.tau / 2.0);
  for (const bool optimal : {false, true}) {
    const double g = optimal ? solve_main_gamma_optimal(one, est, kUnitRate).value
                             : solve_main_gamma_intuitive(one, est, kUnitRate).value;
    const PolicySpec spec = optimal ? PolicySpec::optimal(g) : PolicySpec::intuitive(g);
    const SimStats s = run_scenario2(one, spec, sim_n(10'000), est, kUnitRate);
    c.check(std::abs(g - expect1) <= 1e-8 && std::abs(s.throughput - expect1) <= 1e-12 &&
                *s.throughput_stderr == 0.0,
            std::string(optimal ? "optimal" : "intuitive") +
                fmt(" p=1: gamma %.10f sim %.12f stderr %.1e", g, s.throughput, *s.throughput_stderr));
  }
  return c;
}

Criterion optimal_consistency() {
  Criterion c;
  const EstimatorConfig est = est_n(200'000);
  const auto t0 = Clock::now();
  const ThresholdSolution go = solve_main_gamma_optimal(kA, est);
  const double t_solve = seconds(t0);
  std::int64_t capped = 0;
  SimStats s;
  try {
    s = run_scenario2(kA, PolicySpec::optimal(go.value), sim_n(100'000), est);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::CappedPacket) throw;
    capped = 1;
  }
  c.check(capped == 0, "capped packets 0");
  if (capped) return c;
  const double se = *s.throughput_stderr;
  c.check(std::abs(s.throughput - go.value) <= 3.0 * se,
          fmt("|%.5f - %.5f| <= 3*%.5f", s.throughput, go.value, se) + fmt(" (solve %.1fs)", t_solve));
  return c;
}

Criterion intuitive_consistency_and_dominance() {
  Criterion c;
  const EstimatorConfig est = est_n(200'000);
  const ThresholdSolution gi = solve_main_gamma_intuitive(kA, est);
  const SimStats s = run_scenario2(kA, PolicySpec::intuitive(gi.value), sim_n(100'000), est);
  const double se = *s.throughput_stderr;
  c.check(std::abs(s.throughput - gi.value) <= 3.0 * se,
          fmt("|%.5f - %.5f| <= 3*%.5f", s.throughput, gi.value, se));

  // Six-point sweep over the second-hop strength.
  const EstimatorConfig sweep_est = est_n(20'000);
  const double tol = sweep_est.mc_tol;
  double max_gap = -INFINITY;
  bool dominated = true;
  std::ostringstream gaps;
  for (double sg : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    SystemParams p = kA;
    p.sigma_g_sq = sg;
    const auto sample = first_hop_sample(p, {}, sweep_est);
    const double a = solve_main_intuitive(p, sample, sweep_est).gamma.value;
    const double b = solve_main_gamma_optimal(p, sample, sweep_est).value;
    dominated = dominated && b >= a - 10.0 * tol;
    max_gap = std::max(max_gap, b - a);
    gaps << (gaps.tellp() ? "," : "") << fmt("%.4f", b - a);
  }
  c.check(dominated, "gamma_opt - gamma_int over sigma_g^2 sweep: " + gaps.str());
  c.check(max_gap > 10.0 * tol, fmt("largest gap %.4f > %.0e", max_gap, 10.0 * tol));
  return c;
}

Criterion analytical_bounds() {
  Criterion c;
  Rng rng = make_stream(2024, 1);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  int violations = 0;
  for (int i = 0; i < 10'000; ++i) {
    const double x = u(rng), y = u(rng);
    if (af_rate(1.0, 1.0, x, y) > x * y / std::numbers::ln2) ++violations;
  }
  c.check(violations == 0, "rate <= xy/ln2 on 10^4 pairs, violations " + std::to_string(violations));

  for (const Named& cfg : kStandard) {
    const RateDistribution r = full_csi_rate_sample(cfg.p, {}, est_n(1'000'000, 55));
    const SystemParams& p = cfg.p;
    const double bound =
        p.L * p.p_s_power * p.p_r_power * p.sigma_f_sq * p.sigma_g_sq / std::numbers::ln2;
    c.check(r.mean() <= bound, std::string(cfg.name) + fmt(": E[R]=%.4f <= %.4f", r.mean(), bound));
  }

  const EstimatorConfig est;
  int finite = 0;
  for (int i = 0; i < 1000; ++i) {
    const Eigen::ArrayXd f = sample_first_hop(rng, kA, {});
    const SubLayerStats st = solve_sub_layer_intuitive(kA, f, est);
    const double sat = (f * kA.p_s_power).log1p().maxCoeff() / std::numbers::ln2;
    finite += st.lambda_sub >= 0.0 && st.lambda_sub < sat;
  }
  c.check(finite == 1000, "lambda_sub < saturation on " + std::to_string(finite) + "/1000");
  return c;
}

Criterion structural() {
  Criterion c;
  const EstimatorConfig est = est_n(20'000);
  const auto sample = first_hop_sample(kA, {}, est);

  int monotone = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    double prev = INFINITY;
    bool ok = true;
    for (int k = 0; k <= 40; ++k) {
      const double w = solve_sub_W(kA, sample[i], 0.05 * k, est).value;
      ok = ok && w <= prev + 1e-12;
      prev = w;
    }
    monotone += ok;
  }
  c.check(monotone == 200, "W*(gamma) nonincreasing on " + std::to_string(monotone) + "/200 realizations");

  OptimalMainLayer layer(kA, sample, est);
  const ThresholdSolution go = layer.solve();
  OptimalMainLayer scan(kA, sample, est);
  bool decreasing = true;
  double prev = INFINITY, lo = 0.0, hi = INFINITY;
  for (int k = 0; k <= 100; ++k) {
    const double g = 0.025 * k;
    const double v = scan.residual(g);
    decreasing = decreasing && v < prev;
    prev = v;
    if (v > 0.0) lo = g;
    if (v < 0.0) hi = std::min(hi, g);
  }
  c.check(decreasing && lo <= go.value && go.value <= hi && hi - lo < 0.026,
          fmt("V decreasing, root %.5f in [%.3f, %.3f]", go.value, lo, hi));

  // Same (config, seed) -> identical outputs, through the report layer.
  for (const char* scenario : {"1", "2-intuitive", "2-optimal"}) {
    json doc{{"schema_version", kSchemaVersion},
             {"scenario", scenario},
             {"seed", 5},
             {"params", {{"K", 4}, {"L", 2}, {"p_s_power", 10.0}, {"p_r_power", 10.0},
                         {"tau", 0.1}, {"p0", 0.25}, {"p1", 0.5}}},
             {"estimator", {{"mc_samples", 5000}}},
             {"simulation", {{"packets", 3000}}}};
    const ExperimentConfig cfg = parse_config(doc);
    json a = cmd_simulate(cfg).to_json(), b = cmd_simulate(cfg).to_json();
    a.erase("runtime");
    b.erase("runtime");
    c.check(a.dump() == b.dump(), std::string("bit-identical rerun, scenario ") + scenario);
  }
  const SimStats x = run_scenario2(kA, PolicySpec::optimal(go.value), sim_n(2000, 3), est);
  const SimStats y = run_scenario2(kA, PolicySpec::optimal(go.value), sim_n(2000, 3), est);
  c.check(x == y, "identical packet records");
  return c;
}

}  // namespace

int main() {
  Shared sh;
  struct Entry {
    int id;
    const char* title;
    std::function<Criterion()> run;
  };
  const std::vector<Entry> entries{
      {1, "fixed-point correctness", fixed_point},
      {2, "oracle agreement", oracle_agreement},
      {3, "scenario-1 simulation matches lambda*", [&] { return scenario1_consistency(sh); }},
      {4, "stopping-time distribution", [&] { return stopping_time(sh); }},
      {5, "local threshold optimality", [&] { return local_optimality(sh); }},
      {6, "bi-level closed forms", bilevel_closed_forms},
      {7, "optimal bi-level simulation matches gamma*", optimal_consistency},
      {8, "intuitive rule consistency and dominance", intuitive_consistency_and_dominance},
      {9, "analytical bounds", analytical_bounds},
      {10, "structural properties", structural},
  };
  int failed = 0;
  for (const Entry& e : entries) {
    const auto t0 = Clock::now();
    Criterion c;
    try {
      c = e.run();
    } catch (const std::exception& ex) {
      c.check(false, std::string("exception: ") + ex.what());
    }
    failed += !c.ok();
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", c.ok() ? "PASS" : "FAIL", e.id, e.title,
                c.notes().c_str(), seconds(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(entries.size()) - failed, entries.size());
  return failed == 0 ? 0 : 1;
}
