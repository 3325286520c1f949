#include "relaystop/system_params.hpp"

#include <cmath>
#include <sstream>

#include "relaystop/contention.hpp"
#include "relaystop/errors.hpp"

namespace relaystop {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidState: return "invalid-state";
    case ErrorKind::NonTerminatingContention: return "non-terminating-contention";
    case ErrorKind::SolverFailure: return "solver-failure";
    case ErrorKind::InvalidPolicy: return "invalid-policy";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::CappedPacket: return "capped-packet";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::FullCsi: return "1";
    case Scenario::BiLevelIntuitive: return "2-intuitive";
    case Scenario::BiLevelOptimal: return "2-optimal";
  }
  return "?";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "1") return Scenario::FullCsi;
  if (s == "2-intuitive") return Scenario::BiLevelIntuitive;
  if (s == "2-optimal") return Scenario::BiLevelOptimal;
  fail(ErrorKind::Config,
       "scenario: expected one of 1, 2-intuitive, 2-optimal, got '" + s + "'");
}

namespace {

void positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    std::ostringstream os;
    os << name << ": must be finite and > 0, got " << v;
    fail(ErrorKind::InvalidParameter, os.str());
  }
}

void probability(double p, int n, const char* name, const char* count) {
  if (!(p > 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << name << ": must lie in (0, 1], got " << p;
    fail(ErrorKind::InvalidParameter, os.str());
  }
  if (p == 1.0 && n > 1) {
    std::ostringstream os;
    os << name << ": 1 is only allowed when " << count
       << " = 1 (every slot would collide)";
    fail(ErrorKind::InvalidParameter, os.str());
  }
}

}  // namespace

void validate(const SystemParams& p, bool bilevel) {
  if (p.K < 1) fail(ErrorKind::InvalidParameter, "K: must be >= 1");
  if (p.L < 1) fail(ErrorKind::InvalidParameter, "L: must be >= 1");
  positive(p.p_s_power, "p_s_power");
  positive(p.p_r_power, "p_r_power");
  positive(p.sigma_f_sq, "sigma_f_sq");
  positive(p.sigma_g_sq, "sigma_g_sq");
  positive(p.tau, "tau");
  positive(p.t_data, "t_data");
  probability(p.p0, p.K, "p0", "K");
  if (bilevel) probability(p.p1, p.L, "p1", "L");
}

double source_success_prob(const SystemParams& p) {
  return success_prob(p.K, p.p0);
}

double relay_success_prob(const SystemParams& p) {
  return success_prob(p.L, p.p1);
}

}  // namespace relaystop
