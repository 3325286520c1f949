#pragma once

#include <cstdint>
#include <string>

namespace relaystop {

/// Protocol and channel constants shared by every module.
///
/// Powers are dimensionless SNR scales; `tau` and `t_data` share one
/// arbitrary time unit. `p1` is only read by the bi-level (second-hop
/// unobserved) scenario.
struct SystemParams {
  int K = 1;                  // source-destination pairs
  int L = 1;                  // relays
  double p_s_power = 1.0;     // source transmit power
  double p_r_power = 1.0;     // relay transmit power
  double sigma_f_sq = 1.0;    // mean of |f|^2
  double sigma_g_sq = 1.0;    // mean of |g|^2
  double tau = 0.1;           // contention slot duration
  double t_data = 1.0;        // data transmission duration (both hops)
  double p0 = 1.0;            // per-slot source contention probability
  double p1 = 1.0;            // per-slot relay contention probability
};

enum class Scenario {
  FullCsi,          // both hops observed by the winning source
  BiLevelIntuitive, // second hop unobserved, per-layer throughput rule
  BiLevelOptimal,   // second hop unobserved, jointly optimal rule
};

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

inline bool is_bilevel(Scenario s) { return s != Scenario::FullCsi; }

/// Throws InvalidParameter naming the offending field. `p1` is checked only
/// when `bilevel` is set.
void validate(const SystemParams& p, bool bilevel);

/// p_s = K p0 (1-p0)^(K-1)
double source_success_prob(const SystemParams& p);
/// p_r = L p1 (1-p1)^(L-1)
double relay_success_prob(const SystemParams& p);

}  // namespace relaystop
