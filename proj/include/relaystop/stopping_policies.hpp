#pragma once

#include <cstddef>
#include <variant>

#include "relaystop/threshold_solver.hpp"

namespace relaystop {

struct Continue {
  bool operator==(const Continue&) const = default;
};
struct Stop {
  std::size_t relay = 0;  // zero-based
  bool operator==(const Stop&) const = default;
};
using Decision = std::variant<Continue, Stop>;

inline bool stops(const Decision& d) { return std::holds_alternative<Stop>(d); }

/// Verdict of a bi-level layer. Relay choice happens through sub-layer
/// contention, so these carry no relay.
enum class Verdict { Continue, Stop };

enum class PolicyKind { FullCsi, IntuitiveBiLevel, OptimalBiLevel };

const char* to_string(PolicyKind k);

/// Solved thresholds for one policy. `lambda_star` is read by FullCsi,
/// `gamma_star` by the bi-level kinds.
struct PolicySpec {
  PolicyKind kind = PolicyKind::FullCsi;
  double lambda_star = 0.0;
  double gamma_star = 0.0;

  static PolicySpec full_csi(double lambda_star);
  static PolicySpec intuitive(double gamma_star);
  static PolicySpec optimal(double gamma_star);
};

// Every rule below uses an inclusive threshold.

/// Stop(best_relay) iff rate >= 2 lambda*.
Decision full_csi_decide(const PolicySpec& spec, double rate, std::size_t best_relay);

/// Stop iff r1 - gamma* r2 >= gamma* T/2.
Verdict intuitive_main_decide(const PolicySpec& spec, const SubLayerStats& stats,
                              double t_data);

/// Stop iff rate_m >= lambda_sub.
Verdict intuitive_sub_decide(double lambda_sub, double rate_m);

/// Stop iff W* >= (T/2) gamma*.
Verdict optimal_main_decide(const PolicySpec& spec, double w_star, double t_data);

/// Stop iff (T/2) rate_m >= W* + (T/2) gamma*.
Verdict optimal_sub_decide(const PolicySpec& spec, double w_star, double rate_m,
                           double t_data);

}  // namespace relaystop
