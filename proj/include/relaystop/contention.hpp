#pragma once

#include <cstddef>
#include <cstdint>

#include "relaystop/rng.hpp"

namespace relaystop {

/// One successful contention round.
struct ContentionOutcome {
  std::int64_t slots = 1;   // slots spent, including the successful one
  std::size_t winner = 0;   // zero-based contender index
  double elapsed = 0.0;     // slots * slot_duration
};

enum class ContentionMode { FastGeometric, LiteralSlots };

inline constexpr std::int64_t kDefaultSlotCap = 1'000'000'000;

/// n p (1-p)^(n-1): probability that exactly one of n contenders transmits.
double success_prob(int n, double p);

/// Geometric slot count with success parameter success_prob(n, p) and a
/// uniform winner drawn independently.
ContentionOutcome sample_contention(Rng& rng, int n, double p,
                                    double slot_duration);

/// Slot-by-slot Bernoulli contention; a slot succeeds iff exactly one of the
/// n contenders transmits. Distributionally identical to sample_contention.
ContentionOutcome simulate_contention_slots(
    Rng& rng, int n, double p, double slot_duration,
    std::int64_t slot_cap = kDefaultSlotCap);

inline ContentionOutcome contend(ContentionMode mode, Rng& rng, int n,
                                 double p, double slot_duration) {
  return mode == ContentionMode::FastGeometric
             ? sample_contention(rng, n, p, slot_duration)
             : simulate_contention_slots(rng, n, p, slot_duration);
}

}  // namespace relaystop
