#include "relaystop/contention.hpp"

#include <cmath>
#include <sstream>

#include "relaystop/errors.hpp"

namespace relaystop {

namespace {

void check_args(int n, double p, double slot_duration) {
  if (n < 1) fail(ErrorKind::InvalidParameter, "contenders: must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << "contention probability: must lie in (0, 1], got " << p;
    fail(ErrorKind::InvalidParameter, os.str());
  }
  if (!(slot_duration > 0.0))
    fail(ErrorKind::InvalidParameter, "slot duration: must be > 0");
}

void check_terminates(int n, double p) {
  if (success_prob(n, p) <= 0.0) {
    std::ostringstream os;
    os << "contention among " << n << " nodes with p = " << p
       << " never succeeds";
    fail(ErrorKind::NonTerminatingContention, os.str());
  }
}

}  // namespace

double success_prob(int n, double p) {
  if (n < 1) fail(ErrorKind::InvalidParameter, "contenders: must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) {
    std::ostringstream os;
    os << "contention probability: must lie in (0, 1], got " << p;
    fail(ErrorKind::InvalidParameter, os.str());
  }
  if (n == 1) return p;
  return n * p * std::pow(1.0 - p, n - 1);
}

ContentionOutcome sample_contention(Rng& rng, int n, double p,
                                    double slot_duration) {
  check_args(n, p, slot_duration);
  check_terminates(n, p);
  const double ps = success_prob(n, p);

  ContentionOutcome out;
  if (ps < 1.0) {
    // std::geometric_distribution counts failures before the first success.
    std::geometric_distribution<std::int64_t> failures(ps);
    out.slots = failures(rng) + 1;
  }
  std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(n) - 1);
  out.winner = pick(rng);
  out.elapsed = static_cast<double>(out.slots) * slot_duration;
  return out;
}

ContentionOutcome simulate_contention_slots(Rng& rng, int n, double p,
                                            double slot_duration,
                                            std::int64_t slot_cap) {
  check_args(n, p, slot_duration);
  check_terminates(n, p);

  std::bernoulli_distribution attempt(p);
  for (std::int64_t slot = 1; slot <= slot_cap; ++slot) {
    int contenders = 0;
    std::size_t last = 0;
    for (int i = 0; i < n; ++i) {
      if (attempt(rng)) {
        ++contenders;
        last = static_cast<std::size_t>(i);
      }
    }
    if (contenders == 1)
      return {slot, last, static_cast<double>(slot) * slot_duration};
  }
  std::ostringstream os;
  os << "contention exceeded the slot cap of " << slot_cap;
  fail(ErrorKind::NonTerminatingContention, os.str());
}

}  // namespace relaystop
