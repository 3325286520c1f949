#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "relaystop/errors.hpp"

namespace relaystop {

/// A solved threshold together with the evidence that it is a root.
struct ThresholdSolution {
  double value = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;

  double bracket_width() const { return bracket_hi - bracket_lo; }
};

namespace detail {

inline bool converged(double residual, double width, double x, double tol) {
  return std::abs(residual) <= tol && width <= tol * std::max(1.0, std::abs(x));
}

[[noreturn]] inline void no_convergence(const char* what, double lo, double hi,
                                        double residual, int iters) {
  std::ostringstream os;
  os.precision(17);
  os << what << ": no convergence after " << iters << " iterations, bracket ["
     << lo << ", " << hi << "], residual " << residual;
  fail(ErrorKind::SolverFailure, os.str());
}

}  // namespace detail

/// Root of a nonincreasing f with f(lo) >= 0 >= f(hi).
///
/// Stops once |f| <= tol and the bracket is no wider than
/// tol * max(1, |x|). An exact zero at either end is returned as is.
/// This overload takes the endpoint values when they are already known.
template <typename F>
ThresholdSolution bisect_decreasing(F&& f, double lo, double hi, double f_lo,
                                    double f_hi, double tol, int max_iter,
                                    const char* what = "bisection") {
  if (f_lo == 0.0) return {lo, 0.0, 0, lo, lo};
  if (f_hi == 0.0) return {hi, 0.0, 0, hi, hi};
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": [" << lo << ", " << hi << "] does not bracket a root (f = "
       << f_lo << ", " << f_hi << ")";
    fail(ErrorKind::SolverFailure, os.str());
  }

  double mid = lo, f_mid = f_lo;
  for (int it = 1; it <= max_iter; ++it) {
    mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) {
      // Bracket exhausted at double resolution.
      if (std::abs(f_mid) <= tol) return {mid, f_mid, it, lo, hi};
      detail::no_convergence(what, lo, hi, f_mid, it);
    }
    f_mid = f(mid);
    if (f_mid == 0.0) return {mid, 0.0, it, mid, mid};
    (f_mid > 0.0 ? lo : hi) = mid;
    if (detail::converged(f_mid, hi - lo, mid, tol)) return {mid, f_mid, it, lo, hi};
  }
  detail::no_convergence(what, lo, hi, f_mid, max_iter);
}

template <typename F>
ThresholdSolution bisect_decreasing(F&& f, double lo, double hi, double tol,
                                    int max_iter, const char* what = "bisection") {
  const double f_lo = f(lo);
  if (f_lo == 0.0) return {lo, 0.0, 0, lo, lo};
  const double f_hi = f(hi);
  return bisect_decreasing(f, lo, hi, f_lo, f_hi, tol, max_iter, what);
}

/// Doubles `hi` (starting from `start`) until f(hi) <= 0; returns
/// {hi, f(hi)}.
template <typename F>
std::pair<double, double> expand_upper_bracket(F&& f, double start, int max_doublings,
                                               const char* what = "bracket") {
  double hi = start;
  for (int i = 0; i <= max_doublings; ++i, hi *= 2.0) {
    const double f_hi = f(hi);
    if (f_hi <= 0.0) return {hi, f_hi};
  }
  std::ostringstream os;
  os << what << ": no sign change up to " << hi / 2.0 << " after "
     << max_doublings << " doublings";
  fail(ErrorKind::SolverFailure, os.str());
}

/// Root of a nonincreasing f inside [lo, hi] using Newton steps that fall
/// back to bisection whenever a step leaves the bracket. `fd(x)` returns
/// {f(x), f'(x)}. Once the residual is small the bracket is closed by a
/// probe on the far side so the returned bracket meets the same width
/// contract as bisect_decreasing.
template <typename FD>
ThresholdSolution newton_decreasing(FD&& fd, double lo, double hi, double x0,
                                    double tol, int max_iter,
                                    const char* what = "newton") {
  if (!(lo <= hi)) detail::no_convergence(what, lo, hi, 0.0, 0);
  double x = std::clamp(x0, lo, hi);
  auto [fx, dfx] = fd(x);
  for (int it = 1; it <= max_iter; ++it) {
    if (fx == 0.0) return {x, 0.0, it, x, x};
    (fx > 0.0 ? lo : hi) = x;

    if (std::abs(fx) <= tol) {
      const double step = 0.5 * tol * std::max(1.0, std::abs(x));
      const double probe = fx > 0.0 ? std::min(x + step, hi) : std::max(x - step, lo);
      const auto [fp, dfp] = fd(probe);
      if (fp == 0.0) return {probe, 0.0, it, probe, probe};
      if ((fp < 0.0) == (fx > 0.0)) {
        // Sign change between x and probe.
        const double blo = std::min(x, probe), bhi = std::max(x, probe);
        return std::abs(fp) < std::abs(fx) ? ThresholdSolution{probe, fp, it, blo, bhi}
                                           : ThresholdSolution{x, fx, it, blo, bhi};
      }
      x = probe;
      fx = fp;
      dfx = dfp;
      (fx > 0.0 ? lo : hi) = x;
    }

    double next = (dfx < 0.0) ? x - fx / dfx : lo - 1.0;
    if (!(next > lo && next < hi)) next = lo + (hi - lo) / 2.0;
    if (next <= lo || next >= hi) {
      if (std::abs(fx) <= tol) return {x, fx, it, lo, hi};
      detail::no_convergence(what, lo, hi, fx, it);
    }
    x = next;
    std::tie(fx, dfx) = fd(x);
  }
  detail::no_convergence(what, lo, hi, fx, max_iter);
}

}  // namespace relaystop
