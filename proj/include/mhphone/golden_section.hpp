#pragma once

#include <cmath>
#include <utility>

namespace mhphone {

/// Golden-section search for the maximizer of a unimodal function on
/// [lo, hi]. Stops once the bracket is narrower than `tol`.
template <typename F>
double golden_section_maximize(F&& f, double lo, double hi, double tol) {
  static const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;
  if (lo > hi) std::swap(lo, hi);
  double c = hi - (hi - lo) * kInvPhi;
  double d = lo + (hi - lo) * kInvPhi;
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tol) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - (hi - lo) * kInvPhi;
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + (hi - lo) * kInvPhi;
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace mhphone
