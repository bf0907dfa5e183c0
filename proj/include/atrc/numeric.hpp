#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>

namespace atrc {

// Compensated summation; used for every partition sum.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  void merge(const KahanSum& o) {
    add(o.sum_);
    add(-o.comp_);
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// 17 significant digits, no locale.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Root of a continuous increasing f on (lo, hi) with f(lo) < 0 < f(hi):
// bisection with a 200 iteration cap followed by one Newton step using a
// numerical derivative (kept only if it reduces the residual).
inline double bisect_increasing(const std::function<double(double)>& f, double lo, double hi) {
  if (!(f(lo) < 0.0) || !(f(hi) > 0.0)) throw std::invalid_argument("bisect_increasing: root not bracketed");
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  const double fx = f(x);
  const double h = std::max(1e-8, std::abs(x) * 1e-8);
  const double d = (f(x + h) - f(x - h)) / (2 * h);
  if (d > 0.0) {
    const double y = x - fx / d;
    if (std::abs(f(y)) < std::abs(fx)) x = y;
  }
  return x;
}

}  // namespace atrc
