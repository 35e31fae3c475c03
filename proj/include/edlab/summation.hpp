#pragma once

#include <cmath>

namespace edlab {

/// Neumaier-compensated accumulator. Sequential and deterministic: the
/// same inputs in the same order give the same bits on every run, and the
/// compensation keeps multi-million-term sums accurate to a few ulp of
/// the true result instead of O(n) ulp.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace edlab
