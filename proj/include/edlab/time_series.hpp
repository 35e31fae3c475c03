#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "edlab/errors.hpp"
#include "edlab/summation.hpp"

namespace edlab {

/// Least-squares line through a series, with the worst pointwise miss.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
};

/// Sampled scalar diagnostic over time, with an optional attached fit.
struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::optional<LinearFit> fit;

  std::size_t size() const { return times.size(); }

  /// Largest |value(t) - value(t_0)|; the constancy diagnostic for
  /// quantities that should not move.
  double max_deviation_from_first() const {
    double dev = 0.0;
    for (double v : values) dev = std::max(dev, std::fabs(v - values.front()));
    return dev;
  }
};

/// Ordinary least squares through (times, values), centered for
/// numerical stability. Needs at least two distinct abscissae.
inline LinearFit fit_linear(const TimeSeries& s) {
  const std::size_t n = s.times.size();
  if (n != s.values.size() || n < 2)
    throw DegenerateTimesError("line fit needs at least two (time, value) pairs");
  CompensatedSum st, sv;
  for (std::size_t i = 0; i < n; ++i) {
    st.add(s.times[i]);
    sv.add(s.values[i]);
  }
  const double tbar = st.value() / static_cast<double>(n);
  const double vbar = sv.value() / static_cast<double>(n);
  CompensatedSum stt, stv;
  for (std::size_t i = 0; i < n; ++i) {
    const double dt = s.times[i] - tbar;
    stt.add(dt * dt);
    stv.add(dt * (s.values[i] - vbar));
  }
  if (!(stt.value() > 0.0))
    throw DegenerateTimesError("line fit needs at least two distinct times");
  LinearFit fit;
  fit.slope = stv.value() / stt.value();
  fit.intercept = vbar - fit.slope * tbar;
  for (std::size_t i = 0; i < n; ++i) {
    const double miss = std::fabs(s.values[i] - (fit.intercept + fit.slope * s.times[i]));
    fit.max_abs_residual = std::max(fit.max_abs_residual, miss);
  }
  return fit;
}

}  // namespace edlab
