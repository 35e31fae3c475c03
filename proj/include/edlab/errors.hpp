#pragma once

#include <stdexcept>
#include <string>

#include "edlab/domain.hpp"

namespace edlab {

/// Root of the lab's exception hierarchy. Everything thrown on purpose
/// derives from this, so callers can catch one type at the boundary.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An orbit or an accumulated quantity stopped being finite.
struct NumericalOverflowError : Error {
  using Error::Error;
};

/// A backward map step landed outside the image of the forward map.
/// Carries the index of the step that failed (0-based: step k inverts
/// from T^{-k} x to T^{-k-1} x).
struct PreimageUndefinedError : Error {
  long failing_step;
  PhasePoint failing_point;

  PreimageUndefinedError(long step, const PhasePoint& p)
      : Error("preimage undefined at backward step " + std::to_string(step) +
              ", point (" + std::to_string(p[0]) + ", " + std::to_string(p[1]) + ")"),
        failing_step(step),
        failing_point(p) {}
};

/// A reversal-dependent operation was called on a system without one.
struct MissingReversalError : Error {
  using Error::Error;
};

/// A density came out nonpositive where a positive value is required.
struct NonpositiveDensityError : Error {
  PhasePoint where;
  double value;

  NonpositiveDensityError(const PhasePoint& p, double v)
      : Error("density is " + std::to_string(v) + " at (" + std::to_string(p[0]) +
              ", " + std::to_string(p[1]) + "); a positive value is required"),
        where(p),
        value(v) {}
};

/// A line fit was requested on fewer than two distinct abscissae.
struct DegenerateTimesError : Error {
  using Error::Error;
};

/// A system or measure parameter is outside its admissible range.
struct DegenerateParameterError : Error {
  using Error::Error;
};

/// An observable could not be evaluated at a point a measure required.
struct EvaluationError : Error {
  PhasePoint where;

  EvaluationError(const PhasePoint& p, const std::string& why)
      : Error("observable evaluation failed at (" + std::to_string(p[0]) + ", " +
              std::to_string(p[1]) + "): " + why),
        where(p) {}
};

/// A config file failed to parse. Carries the 1-based line number.
struct ConfigParseError : Error {
  int line;

  ConfigParseError(int line_number, const std::string& why)
      : Error("config line " + std::to_string(line_number) + ": " + why),
        line(line_number) {}
};

/// A config parsed fine but asks for something the lab cannot run.
struct ConfigValueError : Error {
  using Error::Error;
};

/// Writing an output artifact failed or was handed unusable data.
struct OutputError : Error {
  using Error::Error;
};

}  // namespace edlab
