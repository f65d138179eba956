#pragma once

#include <stdexcept>
#include <string>

namespace homsim {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A parameter violates its documented domain (negative bandwidth, ...).
class InvalidInputError : public Error {
  public:
    using Error::Error;
};

// A filter passband or pump spectrum falls outside the sampling grid.
class GridCoverageError : public Error {
  public:
    using Error::Error;
};

// Two density matrices that must share a grid do not.
class GridMismatchError : public Error {
  public:
    using Error::Error;
};

// A joint spectral amplitude with (numerically) zero norm: the filters do
// not intersect the phase-matched band.
class EmptyStateError : public Error {
  public:
    using Error::Error;
};

// visibility_of() without far-delay samples to define a baseline.
class InsufficientBaselineError : public Error {
  public:
    using Error::Error;
};

// fwhm_numeric() on a scan whose dip touches the scan edge or is absent.
class EdgeError : public Error {
  public:
    using Error::Error;
};

// Detector calibration from rates produced an efficiency outside [0, 1].
class CalibrationError : public Error {
  public:
    using Error::Error;
};

// Configuration file problems; message carries the offending field path.
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Malformed CSV input; message carries the 1-based row number.
class CsvParseError : public Error {
  public:
    using Error::Error;
};

}  // namespace homsim
