#pragma once

#include <stdexcept>
#include <string>

namespace symlight {

// Base for every error raised by the library. CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two basis pairs are (numerically) parallel.
class DegenerateBasis : public Error {
 public:
  using Error::Error;
};

// Renderer or oracle needs absolute light positions the rig does not carry.
class RigNotMetric : public Error {
 public:
  RigNotMetric() : Error("rig not metric") {}
  using Error::Error;
};

// All pairs share one radius, so rho^-1 r^2 has a zero denominator.
class EqualRadii : public Error {
 public:
  using Error::Error;
};

class NegativeRadicand : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class PrincipalPointDegenerate : public Error {
 public:
  using Error::Error;
};

// The null space of the stacked constraint matrix is not one-dimensional.
class DegenerateSystem : public Error {
 public:
  using Error::Error;
};

class UnsupportedArrangement : public Error {
 public:
  using Error::Error;
};

class DegenerateFit : public Error {
 public:
  using Error::Error;
};

// Malformed configuration: bad key, bad value, inconsistent counts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace symlight
