#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "exflow/vec2.hpp"

namespace exflow {

/// Base class for all exflow errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Newton inversion of the forward map failed to converge.
class MapInversionError : public Error {
  public:
    MapInversionError(Vec2 z, const std::string& msg) : Error(msg), z_(z) {}
    Vec2 point() const { return z_; }

  private:
    Vec2 z_;
};

/// A point lies strictly inside the obstacle (or otherwise outside the domain of an operation).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Evaluation at coincident singular points.
class SingularityError : public Error {
  public:
    using Error::Error;
};

/// A particle crossed the obstacle boundary during time stepping.
class BoundaryPenetrationError : public Error {
  public:
    BoundaryPenetrationError(std::size_t particle, double t, const std::string& msg)
        : Error(msg), particle_(particle), time_(t) {}
    std::size_t particle() const { return particle_; }
    double time() const { return time_; }

  private:
    std::size_t particle_;
    double time_;
};

/// Config schema violation (bad key, bad value, duplicate).
class ParseError : public Error {
  public:
    using Error::Error;
};

/// Config is well-formed but physically invalid.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Growth-exponent fit could not be performed.
class FitError : public Error {
  public:
    using Error::Error;
};

/// A sampled property check found a counterexample.
class PropertyViolationError : public Error {
  public:
    using Error::Error;
};

}  // namespace exflow
