#pragma once

#include <stdexcept>
#include <string>

namespace airtwin {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A point that lies outside the room box or inside a blocked voxel.
class OutOfRoom : public Error {
 public:
  using Error::Error;
};

/// Timestep exceeds the solver bound and substepping is disabled.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value produced by the solver. The step is discarded.
class SolverFault : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

}  // namespace airtwin
