#pragma once

#include <stdexcept>
#include <string>

namespace fleet {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FLEET_DEFINE_ERROR(Name)            \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

// mission-logic
FLEET_DEFINE_ERROR(NotCoSafe);
FLEET_DEFINE_ERROR(UnknownSymbol);

/// Parse failure with the byte offset at which it was detected.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, std::string expected)
      : Error("syntax error at " + std::to_string(position) + ": expected " + expected),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

// fleet-model
FLEET_DEFINE_ERROR(NoCapableRobot);
FLEET_DEFINE_ERROR(ScenarioInvalid);

// assignment / formation
FLEET_DEFINE_ERROR(InvalidCandidate);
FLEET_DEFINE_ERROR(DimensionMismatch);
FLEET_DEFINE_ERROR(Infeasible);
FLEET_DEFINE_ERROR(TooLarge);

// local-coordination
FLEET_DEFINE_ERROR(CapabilityGap);
FLEET_DEFINE_ERROR(EmptyTeam);

// executor / protocol-service
FLEET_DEFINE_ERROR(PlanningFailed);
FLEET_DEFINE_ERROR(TraceInvalid);
FLEET_DEFINE_ERROR(UnknownEntity);
FLEET_DEFINE_ERROR(MalformedFormula);

#undef FLEET_DEFINE_ERROR

}  // namespace fleet
