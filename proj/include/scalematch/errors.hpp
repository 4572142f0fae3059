#pragma once

#include <stdexcept>

namespace scalematch {

// Base class for all library errors. The CLI maps these to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct DanglingReference : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ScoreRangeError : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct EmptySource : Error { using Error::Error; };
struct InvalidOverlap : Error { using Error::Error; };
struct MissingImageFile : Error { using Error::Error; };
struct PlanCoverageError : Error { using Error::Error; };
struct UnknownTile : Error { using Error::Error; };
struct ImageIdMismatch : Error { using Error::Error; };
struct InfeasiblePlacement : Error { using Error::Error; };

}  // namespace scalematch
