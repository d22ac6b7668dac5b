#pragma once

#include <stdexcept>
#include <string>

namespace toposlab {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input-shaped problems: malformed posets, presheaves, formulas, models.
struct InputError : Error {
  using Error::Error;
};

struct CycleError : InputError {
  using InputError::InputError;
};
struct DuplicateElement : InputError {
  using InputError::InputError;
};
struct ForeignElement : InputError {
  using InputError::InputError;
};
struct PosetMismatch : InputError {
  using InputError::InputError;
};
struct AmbientMismatch : InputError {
  using InputError::InputError;
};
struct FunctorialityError : InputError {
  using InputError::InputError;
};
struct MissingTable : InputError {
  using InputError::InputError;
};
struct NotEquivalence : InputError {
  using InputError::InputError;
};

struct SyntaxError : InputError {
  int line = 0;
  int col = 0;
  SyntaxError(const std::string& msg, int line_, int col_)
      : InputError(msg + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
        line(line_),
        col(col_) {}
};
struct UnknownMacro : InputError {
  using InputError::InputError;
};
struct ArityError : InputError {
  using InputError::InputError;
};
struct SortMismatch : InputError {
  using InputError::InputError;
};
struct UnboundVariable : InputError {
  using InputError::InputError;
};
struct UnknownBaseSort : InputError {
  using InputError::InputError;
};

// Resource-shaped problems: enumeration or evaluation grew past a cap.
struct ResourceError : Error {
  using Error::Error;
};

struct CapExceeded : ResourceError {
  using ResourceError::ResourceError;
};
struct FiberCapExceeded : CapExceeded {
  using CapExceeded::CapExceeded;
};
struct BudgetExceeded : ResourceError {
  using ResourceError::ResourceError;
};

// Violation of an internal invariant (e.g. a truth value that is not
// down-closed). Never expected to fire on validated inputs.
struct InternalError : Error {
  using Error::Error;
};

}  // namespace toposlab
