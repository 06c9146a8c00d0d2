#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace orbitfit {

enum class ErrorKind {
  Parse,
  InvalidInput,
  InsufficientLandmarks,
  DegenerateConfiguration,
  RegistrationFailed,
  ReflectionCollapse,
  NumericFailure,
  InvalidPlate,
  MissingPivot,
  MissingHistory,
  RejectedTransform,
  Migration,
  Conflict,
  NotFound,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so front ends (CLI exit
/// codes, HTTP status codes) can classify it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// I/O problems are environmental; everything else is a contract violation.
  bool is_io() const noexcept { return kind_ == ErrorKind::Io; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace orbitfit
