#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gazegan {

/// Machine-readable failure categories. The CLI maps each one to a distinct
/// exit status and prints the category name on stderr.
enum class ErrorKind {
  Usage,
  Config,
  Io,
  Data,
  Shape,
  Numeric,
  Checkpoint,
  Backend,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Data: return "data";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Checkpoint: return "checkpoint";
    case ErrorKind::Backend: return "backend";
  }
  return "unknown";
}

constexpr int exit_code(ErrorKind kind) {
  return 2 + static_cast<int>(kind);
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gazegan
