#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pavetex {

enum class ErrorKind {
  InvalidImage,
  PatchTooLarge,
  InvalidQuantization,
  DegenerateInput,
  InsufficientData,
  DegenerateTraining,
  InvalidInput,
  ManifestError,
  IoError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidImage: return "InvalidImage";
    case ErrorKind::PatchTooLarge: return "PatchTooLarge";
    case ErrorKind::InvalidQuantization: return "InvalidQuantization";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::DegenerateTraining: return "DegenerateTraining";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::ManifestError: return "ManifestError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the kinds above so
// callers (and tests) can branch on the category rather than the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace pavetex
