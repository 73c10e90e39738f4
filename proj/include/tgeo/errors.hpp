#pragma once

#include <stdexcept>
#include <string>

namespace tgeo {

/// Broad class of a failure; the CLI maps it to an exit status.
enum class ErrorCategory { Validation, Numeric };

/// Base of every error raised by the library. `code()` is a stable
/// machine-readable name such as "KernelContamination".
class Error : public std::runtime_error {
 public:
  Error(std::string code, ErrorCategory category, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)), category_(category) {}

  const std::string& code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_; }

 private:
  std::string code_;
  ErrorCategory category_;
};

inline Error validation_error(std::string code, const std::string& message) {
  return Error(std::move(code), ErrorCategory::Validation, message);
}

inline Error numeric_error(std::string code, const std::string& message) {
  return Error(std::move(code), ErrorCategory::Numeric, message);
}

}  // namespace tgeo
