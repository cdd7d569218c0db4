#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cilyric {

/// Coarse failure classes. The CLI prints the category name on a single
/// line and maps each one to a distinct exit code.
enum class ErrorCategory {
  kIo,
  kSchema,
  kMissingArtifact,
  kConfig,
  kNotFound,
  kIntegrity,
  kInsufficientData,
  kScorer,
  kSearch,
};

std::string_view CategoryName(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace cilyric
