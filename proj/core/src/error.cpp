#include "cilyric/error.h"

namespace cilyric {

std::string_view CategoryName(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kSchema: return "schema";
    case ErrorCategory::kMissingArtifact: return "missing-artifact";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kNotFound: return "not-found";
    case ErrorCategory::kIntegrity: return "integrity";
    case ErrorCategory::kInsufficientData: return "insufficient-data";
    case ErrorCategory::kScorer: return "scorer";
    case ErrorCategory::kSearch: return "search";
  }
  return "unknown";
}

}  // namespace cilyric
