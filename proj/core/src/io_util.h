#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "cilyric/error.h"

namespace cilyric::detail {

inline std::ifstream OpenInput(const std::filesystem::path& path, bool binary = false) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCategory::kMissingArtifact, "file not found: " + path.string());
  }
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorCategory::kIo, "cannot open " + path.string());
  return in;
}

inline std::ofstream OpenOutput(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw Error(ErrorCategory::kIo, "cannot write " + path.string());
  return out;
}

inline std::string ReadAll(const std::filesystem::path& path) {
  auto in = OpenInput(path, true);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline bool IsBlank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace cilyric::detail
