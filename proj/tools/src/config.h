#pragma once

// Shared configuration: a key = value file, overridden by command-line flags.
// Every key and its default lives in the table in config.cpp.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cilyric/connector.h"
#include "cilyric/retriever.h"

namespace cilyric::cli {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

/// All recognized keys, in documentation order.
const std::vector<ConfigKey>& ConfigKeys();

class Config {
 public:
  /// Every key at its default.
  Config();

  /// Grammar (one entry per line):
  ///   line    := blank | comment | entry
  ///   comment := '#' ...
  ///   entry   := key ws* '=' ws* value ws* comment?
  ///   value   := bare | '"' (char | '\"' | '\\')* '"'
  /// A bare value runs to the first " #" or end of line and is trimmed.
  /// Unknown or repeated keys are config errors.
  void Parse(std::istream& in, std::string_view source = "<config>");
  void LoadFile(const std::filesystem::path& path);

  /// Overrides one key; throws Error(kConfig) for unknown keys.
  void Set(std::string_view key, std::string value);

  const std::string& Get(std::string_view key) const;
  std::filesystem::path Path(std::string_view key) const { return Get(key); }
  std::uint64_t UInt(std::string_view key) const;
  /// Positive integer.
  std::size_t Count(std::string_view key) const;
  double Real(std::string_view key) const;

  SamplingParams Sampling() const;
  LossWeights Weights() const;
  /// "inf" selects an unbounded beam.
  std::size_t BeamWidth() const;

  /// Checks every typed key so bad values fail before any work starts.
  void Validate() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace cilyric::cli
