#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cilyric {

using RhymeClass = std::uint32_t;

/// Character -> rhyme class. Characters absent from the dictionary share a
/// reserved UNKNOWN class, which is always the last id.
class RhymeTable {
 public:
  RhymeTable() : labels_{"UNKNOWN"} {}

  /// TSV: `<character>\t<class label>` per line; '#' starts a comment.
  static RhymeTable ParseTsv(std::istream& in, std::string_view source = "<stream>");
  static RhymeTable Load(const std::filesystem::path& path);
  /// Builds a table from character -> label pairs.
  static RhymeTable FromPairs(std::span<const std::pair<std::string, std::string>> pairs);

  RhymeClass ClassOf(std::string_view character) const;
  RhymeClass unknown_class() const { return static_cast<RhymeClass>(labels_.size() - 1); }
  /// K, including UNKNOWN.
  std::size_t class_count() const { return labels_.size(); }
  const std::string& Label(RhymeClass c) const { return labels_.at(c); }
  std::size_t size() const { return map_.size(); }

 private:
  std::unordered_map<std::string, RhymeClass> map_;
  std::vector<std::string> labels_;  // last entry is UNKNOWN
};

/// Normalized dispersion of rhyme classes: (1 - sum p_j^2) divided by the
/// same quantity for the most even split of n items over min(n, K) classes.
/// Zero for n <= 1.
double RhymeDispersion(std::span<const RhymeClass> classes, std::size_t class_count);

}  // namespace cilyric
