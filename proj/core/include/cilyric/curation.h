#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cilyric/corpus.h"

namespace cilyric {

/// Node of a pre-parsed semantic tree. Leaves carry text, internal nodes
/// carry only children.
struct SemanticTree {
  std::string content;
  std::vector<SemanticTree> children;

  static SemanticTree Leaf(std::string text) { return {std::move(text), {}}; }
  static SemanticTree Node(std::vector<SemanticTree> kids) { return {{}, std::move(kids)}; }

  bool IsLeaf() const { return children.empty(); }
  std::size_t LeafCount() const;

  /// Parses the nested-array form: a leaf is a JSON string, an internal node
  /// a JSON array. Throws Error(kSchema).
  static SemanticTree FromJson(std::string_view json_text);
  std::string ToJson() const;
};

/// In-order concatenation of every leaf under `node`.
std::string ConcatNode(const SemanticTree& node);

/// Default phrase-length bound, in characters.
inline constexpr std::size_t kPhraseThreshold = 4;

/// Walks the tree and emits one phrase per child whose concatenated text is
/// at most `threshold` characters, recursing into longer children. Only
/// direct children are inspected at each level; leaves are always emitted
/// whole, even when longer than `threshold`.
std::vector<std::string> ExtractPhrases(const SemanticTree& root, std::size_t threshold = kPhraseThreshold);

using TreeKey = std::pair<ParagraphId, std::uint32_t>;  // (paragraph, sentence)
using TreeBank = std::map<TreeKey, SemanticTree>;

/// Tree JSONL: {"paragraph_id": int, "sentence_index": int, "tree": nested-array}.
TreeBank ParseTrees(std::istream& in, std::string_view source = "<stream>");
TreeBank LoadTrees(const std::filesystem::path& path);

/// Builds the phrase database. Records are ordered by (corpus order,
/// sentence, phrase) and numbered from 0 in that order.
/// Throws Error(kIntegrity) naming the sentence when its tree is missing or
/// its leaves do not spell the sentence text.
std::vector<PhraseRecord> Curate(std::span<const LyricsParagraph> corpus, const TreeBank& trees,
                                 std::size_t threshold = kPhraseThreshold);

struct CurationStats {
  std::size_t phrase_count = 0;
  double mean_length = 0.0;
  std::size_t over_threshold = 0;  // single leaves longer than the threshold
};

CurationStats Summarize(std::span<const PhraseRecord> phrases, std::size_t threshold = kPhraseThreshold);

/// Phrase database JSONL, one record per line with every field explicit.
nlohmann::json PhraseToJson(const PhraseRecord& phrase);
PhraseRecord PhraseFromJson(const nlohmann::json& obj);
void SavePhrases(std::span<const PhraseRecord> phrases, const std::filesystem::path& path);
std::vector<PhraseRecord> ParsePhrases(std::istream& in, std::string_view source = "<stream>");
std::vector<PhraseRecord> LoadPhrases(const std::filesystem::path& path);

}  // namespace cilyric
