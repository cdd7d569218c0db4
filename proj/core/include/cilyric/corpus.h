#pragma once

// Shared domain types plus corpus / rhythmic-table ingestion.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cilyric {

enum class Punct : std::uint8_t { kComma, kPeriod };

std::string_view PunctName(Punct p);   // "comma" / "period"
std::string_view PunctGlyph(Punct p);  // "，" / "。"
std::optional<Punct> ParsePunctName(std::string_view name);

/// Which half (Shang Que / Xia Que) of its paragraph a sentence sits in.
enum class Half : std::uint8_t { kUpper, kLower };

std::string_view HalfName(Half h);

/// Sentences with index < ceil(count / 2) are the upper half.
Half HalfOf(std::size_t sentence_index, std::size_t sentence_count);

using ParagraphId = std::uint32_t;
using PhraseId = std::uint32_t;

struct Sentence {
  std::string text;
  Punct terminal = Punct::kPeriod;

  bool operator==(const Sentence&) const = default;
};

struct LyricsParagraph {
  ParagraphId id = 0;
  std::string rhythmic;
  std::string author;
  std::vector<Sentence> sentences;

  /// Sentences joined with their terminal glyphs.
  std::string Text() const;

  bool operator==(const LyricsParagraph&) const = default;
};

/// Identifier of a corpus sentence, "<paragraph>:<sentence>". Keys rows of
/// the embedding matrix.
std::string SentenceKey(ParagraphId paragraph, std::size_t sentence_index);

struct StructureEntry {
  std::uint32_t length = 0;
  Punct terminal = Punct::kComma;

  auto operator<=>(const StructureEntry&) const = default;
};

/// Ordered (length, terminal) tuples for one rhythmic.
struct SongStructure {
  std::string rhythmic;
  std::vector<StructureEntry> entries;

  std::size_t size() const { return entries.size(); }
  /// Number of sentences generated from the upper-half pool.
  std::size_t UpperCount() const { return (entries.size() + 1) / 2; }
  std::size_t TotalLength() const;

  /// Throws Error(kSchema) when the structure is empty, has a zero length,
  /// or contains no PERIOD terminal.
  void Validate() const;

  bool operator==(const SongStructure&) const = default;
};

/// Profile of a paragraph: its (length, terminal) sequence.
std::vector<StructureEntry> ShapeOf(const LyricsParagraph& paragraph);

struct PhraseRecord {
  PhraseId id = 0;
  std::string text;
  ParagraphId source_paragraph = 0;
  std::uint32_t sentence_index = 0;
  std::uint32_t phrase_index = 0;
  bool is_sentence_begin = false;
  bool is_sentence_end = false;
  bool is_paragraph_begin = false;
  Half half = Half::kUpper;
  std::string rhythmic;
  /// Terminal punctuation of the source sentence.
  Punct sentence_terminal = Punct::kPeriod;

  bool operator==(const PhraseRecord&) const = default;
};

struct Prompt {
  std::string topic;
  std::string rhythmic;
};

/// Splits one paragraph string on inline punctuation. Enumeration commas and
/// semicolons/colons fold into COMMA, question/exclamation marks into PERIOD,
/// whitespace is stripped. Throws Error(kSchema) with a description when the
/// text is empty, has an empty sentence, leaves trailing text without a
/// terminal, or ends with a COMMA.
std::vector<Sentence> SplitSentences(std::string_view text);

/// Parses corpus JSONL. Every malformed line is reported in a single
/// Error(kSchema) whose message lists `<source>:<line>: <reason>` per line.
std::vector<LyricsParagraph> ParseCorpus(std::istream& in, std::string_view source = "<stream>");
std::vector<LyricsParagraph> LoadCorpus(const std::filesystem::path& path);
void SaveCorpus(std::span<const LyricsParagraph> corpus, const std::filesystem::path& path);

/// Levenshtein distance over Unicode scalar values.
std::size_t EditDistance(std::string_view a, std::string_view b);

class StructureTable {
 public:
  StructureTable() = default;

  /// Modal shape per rhythmic; ties go to the lexicographically smaller
  /// length sequence, then the smaller terminal sequence.
  static StructureTable Derive(std::span<const LyricsParagraph> corpus);
  static StructureTable Load(const std::filesystem::path& path);
  static StructureTable FromJson(std::string_view json_text);

  void Save(const std::filesystem::path& path) const;
  std::string ToJson() const;

  /// Throws Error(kNotFound) listing the nearest rhythmics by edit distance.
  const SongStructure& Lookup(std::string_view rhythmic) const;
  bool Contains(std::string_view rhythmic) const;

  void Insert(SongStructure structure);
  /// Entries of `overrides` replace same-named entries here.
  void OverrideWith(const StructureTable& overrides);

  const std::map<std::string, SongStructure, std::less<>>& entries() const { return table_; }
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, SongStructure, std::less<>> table_;
};

/// Prompt JSONL: {"topic": str, "rhythmic": str} per line.
std::vector<Prompt> LoadPrompts(const std::filesystem::path& path);

}  // namespace cilyric
