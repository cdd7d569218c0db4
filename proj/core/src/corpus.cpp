#include "cilyric/corpus.h"

#include <algorithm>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "cilyric/error.h"
#include "cilyric/utf8.h"
#include "io_util.h"

namespace cilyric {

using nlohmann::json;

std::string_view PunctName(Punct p) { return p == Punct::kComma ? "comma" : "period"; }

std::string_view PunctGlyph(Punct p) { return p == Punct::kComma ? "，" : "。"; }

std::optional<Punct> ParsePunctName(std::string_view name) {
  if (name == "comma") return Punct::kComma;
  if (name == "period") return Punct::kPeriod;
  return std::nullopt;
}

std::string_view HalfName(Half h) { return h == Half::kUpper ? "upper" : "lower"; }

Half HalfOf(std::size_t sentence_index, std::size_t sentence_count) {
  return sentence_index < (sentence_count + 1) / 2 ? Half::kUpper : Half::kLower;
}

std::string LyricsParagraph::Text() const {
  std::string out;
  for (const auto& s : sentences) {
    out += s.text;
    out += PunctGlyph(s.terminal);
  }
  return out;
}

std::string SentenceKey(ParagraphId paragraph, std::size_t sentence_index) {
  return std::to_string(paragraph) + ":" + std::to_string(sentence_index);
}

std::size_t SongStructure::TotalLength() const {
  std::size_t total = 0;
  for (const auto& e : entries) total += e.length;
  return total;
}

void SongStructure::Validate() const {
  if (entries.empty()) throw Error(ErrorCategory::kSchema, "structure '" + rhythmic + "' is empty");
  bool has_period = false;
  for (const auto& e : entries) {
    if (e.length == 0) {
      throw Error(ErrorCategory::kSchema, "structure '" + rhythmic + "' has a zero-length sentence");
    }
    has_period = has_period || e.terminal == Punct::kPeriod;
  }
  if (!has_period) {
    throw Error(ErrorCategory::kSchema, "structure '" + rhythmic + "' has no period terminal");
  }
}

std::vector<StructureEntry> ShapeOf(const LyricsParagraph& paragraph) {
  std::vector<StructureEntry> shape;
  shape.reserve(paragraph.sentences.size());
  for (const auto& s : paragraph.sentences) {
    shape.push_back({static_cast<std::uint32_t>(utf8::Length(s.text)), s.terminal});
  }
  return shape;
}

namespace {

std::optional<Punct> ClassifyPunct(char32_t cp) {
  switch (cp) {
    case U'，': case U',': case U'、': case U'；': case U';': case U'：': case U':':
      return Punct::kComma;
    case U'。': case U'.': case U'？': case U'?': case U'！': case U'!':
      return Punct::kPeriod;
    default:
      return std::nullopt;
  }
}

ParagraphId ParseParagraph(const json& obj, ParagraphId fallback_id, LyricsParagraph& out) {
  if (!obj.is_object()) throw Error(ErrorCategory::kSchema, "expected a JSON object");
  auto field = [&](const char* key) -> const json& {
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(ErrorCategory::kSchema, std::string("missing field '") + key + "'");
    return *it;
  };
  const json& rhythmic = field("rhythmic");
  const json& paragraphs = field("paragraphs");
  if (!rhythmic.is_string() || rhythmic.get<std::string>().empty()) {
    throw Error(ErrorCategory::kSchema, "'rhythmic' must be a non-empty string");
  }
  if (!paragraphs.is_array() || paragraphs.empty()) {
    throw Error(ErrorCategory::kSchema, "'paragraphs' must be a non-empty array of strings");
  }
  out.rhythmic = rhythmic.get<std::string>();
  if (auto it = obj.find("author"); it != obj.end() && it->is_string()) out.author = it->get<std::string>();
  out.id = fallback_id;
  if (auto it = obj.find("id"); it != obj.end()) {
    if (!it->is_number_unsigned()) throw Error(ErrorCategory::kSchema, "'id' must be a non-negative integer");
    out.id = it->get<ParagraphId>();
  }
  std::string text;
  for (const auto& p : paragraphs) {
    if (!p.is_string()) throw Error(ErrorCategory::kSchema, "'paragraphs' entries must be strings");
    text += p.get<std::string>();
  }
  out.sentences = SplitSentences(text);
  return out.id;
}

}  // namespace

std::vector<Sentence> SplitSentences(std::string_view text) {
  std::vector<Sentence> sentences;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = utf8::Decode(text, pos);
    if (utf8::IsWhitespace(cp)) continue;
    if (auto p = ClassifyPunct(cp)) {
      if (current.empty()) {
        throw Error(ErrorCategory::kSchema,
                    "empty sentence before punctuation at byte " + std::to_string(start));
      }
      sentences.push_back({std::move(current), *p});
      current.clear();
      continue;
    }
    current.append(text.substr(start, pos - start));
  }
  if (!current.empty()) {
    throw Error(ErrorCategory::kSchema, "trailing text without terminal punctuation: '" + current + "'");
  }
  if (sentences.empty()) throw Error(ErrorCategory::kSchema, "paragraph has no sentences");
  if (sentences.back().terminal != Punct::kPeriod) {
    throw Error(ErrorCategory::kSchema, "final sentence ends with a comma");
  }
  return sentences;
}

std::vector<LyricsParagraph> ParseCorpus(std::istream& in, std::string_view source) {
  std::vector<LyricsParagraph> corpus;
  std::vector<std::string> problems;
  std::map<ParagraphId, std::size_t> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::IsBlank(line)) continue;
    try {
      LyricsParagraph paragraph;
      ParseParagraph(json::parse(line), static_cast<ParagraphId>(line_no - 1), paragraph);
      if (auto [it, fresh] = seen_ids.emplace(paragraph.id, line_no); !fresh) {
        throw Error(ErrorCategory::kSchema, "duplicate id " + std::to_string(paragraph.id) +
                                                " (first seen on line " + std::to_string(it->second) + ")");
      }
      corpus.push_back(std::move(paragraph));
    } catch (const json::exception& e) {
      problems.push_back(std::string(source) + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
    } catch (const Error& e) {
      problems.push_back(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!problems.empty()) {
    std::string message = std::to_string(problems.size()) + " malformed corpus line(s)";
    for (const auto& p : problems) message += "\n  " + p;
    throw Error(ErrorCategory::kSchema, message);
  }
  if (corpus.empty()) throw Error(ErrorCategory::kSchema, std::string(source) + ": empty corpus");
  return corpus;
}

std::vector<LyricsParagraph> LoadCorpus(const std::filesystem::path& path) {
  auto in = detail::OpenInput(path);
  return ParseCorpus(in, path.string());
}

void SaveCorpus(std::span<const LyricsParagraph> corpus, const std::filesystem::path& path) {
  auto out = detail::OpenOutput(path);
  for (const auto& p : corpus) {
    json obj = {{"id", p.id}, {"rhythmic", p.rhythmic}, {"author", p.author}, {"paragraphs", json::array({p.Text()})}};
    out << obj.dump() << '\n';
  }
  if (!out) throw Error(ErrorCategory::kIo, "write failed: " + path.string());
}

std::size_t EditDistance(std::string_view a, std::string_view b) {
  const auto ca = utf8::Chars(a);
  const auto cb = utf8::Chars(b);
  std::vector<std::size_t> prev(cb.size() + 1);
  std::vector<std::size_t> cur(cb.size() + 1);
  for (std::size_t j = 0; j <= cb.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ca.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= cb.size(); ++j) {
      const std::size_t subst = prev[j - 1] + (ca[i - 1] == cb[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
    }
    std::swap(prev, cur);
  }
  return prev[cb.size()];
}

StructureTable StructureTable::Derive(std::span<const LyricsParagraph> corpus) {
  std::map<std::string, std::map<std::vector<StructureEntry>, std::size_t>, std::less<>> counts;
  for (const auto& p : corpus) ++counts[p.rhythmic][ShapeOf(p)];

  auto lengths = [](const std::vector<StructureEntry>& shape) {
    std::vector<std::uint32_t> out;
    for (const auto& e : shape) out.push_back(e.length);
    return out;
  };

  StructureTable table;
  for (const auto& [rhythmic, shapes] : counts) {
    const std::vector<StructureEntry>* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& [shape, count] : shapes) {
      if (best == nullptr || count > best_count ||
          (count == best_count && std::make_pair(lengths(shape), shape) < std::make_pair(lengths(*best), *best))) {
        best = &shape;
        best_count = count;
      }
    }
    SongStructure s{rhythmic, *best};
    s.Validate();
    table.table_.emplace(rhythmic, std::move(s));
  }
  return table;
}

StructureTable StructureTable::FromJson(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::kSchema, std::string("rhythmic table: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCategory::kSchema, "rhythmic table must be a JSON object");
  StructureTable table;
  for (const auto& [rhythmic, rows] : root.items()) {
    SongStructure s{rhythmic, {}};
    if (!rows.is_array()) throw Error(ErrorCategory::kSchema, "rhythmic table: '" + rhythmic + "' is not an array");
    for (const auto& row : rows) {
      if (!row.is_array() || row.size() != 2 || !row[0].is_number_unsigned() || !row[1].is_string()) {
        throw Error(ErrorCategory::kSchema, "rhythmic table: '" + rhythmic + "' rows must be [length, \"comma\"|\"period\"]");
      }
      auto p = ParsePunctName(row[1].get<std::string>());
      if (!p) throw Error(ErrorCategory::kSchema, "rhythmic table: '" + rhythmic + "' has unknown punctuation");
      s.entries.push_back({row[0].get<std::uint32_t>(), *p});
    }
    s.Validate();
    table.Insert(std::move(s));
  }
  return table;
}

StructureTable StructureTable::Load(const std::filesystem::path& path) {
  return FromJson(detail::ReadAll(path));
}

std::string StructureTable::ToJson() const {
  json root = json::object();
  for (const auto& [rhythmic, s] : table_) {
    json rows = json::array();
    for (const auto& e : s.entries) rows.push_back({e.length, PunctName(e.terminal)});
    root[rhythmic] = std::move(rows);
  }
  return root.dump(1);
}

void StructureTable::Save(const std::filesystem::path& path) const {
  auto out = detail::OpenOutput(path);
  out << ToJson() << '\n';
}

bool StructureTable::Contains(std::string_view rhythmic) const { return table_.find(rhythmic) != table_.end(); }

const SongStructure& StructureTable::Lookup(std::string_view rhythmic) const {
  if (auto it = table_.find(rhythmic); it != table_.end()) return it->second;
  std::vector<std::pair<std::size_t, std::string>> near;
  for (const auto& [name, _] : table_) near.emplace_back(EditDistance(rhythmic, name), name);
  std::sort(near.begin(), near.end());
  std::string message = "rhythmic not found: '" + std::string(rhythmic) + "'";
  if (!near.empty()) {
    message += "; nearest:";
    for (std::size_t k = 0; k < near.size() && k < 3; ++k) message += " " + near[k].second;
  }
  throw Error(ErrorCategory::kNotFound, message);
}

void StructureTable::Insert(SongStructure structure) {
  std::string key = structure.rhythmic;
  table_.insert_or_assign(std::move(key), std::move(structure));
}

void StructureTable::OverrideWith(const StructureTable& overrides) {
  for (const auto& [_, s] : overrides.table_) Insert(s);
}

std::vector<Prompt> LoadPrompts(const std::filesystem::path& path) {
  auto in = detail::OpenInput(path);
  std::vector<Prompt> prompts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::IsBlank(line)) continue;
    try {
      const json obj = json::parse(line);
      prompts.push_back({obj.at("topic").get<std::string>(), obj.at("rhythmic").get<std::string>()});
    } catch (const json::exception& e) {
      throw Error(ErrorCategory::kSchema, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return prompts;
}

}  // namespace cilyric
