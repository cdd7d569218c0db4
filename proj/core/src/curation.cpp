#include "cilyric/curation.h"

#include <nlohmann/json.hpp>

#include "cilyric/error.h"
#include "cilyric/utf8.h"
#include "io_util.h"

namespace cilyric {

using nlohmann::json;

namespace {

SemanticTree TreeFromJson(const json& node) {
  if (node.is_string()) return SemanticTree::Leaf(node.get<std::string>());
  if (!node.is_array()) throw Error(ErrorCategory::kSchema, "tree nodes must be strings or arrays");
  if (node.empty()) throw Error(ErrorCategory::kSchema, "tree contains an empty internal node");
  SemanticTree tree;
  tree.children.reserve(node.size());
  for (const auto& child : node) {
    SemanticTree sub = TreeFromJson(child);
    if (sub.IsLeaf() && sub.content.empty()) {
      throw Error(ErrorCategory::kSchema, "tree contains an empty leaf or empty internal node");
    }
    tree.children.push_back(std::move(sub));
  }
  return tree;
}

json TreeToJson(const SemanticTree& tree) {
  if (tree.IsLeaf()) return tree.content;
  json arr = json::array();
  for (const auto& c : tree.children) arr.push_back(TreeToJson(c));
  return arr;
}

void Extract(const SemanticTree& node, std::size_t threshold, std::vector<std::string>& out) {
  if (node.IsLeaf()) {
    if (!node.content.empty()) out.push_back(node.content);
    return;
  }
  for (const auto& child : node.children) {
    if (child.IsLeaf()) {
      out.push_back(child.content);
      continue;
    }
    std::string joined = ConcatNode(child);
    if (utf8::Length(joined) <= threshold) {
      out.push_back(std::move(joined));
    } else {
      Extract(child, threshold, out);
    }
  }
}

std::string Describe(const LyricsParagraph& p, std::size_t i) {
  return "paragraph " + std::to_string(p.id) + " sentence " + std::to_string(i) + " ('" +
         p.sentences[i].text + "')";
}

}  // namespace

std::size_t SemanticTree::LeafCount() const {
  if (IsLeaf()) return content.empty() ? 0 : 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.LeafCount();
  return n;
}

SemanticTree SemanticTree::FromJson(std::string_view json_text) {
  try {
    return TreeFromJson(json::parse(json_text));
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::kSchema, std::string("invalid tree JSON: ") + e.what());
  }
}

std::string SemanticTree::ToJson() const { return TreeToJson(*this).dump(); }

std::string ConcatNode(const SemanticTree& node) {
  if (node.IsLeaf()) return node.content;
  std::string joined;
  for (const auto& c : node.children) joined += ConcatNode(c);
  return joined;
}

std::vector<std::string> ExtractPhrases(const SemanticTree& root, std::size_t threshold) {
  std::vector<std::string> out;
  Extract(root, threshold, out);
  return out;
}

TreeBank ParseTrees(std::istream& in, std::string_view source) {
  TreeBank bank;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::IsBlank(line)) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    try {
      const json obj = json::parse(line);
      TreeKey key{obj.at("paragraph_id").get<ParagraphId>(), obj.at("sentence_index").get<std::uint32_t>()};
      if (!bank.emplace(key, TreeFromJson(obj.at("tree"))).second) {
        throw Error(ErrorCategory::kSchema, "duplicate tree for paragraph " + std::to_string(key.first) +
                                                " sentence " + std::to_string(key.second));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCategory::kSchema, where + e.what());
    } catch (const Error& e) {
      throw Error(e.category(), where + e.what());
    }
  }
  return bank;
}

TreeBank LoadTrees(const std::filesystem::path& path) {
  auto in = detail::OpenInput(path);
  return ParseTrees(in, path.string());
}

std::vector<PhraseRecord> Curate(std::span<const LyricsParagraph> corpus, const TreeBank& trees,
                                 std::size_t threshold) {
  std::vector<PhraseRecord> records;
  PhraseId next_id = 0;
  for (const auto& paragraph : corpus) {
    const std::size_t count = paragraph.sentences.size();
    for (std::size_t i = 0; i < count; ++i) {
      auto it = trees.find({paragraph.id, static_cast<std::uint32_t>(i)});
      if (it == trees.end()) {
        throw Error(ErrorCategory::kIntegrity, "missing tree for " + Describe(paragraph, i));
      }
      if (ConcatNode(it->second) != paragraph.sentences[i].text) {
        throw Error(ErrorCategory::kIntegrity, "tree leaves spell '" + ConcatNode(it->second) +
                                                   "' but the corpus has " + Describe(paragraph, i));
      }
      const auto phrases = ExtractPhrases(it->second, threshold);
      for (std::size_t j = 0; j < phrases.size(); ++j) {
        PhraseRecord r;
        r.id = next_id++;
        r.text = phrases[j];
        r.source_paragraph = paragraph.id;
        r.sentence_index = static_cast<std::uint32_t>(i);
        r.phrase_index = static_cast<std::uint32_t>(j);
        r.is_sentence_begin = j == 0;
        r.is_sentence_end = j + 1 == phrases.size();
        r.is_paragraph_begin = i == 0 && j == 0;
        r.half = HalfOf(i, count);
        r.rhythmic = paragraph.rhythmic;
        r.sentence_terminal = paragraph.sentences[i].terminal;
        records.push_back(std::move(r));
      }
    }
  }
  return records;
}

CurationStats Summarize(std::span<const PhraseRecord> phrases, std::size_t threshold) {
  CurationStats stats;
  stats.phrase_count = phrases.size();
  std::size_t chars = 0;
  for (const auto& p : phrases) {
    const std::size_t n = utf8::Length(p.text);
    chars += n;
    if (n > threshold) ++stats.over_threshold;
  }
  if (!phrases.empty()) stats.mean_length = static_cast<double>(chars) / static_cast<double>(phrases.size());
  return stats;
}

json PhraseToJson(const PhraseRecord& p) {
  return {{"id", p.id},
          {"text", p.text},
          {"source_paragraph", p.source_paragraph},
          {"sentence_index", p.sentence_index},
          {"phrase_index", p.phrase_index},
          {"is_sentence_begin", p.is_sentence_begin},
          {"is_sentence_end", p.is_sentence_end},
          {"is_paragraph_begin", p.is_paragraph_begin},
          {"half", HalfName(p.half)},
          {"rhythmic", p.rhythmic},
          {"sentence_terminal", PunctName(p.sentence_terminal)}};
}

PhraseRecord PhraseFromJson(const json& obj) {
  PhraseRecord r;
  r.id = obj.at("id").get<PhraseId>();
  r.text = obj.at("text").get<std::string>();
  r.source_paragraph = obj.at("source_paragraph").get<ParagraphId>();
  r.sentence_index = obj.at("sentence_index").get<std::uint32_t>();
  r.phrase_index = obj.at("phrase_index").get<std::uint32_t>();
  r.is_sentence_begin = obj.at("is_sentence_begin").get<bool>();
  r.is_sentence_end = obj.at("is_sentence_end").get<bool>();
  r.is_paragraph_begin = obj.at("is_paragraph_begin").get<bool>();
  const auto half = obj.at("half").get<std::string>();
  if (half != "upper" && half != "lower") throw Error(ErrorCategory::kSchema, "bad half '" + half + "'");
  r.half = half == "upper" ? Half::kUpper : Half::kLower;
  r.rhythmic = obj.at("rhythmic").get<std::string>();
  auto terminal = ParsePunctName(obj.at("sentence_terminal").get<std::string>());
  if (!terminal) throw Error(ErrorCategory::kSchema, "bad sentence_terminal");
  r.sentence_terminal = *terminal;
  if (r.text.empty()) throw Error(ErrorCategory::kSchema, "empty phrase text");
  return r;
}

void SavePhrases(std::span<const PhraseRecord> phrases, const std::filesystem::path& path) {
  auto out = detail::OpenOutput(path);
  for (const auto& p : phrases) out << PhraseToJson(p).dump() << '\n';
  if (!out) throw Error(ErrorCategory::kIo, "write failed: " + path.string());
}

std::vector<PhraseRecord> ParsePhrases(std::istream& in, std::string_view source) {
  std::vector<PhraseRecord> phrases;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::IsBlank(line)) continue;
    try {
      phrases.push_back(PhraseFromJson(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCategory::kSchema, std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCategory::kSchema, std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return phrases;
}

std::vector<PhraseRecord> LoadPhrases(const std::filesystem::path& path) {
  auto in = detail::OpenInput(path);
  return ParsePhrases(in, path.string());
}

}  // namespace cilyric
