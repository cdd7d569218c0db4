#include "cilyric/baseline.h"

#include <chrono>
#include <map>
#include <unordered_map>

#include "cilyric/error.h"
#include "cilyric/rng.h"
#include "cilyric/utf8.h"

namespace cilyric {

LyricsPiece BaselineGenerate(const Prompt& prompt, const SongStructure& structure,
                             std::span<const LyricsParagraph> corpus, const EmbeddingMatrix& matrix,
                             std::span<const double> topic, const SamplingParams& params, std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  params.Validate();
  structure.Validate();

  std::unordered_map<std::string, const Sentence*> by_key;
  for (const auto& p : corpus) {
    for (std::size_t i = 0; i < p.sentences.size(); ++i) by_key.emplace(SentenceKey(p.id, i), &p.sentences[i]);
  }
  auto sentence_at = [&](std::size_t row) -> const Sentence& {
    auto it = by_key.find(matrix.ids()[row]);
    if (it == by_key.end()) {
      throw Error(ErrorCategory::kIntegrity, "embedding row '" + matrix.ids()[row] + "' has no corpus sentence");
    }
    return *it->second;
  };

  const auto ranked = RankRows(topic, matrix);
  if (ranked.empty()) throw Error(ErrorCategory::kInsufficientData, "no sentences to retrieve from");
  std::map<std::uint32_t, std::vector<std::size_t>> by_length;
  for (std::size_t pos : SampleIntervals(ranked.size(), params, seed)) {
    const std::size_t row = ranked[pos].row;
    by_length[static_cast<std::uint32_t>(utf8::Length(sentence_at(row).text))].push_back(row);
  }

  std::string missing;
  for (const auto& e : structure.entries) {
    if (by_length.count(e.length) == 0 && missing.find(" " + std::to_string(e.length) + ",") == std::string::npos) {
      missing += " " + std::to_string(e.length) + ",";
    }
  }
  if (!missing.empty()) {
    missing.pop_back();
    throw Error(ErrorCategory::kInsufficientData,
                "no retrieved sentence of length" + missing + " for " + structure.rhythmic);
  }

  Rng rng(SplitMix64(seed));
  std::map<std::uint32_t, std::vector<std::size_t>> unused = by_length;
  LyricsPiece piece;
  piece.method = "baseline";
  piece.prompt = prompt;
  piece.seed = seed;
  piece.complete = true;
  for (std::size_t k = 0; k < structure.size(); ++k) {
    const auto& entry = structure.entries[k];
    auto& fresh = unused[entry.length];
    std::size_t row;
    if (!fresh.empty()) {
      const auto pick = static_cast<std::size_t>(rng.Below(fresh.size()));
      row = fresh[pick];
      fresh.erase(fresh.begin() + static_cast<std::ptrdiff_t>(pick));
    } else {
      const auto& all = by_length[entry.length];
      row = all[static_cast<std::size_t>(rng.Below(all.size()))];
    }
    const std::string& text = sentence_at(row).text;
    const ConnectionClass link = k == 0 ? ConnectionClass::kDirect : ClassOf(structure.entries[k - 1].terminal);
    piece.units.push_back({row, text, link});
    piece.sentences.push_back({text, entry.terminal});
    piece.text += text + std::string(PunctGlyph(entry.terminal));
  }
  piece.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return piece;
}

}  // namespace cilyric
