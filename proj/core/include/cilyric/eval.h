#pragma once

// End-to-end helpers (topic -> pool -> piece) and automatic metrics.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cilyric/connector.h"
#include "cilyric/corpus.h"
#include "cilyric/embedding.h"
#include "cilyric/retriever.h"
#include "cilyric/rhyme.h"

namespace cilyric {

/// Non-owning view of the loaded artifacts.
struct Workspace {
  std::span<const LyricsParagraph> corpus;
  std::span<const PhraseRecord> phrases;
  const EmbeddingMatrix& matrix;  // one row per corpus sentence
  const EmbeddingProvider& provider;
  const StructureTable& structures;
  const RhymeTable& rhymes;
};

struct RunSettings {
  SamplingParams sampling;
  GenerateOptions generate;
};

/// Unit-norm topic vector.
Vector TopicVector(const Workspace& ws, std::string_view topic);

PhrasePool RetrievePool(const Workspace& ws, std::string_view topic, const SamplingParams& params, std::uint64_t seed);

/// Retrieval plus beam search; the seed drives pool sampling.
LyricsPiece GenerateForPrompt(const Workspace& ws, const Prompt& prompt, Scorer& scorer, const RunSettings& settings,
                              std::uint64_t seed, SearchStats* stats = nullptr);

LyricsPiece BaselineForPrompt(const Workspace& ws, const Prompt& prompt, const RunSettings& settings,
                              std::uint64_t seed);

struct EvalReport {
  /// Positional exact-length matches over max(N, realized sentences).
  double structure_match_rate = 0.0;
  /// 1 - rhyme loss of the finished layout.
  double rhyme_consistency = 0.0;
  /// Units minus distinct unit ids.
  std::size_t phrase_reuse_count = 0;
  /// Mean fluency loss over unit-to-unit transitions; 0 without transitions.
  double mean_fluency_loss = 0.0;
  std::size_t transitions = 0;
  double wall_seconds = 0.0;
};

/// The piece's sentences as a finished layout.
Layout LayoutOf(const LyricsPiece& piece);

/// Re-derives the loss terms of a finished piece from its units: fluency
/// summed over transitions, structure and rhyme in final mode.
LossTerms ScorePiece(const LyricsPiece& piece, const SongStructure& structure, const RhymeTable& table,
                     Scorer& scorer, const LossWeights& weights);

EvalReport Evaluate(const LyricsPiece& piece, const SongStructure& structure, const RhymeTable& table,
                    Scorer& scorer);

struct MethodOutcome {
  bool ok = false;
  std::string error;  // "category: message" when !ok
  bool complete = false;
  double total_loss = 0.0;
  EvalReport report;
};

struct PromptOutcome {
  Prompt prompt;
  MethodOutcome connector;
  MethodOutcome baseline;
};

struct PromptsetReport {
  std::vector<PromptOutcome> rows;
};

/// Runs both methods on every prompt with seed `seed + index`. A failing
/// prompt is recorded in its row and does not stop the run.
PromptsetReport RunPromptset(const Workspace& ws, std::span<const Prompt> prompts, Scorer& scorer,
                             const RunSettings& settings, std::uint64_t seed);

/// One row per prompt, then a "mean" row averaging successful runs.
void WriteCsv(const PromptsetReport& report, std::ostream& out);

/// Header of the CSV written by WriteCsv.
const std::vector<std::string>& CsvColumns();

}  // namespace cilyric
