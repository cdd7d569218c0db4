#pragma once

// Phrase connector: structure / rhyme losses, hypothesis extension, and the
// beam search that assembles a piece from a phrase pool.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cilyric/corpus.h"
#include "cilyric/fluency.h"
#include "cilyric/retriever.h"
#include "cilyric/rhyme.h"

namespace cilyric {

/// Realized sentence as seen by the losses. An open sentence is the one
/// still being written (no terminal yet).
struct LayoutSentence {
  std::uint32_t length = 0;
  bool closed = false;
  Punct terminal = Punct::kPeriod;  // meaningful when closed
  std::string last_char;

  bool operator==(const LayoutSentence&) const = default;
};

using Layout = std::vector<LayoutSentence>;

enum class ScoringMode {
  /// Closed sentences scored fully; the open sentence only for overflow;
  /// unrealized sentences free.
  kSearch,
  /// Every realized sentence counts as closed; unrealized sentences cost 1.
  kFinal,
};

/// Shape penalty: 2x - x^2 below 1, saturating at 1.
double ShapePenalty(double x);

/// Sum of per-sentence shape penalties against `structure`, positionally
/// aligned. Sentences beyond the structure cost 1 each. Result in [0, max(N, layout)].
double StructureLoss(std::span<const LayoutSentence> layout, const SongStructure& structure, ScoringMode mode);

/// Rhyme dispersion over the final characters of realized sentences whose
/// structure terminal is PERIOD (closed ones only in search mode).
double RhymeLoss(std::span<const LayoutSentence> layout, const SongStructure& structure, const RhymeTable& table,
                 ScoringMode mode);

struct LossWeights {
  double alpha = 1.0;  // fluency
  double beta = 1.0;   // structure
  double gamma = 1.0;  // rhyme

  /// Throws Error(kConfig) for negative or all-zero weights.
  void Validate() const;
};

struct LossTerms {
  double fluency = 0.0;  // accumulated over transitions
  double structure = 0.0;
  double rhyme = 0.0;
  double total = 0.0;
};

struct Step {
  PhraseId phrase = 0;
  ConnectionClass connection = ConnectionClass::kDirect;

  bool operator==(const Step&) const = default;
};

struct Hypothesis {
  std::vector<Step> steps;
  Layout layout;
  /// Realized text; closed sentences carry their terminal glyph. This is the
  /// history handed to the scorer.
  std::string text;
  std::vector<PhraseId> used;  // sorted
  LossTerms loss;
  /// Closed with a final PERIOD; no further extension allowed.
  bool complete = false;

  bool Uses(PhraseId id) const;
};

/// Everything the search needs besides the pool.
struct ConnectorContext {
  const SongStructure& structure;
  const RhymeTable& rhymes;
  LossWeights weights;
};

/// Extends `h` by `phrase` under `scenario` using a precomputed verdict for
/// (h.text, phrase.text). Returns nullopt when the extension is rejected:
/// `h` is complete, a non-DIRECT first step, or a new sentence beyond N.
/// Throws Error(kSearch) on phrase reuse.
std::optional<Hypothesis> ExtendWithVerdict(const Hypothesis& h, const PhraseRecord& phrase, ConnectionClass scenario,
                                            const ScorerVerdict& verdict, const ConnectorContext& ctx);

/// Same, asking `scorer` for the verdict.
std::optional<Hypothesis> Extend(const Hypothesis& h, const PhraseRecord& phrase, ConnectionClass scenario,
                                 Scorer& scorer, const ConnectorContext& ctx);

/// Closes the last sentence with a PERIOD and rescores in final mode.
/// Returns nullopt unless exactly N sentences are realized and `h` is not
/// already complete.
std::optional<Hypothesis> Finalize(const Hypothesis& h, const ConnectorContext& ctx);

/// Ordering used for pruning and selection: total loss, then step count,
/// then phrase ids, then connections.
bool BetterHypothesis(const Hypothesis& a, const Hypothesis& b);

struct PieceUnit {
  std::uint64_t id = 0;  // phrase id, or sentence ordinal for the baseline
  std::string text;
  ConnectionClass connection = ConnectionClass::kDirect;
};

struct LyricsPiece {
  std::string method;
  Prompt prompt;
  std::string text;
  std::vector<Sentence> sentences;
  std::vector<PieceUnit> units;
  LossTerms loss;
  bool complete = false;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;

  /// Deterministic JSON (wall time excluded).
  nlohmann::json ToJson(const SongStructure& structure) const;
};

inline constexpr std::size_t kUnboundedBeam = std::numeric_limits<std::size_t>::max();

struct GenerateOptions {
  LossWeights weights;
  std::size_t beam_width = 16;
  std::uint64_t seed = 0;
};

struct SearchStats {
  std::size_t iterations = 0;
  std::size_t expansions = 0;
  std::size_t scorer_calls = 0;
  std::size_t completed = 0;
  bool upper_fallback = false;
  bool lower_fallback = false;
};

/// Beam search over `pool`. Sentences in the structure's upper half draw
/// from the upper pool, the rest from the lower pool; an empty half falls
/// back to the whole pool. Returns the best complete piece, or the best
/// partial one with complete = false when none is reachable.
/// Throws Error(kSearch) when the pool has no sentence-initial phrase.
LyricsPiece Generate(const Prompt& prompt, const SongStructure& structure, const PhrasePool& pool, Scorer& scorer,
                     const RhymeTable& rhymes, const GenerateOptions& options, SearchStats* stats = nullptr);

/// Converts a hypothesis to a piece, resolving phrase texts from `pool`.
LyricsPiece ToPiece(const Hypothesis& h, const PhrasePool& pool, const Prompt& prompt);

}  // namespace cilyric
