#pragma once

// Sentence-level baseline: retrieve whole corpus sentences by topic and
// fill each structure slot with a random sentence of exactly the right length.

#include <cstdint>
#include <span>

#include "cilyric/connector.h"
#include "cilyric/corpus.h"
#include "cilyric/embedding.h"
#include "cilyric/retriever.h"

namespace cilyric {

/// `matrix` holds one row per corpus sentence keyed by SentenceKey; `topic`
/// is unit norm. Sentences are ranked by cosine and interval-sampled exactly
/// like phrases. Each slot then takes a uniformly random retrieved sentence
/// of the slot's length, without replacement while unused ones remain.
/// Throws Error(kInsufficientData) listing every length with no candidate.
LyricsPiece BaselineGenerate(const Prompt& prompt, const SongStructure& structure,
                             std::span<const LyricsParagraph> corpus, const EmbeddingMatrix& matrix,
                             std::span<const double> topic, const SamplingParams& params, std::uint64_t seed);

}  // namespace cilyric
