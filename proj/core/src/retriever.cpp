#include "cilyric/retriever.h"

#include <algorithm>
#include <string>

#include "cilyric/error.h"
#include "cilyric/rng.h"

namespace cilyric {

void SamplingParams::Validate() const {
  if (intervals == 0 || interval_size == 0 || per_interval == 0) {
    throw Error(ErrorCategory::kConfig, "sampling parameters M, L, N must be positive");
  }
  if (per_interval > interval_size) {
    throw Error(ErrorCategory::kConfig, "samples per interval N=" + std::to_string(per_interval) +
                                            " exceeds interval size L=" + std::to_string(interval_size));
  }
}

std::vector<std::size_t> SampleIntervals(std::size_t ranked_count, const SamplingParams& params,
                                         std::uint64_t seed) {
  params.Validate();
  Rng rng(seed);
  std::vector<std::size_t> picked;
  picked.reserve(params.Capacity());
  for (std::size_t k = 0; k < params.intervals; ++k) {
    const std::size_t begin = k * params.interval_size;
    if (begin >= ranked_count) break;
    const std::size_t size = std::min(params.interval_size, ranked_count - begin);
    for (std::size_t offset : rng.SampleIndices(size, std::min(params.per_interval, size))) {
      picked.push_back(begin + offset);
    }
  }
  return picked;
}

PhraseIndex::PhraseIndex(std::span<const PhraseRecord> phrases) : phrases_(phrases) {
  by_id_.reserve(phrases.size());
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    if (!by_id_.emplace(phrases[i].id, i).second) {
      throw Error(ErrorCategory::kIntegrity, "duplicate phrase id " + std::to_string(phrases[i].id));
    }
  }
}

const PhraseRecord& PhraseIndex::at(PhraseId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw Error(ErrorCategory::kNotFound, "unknown phrase id " + std::to_string(id));
  return phrases_[it->second];
}

std::pair<std::vector<PhraseRecord>, std::vector<PhraseRecord>> SplitHalves(std::span<const PhraseRecord> members) {
  std::pair<std::vector<PhraseRecord>, std::vector<PhraseRecord>> halves;
  for (const auto& p : members) (p.half == Half::kUpper ? halves.first : halves.second).push_back(p);
  return halves;
}

PhrasePool MakePool(std::vector<PhraseRecord> members) {
  PhrasePool pool;
  auto [upper, lower] = SplitHalves(members);
  pool.members = std::move(members);
  pool.upper = std::move(upper);
  pool.lower = std::move(lower);
  return pool;
}

PhrasePool SamplePool(const SimilarityRanking& ranking, const PhraseIndex& index, const SamplingParams& params,
                      std::uint64_t seed) {
  params.Validate();
  if (ranking.empty()) throw Error(ErrorCategory::kInsufficientData, "cannot sample a pool from an empty ranking");
  std::vector<PhraseRecord> members;
  for (std::size_t pos : SampleIntervals(ranking.size(), params, seed)) members.push_back(index.at(ranking[pos].id));
  PhrasePool pool = MakePool(std::move(members));
  pool.params = params;
  pool.seed = seed;
  return pool;
}

}  // namespace cilyric
