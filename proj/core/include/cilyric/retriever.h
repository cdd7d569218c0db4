#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cilyric/corpus.h"
#include "cilyric/embedding.h"

namespace cilyric {

/// Interval sampling parameters: `intervals` (M) consecutive windows of
/// `interval_size` (L) ranked items, `per_interval` (N) draws from each.
struct SamplingParams {
  std::size_t intervals = 10;
  std::size_t interval_size = 200;
  std::size_t per_interval = 30;

  /// Throws Error(kConfig) when a value is zero or per_interval > interval_size.
  void Validate() const;
  std::size_t Capacity() const { return intervals * per_interval; }
};

/// Ranking positions selected by interval sampling over a ranked list of
/// `ranked_count` items, ascending. A short ranking yields its full
/// intervals plus one truncated interval that contributes min(N, size).
std::vector<std::size_t> SampleIntervals(std::size_t ranked_count, const SamplingParams& params,
                                         std::uint64_t seed);

/// Id -> record lookup over a phrase database.
class PhraseIndex {
 public:
  explicit PhraseIndex(std::span<const PhraseRecord> phrases);
  const PhraseRecord& at(PhraseId id) const;
  bool contains(PhraseId id) const { return by_id_.count(id) != 0; }

 private:
  std::span<const PhraseRecord> phrases_;
  std::unordered_map<PhraseId, std::size_t> by_id_;
};

struct PhrasePool {
  /// All sampled phrases in ranking order.
  std::vector<PhraseRecord> members;
  std::vector<PhraseRecord> upper;
  std::vector<PhraseRecord> lower;
  SamplingParams params;
  std::uint64_t seed = 0;

  std::size_t size() const { return members.size(); }
};

/// Stable partition by PhraseRecord::half.
std::pair<std::vector<PhraseRecord>, std::vector<PhraseRecord>> SplitHalves(std::span<const PhraseRecord> members);

/// Interval-samples `ranking` and splits the result into halves.
/// Throws Error(kConfig) for bad params, Error(kInsufficientData) for an
/// empty ranking.
PhrasePool SamplePool(const SimilarityRanking& ranking, const PhraseIndex& index, const SamplingParams& params,
                      std::uint64_t seed);

/// Pool made directly from `members` (ranking order), for callers that
/// assemble candidates themselves.
PhrasePool MakePool(std::vector<PhraseRecord> members);

}  // namespace cilyric
