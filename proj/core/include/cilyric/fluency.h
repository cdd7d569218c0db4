#pragma once

// Next-phrase-prediction (NPP) data, the scorer contract, a naive-Bayes
// scorer over boundary characters, and the fluency loss.

#include <array>
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

#include "cilyric/corpus.h"

namespace cilyric {

/// How a candidate phrase follows the history. Order matches the rows of
/// the one-hot label vector.
enum class ConnectionClass : std::uint8_t { kDirect = 0, kComma = 1, kPeriod = 2, kOther = 3 };

inline constexpr std::size_t kClassCount = 4;
inline constexpr std::array<ConnectionClass, kClassCount> kAllClasses = {
    ConnectionClass::kDirect, ConnectionClass::kComma, ConnectionClass::kPeriod, ConnectionClass::kOther};
/// The three ways the connector may attach a phrase.
inline constexpr std::array<ConnectionClass, 3> kScenarios = {ConnectionClass::kDirect, ConnectionClass::kComma,
                                                               ConnectionClass::kPeriod};

std::string_view ClassName(ConnectionClass c);  // "direct" | "comma" | "period" | "other"
std::optional<ConnectionClass> ParseClassName(std::string_view name);
ConnectionClass ClassOf(Punct p);
inline std::size_t Index(ConnectionClass c) { return static_cast<std::size_t>(c); }

struct NppSample {
  std::string history;
  std::string candidate;
  ConnectionClass label = ConnectionClass::kOther;

  // Provenance; not serialized.
  PhraseId anchor = 0;           // last phrase of the history
  PhraseId candidate_id = 0;
  PhraseId true_successor = 0;   // differs from candidate_id only for kOther
};

struct NppCounts {
  std::array<std::size_t, kClassCount> per_class{};
};

/// Per-class targets for `total` samples: round(total * random_fraction)
/// OTHER samples, the rest split evenly over DIRECT/COMMA/PERIOD with any
/// remainder going to DIRECT first, then COMMA.
NppCounts PlanNppCounts(std::size_t total, double random_fraction);

/// Builds labelled pairs from a phrase database with full provenance.
/// History is the paragraph prefix up to and including the anchor phrase,
/// sentences joined by their terminal glyphs. OTHER candidates are drawn
/// from a different paragraph and never equal the true successor.
/// Throws Error(kInsufficientData) reporting achievable counts.
std::vector<NppSample> BuildNppDataset(std::span<const PhraseRecord> phrases, std::size_t total,
                                       double random_fraction, std::uint64_t seed);

/// NPP JSONL: {"history": str, "candidate": str, "label": class name}.
void SaveNppDataset(std::span<const NppSample> samples, const std::filesystem::path& path);
std::vector<NppSample> ParseNppDataset(std::istream& in, std::string_view source = "<stream>");
std::vector<NppSample> LoadNppDataset(const std::filesystem::path& path);

/// Probability over the four connection classes.
struct ScorerVerdict {
  std::array<double, kClassCount> probs{0.25, 0.25, 0.25, 0.25};

  double operator[](ConnectionClass c) const { return probs[Index(c)]; }
  ConnectionClass Argmax() const;
  bool IsValid(double tolerance = 1e-6) const;
};

/// Pluggable next-phrase scorer.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual ScorerVerdict Score(std::string_view history, std::string_view candidate) = 0;
};

inline constexpr double kFluencyLossCap = 20.0;

/// -ln P(scenario), clipped to [0, kFluencyLossCap]. `scenario` must not be
/// kOther (Error(kConfig)).
double FluencyLoss(const ScorerVerdict& verdict, ConnectionClass scenario);

/// Boundary features fed to the naive-Bayes scorer: last one and two
/// characters of the (windowed) history, first one and two characters of
/// the candidate, and the cross bigram of history-last and candidate-first.
std::vector<std::string> BoundaryFeatures(std::string_view history, std::string_view candidate,
                                          std::size_t window);

inline constexpr std::size_t kDefaultHistoryWindow = 30;

/// Categorical naive Bayes with add-k smoothing on both the prior and every
/// feature likelihood. Immutable after training.
class NaiveBayesScorer final : public Scorer {
 public:
  /// Throws Error(kInsufficientData) if a class has no samples.
  static NaiveBayesScorer Train(std::span<const NppSample> samples, double smoothing = 1.0,
                                std::size_t window = kDefaultHistoryWindow);

  ScorerVerdict Score(std::string_view history, std::string_view candidate) override { return Predict(history, candidate); }
  ScorerVerdict Predict(std::string_view history, std::string_view candidate) const;

  double smoothing() const { return smoothing_; }
  std::size_t window() const { return window_; }
  const std::array<std::size_t, kClassCount>& class_counts() const { return class_counts_; }
  /// Training count of `feature` under class `c`.
  std::size_t FeatureCount(std::string_view feature, ConnectionClass c) const;
  /// Distinct values seen for the feature kind ("h1", "h2", "c1", "c2", "x").
  std::size_t VocabularySize(std::string_view kind) const;

  std::string ToJson() const;
  static NaiveBayesScorer FromJson(std::string_view json_text);
  void Save(const std::filesystem::path& path) const;
  static NaiveBayesScorer Load(const std::filesystem::path& path);

 private:
  double smoothing_ = 1.0;
  std::size_t window_ = kDefaultHistoryWindow;
  std::array<std::size_t, kClassCount> class_counts_{};
  std::size_t total_ = 0;
  std::map<std::string, std::array<std::size_t, kClassCount>, std::less<>> features_;
  std::map<std::string, std::size_t, std::less<>> vocab_;
};

}  // namespace cilyric
