#pragma once

// Sentence embeddings, the precomputed-embedding file, and similarity ranking.
//
// Every phrase inherits the vector of its source sentence, so the matrix is
// keyed by sentence (SentenceKey) rather than by phrase.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cilyric/corpus.h"

namespace cilyric {

using Vector = std::vector<double>;

double Dot(std::span<const double> a, std::span<const double> b);
double Norm(std::span<const double> v);
double Cosine(std::span<const double> a, std::span<const double> b);

/// Rows are stored L2-normalized; ids are unique.
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(std::size_t dim = 0) : dim_(dim) {}

  /// Normalizes `v` before storing. Throws on duplicate id, dimension
  /// mismatch, or a zero vector.
  void Add(std::string id, std::span<const double> v);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::span<const double> Row(std::size_t row) const {
    return {data_.data() + row * dim_, dim_};
  }
  std::optional<std::size_t> Find(std::string_view id) const;

  /// Binary "EMB1" format: u32 count, u32 dim, then per row u32 id length,
  /// UTF-8 id, dim little-endian f32. Rows whose norm is off by more than
  /// 1e-4 are re-normalized on load.
  void Write(std::ostream& out) const;
  static EmbeddingMatrix Read(std::istream& in);
  void Save(const std::filesystem::path& path) const;
  static EmbeddingMatrix Load(const std::filesystem::path& path);

  bool operator==(const EmbeddingMatrix& other) const {
    return dim_ == other.dim_ && ids_ == other.ids_ && data_ == other.data_;
  }

 private:
  void AddRaw(std::string id, std::span<const double> v);

  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Source of sentence and topic vectors.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  /// `key` is the SentenceKey of the sentence being embedded.
  virtual Vector EmbedSentence(std::string_view key, std::string_view text) const = 0;
  virtual Vector EmbedTopic(std::string_view topic) const = 0;
};

inline constexpr std::size_t kDefaultEmbeddingDim = 256;

/// Character-bigram TF-IDF projected to `dim` by a seeded random sign matrix.
/// Bigrams include boundary markers, so single characters still carry
/// information. IDF is ln((1 + docs) / (1 + df)) + 1 over corpus sentences.
class BuiltinEmbedder final : public EmbeddingProvider {
 public:
  BuiltinEmbedder(std::uint64_t seed, std::size_t dim = kDefaultEmbeddingDim);

  /// Collects document frequencies from every sentence in `corpus`.
  static BuiltinEmbedder Fit(std::span<const LyricsParagraph> corpus, std::uint64_t seed,
                             std::size_t dim = kDefaultEmbeddingDim);
  /// Same, from raw documents.
  static BuiltinEmbedder FitTexts(std::span<const std::string> documents, std::uint64_t seed,
                                  std::size_t dim = kDefaultEmbeddingDim);

  std::size_t dim() const override { return dim_; }
  Vector EmbedSentence(std::string_view, std::string_view text) const override { return Embed(text); }
  Vector EmbedTopic(std::string_view topic) const override { return Embed(topic); }

  /// Throws Error(kSchema) for text that yields no features.
  Vector Embed(std::string_view text) const;

  /// TF-IDF weights before projection, keyed by bigram.
  std::map<std::string, double> Weights(std::string_view text) const;
  double Idf(std::string_view bigram) const;

  void Save(const std::filesystem::path& path) const;
  static BuiltinEmbedder Load(const std::filesystem::path& path);
  std::string ToJson() const;
  static BuiltinEmbedder FromJson(std::string_view json_text);

 private:
  std::uint64_t seed_;
  std::size_t dim_;
  std::size_t documents_ = 0;
  std::map<std::string, std::uint32_t, std::less<>> df_;
};

/// Character bigrams with "^" / "$" boundary markers.
std::vector<std::string> Bigrams(std::string_view text);

/// Vectors read from an embedding file. Sentences are looked up by
/// SentenceKey, topics by the key "topic:<text>".
class FileEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit FileEmbeddingProvider(EmbeddingMatrix matrix) : matrix_(std::move(matrix)) {}

  std::size_t dim() const override { return matrix_.dim(); }
  Vector EmbedSentence(std::string_view key, std::string_view text) const override;
  Vector EmbedTopic(std::string_view topic) const override;

 private:
  Vector Lookup(const std::string& key, std::string_view what) const;
  EmbeddingMatrix matrix_;
};

/// One row per corpus sentence, in corpus order.
EmbeddingMatrix EmbedSentences(std::span<const LyricsParagraph> corpus, const EmbeddingProvider& provider);

struct ScoredPhrase {
  PhraseId id = 0;
  double score = 0.0;

  bool operator==(const ScoredPhrase&) const = default;
};

/// Sorted by score descending, ties by phrase id ascending.
using SimilarityRanking = std::vector<ScoredPhrase>;

/// Scores every phrase by the cosine between `topic` (unit norm) and its
/// source sentence's row. Throws Error(kIntegrity) if a sentence is missing.
SimilarityRanking RankBySimilarity(std::span<const double> topic, std::span<const PhraseRecord> phrases,
                                   const EmbeddingMatrix& matrix);

struct ScoredRow {
  std::size_t row = 0;
  double score = 0.0;
};

/// Every matrix row scored against `topic`, descending, ties by row index.
std::vector<ScoredRow> RankRows(std::span<const double> topic, const EmbeddingMatrix& matrix);

}  // namespace cilyric
