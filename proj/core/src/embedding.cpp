#include "cilyric/embedding.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "cilyric/error.h"
#include "cilyric/rng.h"
#include "cilyric/utf8.h"
#include "io_util.h"

namespace cilyric {

using nlohmann::json;

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm(std::span<const double> v) { return std::sqrt(Dot(v, v)); }

double Cosine(std::span<const double> a, std::span<const double> b) {
  const double na = Norm(a);
  const double nb = Norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return Dot(a, b) / (na * nb);
}

// --- EmbeddingMatrix -------------------------------------------------------

void EmbeddingMatrix::AddRaw(std::string id, std::span<const double> v) {
  if (v.size() != dim_) {
    throw Error(ErrorCategory::kSchema, "embedding '" + id + "' has dim " + std::to_string(v.size()) +
                                            ", expected " + std::to_string(dim_));
  }
  if (index_.count(id) != 0) throw Error(ErrorCategory::kSchema, "duplicate embedding id '" + id + "'");
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  data_.insert(data_.end(), v.begin(), v.end());
}

void EmbeddingMatrix::Add(std::string id, std::span<const double> v) {
  const double n = Norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCategory::kSchema, "embedding '" + id + "' has zero or non-finite norm");
  }
  Vector unit(v.begin(), v.end());
  for (double& x : unit) x /= n;
  AddRaw(std::move(id), unit);
}

std::optional<std::size_t> EmbeddingMatrix::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

void PutU32(std::ostream& out, std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  out.write(reinterpret_cast<const char*>(&v), 4);
}

void PutF32(std::ostream& out, float f) { PutU32(out, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t GetU32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) {
    throw Error(ErrorCategory::kSchema, "embedding file truncated");
  }
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  return v;
}

}  // namespace

void EmbeddingMatrix::Write(std::ostream& out) const {
  out.write(kMagic, 4);
  PutU32(out, static_cast<std::uint32_t>(size()));
  PutU32(out, static_cast<std::uint32_t>(dim_));
  for (std::size_t r = 0; r < size(); ++r) {
    PutU32(out, static_cast<std::uint32_t>(ids_[r].size()));
    out.write(ids_[r].data(), static_cast<std::streamsize>(ids_[r].size()));
    for (double x : Row(r)) PutF32(out, static_cast<float>(x));
  }
}

EmbeddingMatrix EmbeddingMatrix::Read(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCategory::kSchema, "not an EMB1 embedding file");
  }
  const std::uint32_t count = GetU32(in);
  const std::uint32_t dim = GetU32(in);
  if (dim == 0) throw Error(ErrorCategory::kSchema, "embedding file has dim 0");
  EmbeddingMatrix m(dim);
  m.ids_.reserve(count);
  m.data_.reserve(static_cast<std::size_t>(count) * dim);
  Vector row(dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    const std::uint32_t len = GetU32(in);
    std::string id(len, '\0');
    if (!in.read(id.data(), len)) throw Error(ErrorCategory::kSchema, "embedding file truncated");
    for (std::uint32_t d = 0; d < dim; ++d) row[d] = std::bit_cast<float>(GetU32(in));
    const double n = Norm(row);
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error(ErrorCategory::kSchema, "embedding '" + id + "' has zero or non-finite norm");
    }
    if (std::abs(n - 1.0) > 1e-4) {
      for (double& x : row) x /= n;
    }
    m.AddRaw(std::move(id), row);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCategory::kSchema, "trailing bytes after embedding rows");
  }
  return m;
}

void EmbeddingMatrix::Save(const std::filesystem::path& path) const {
  auto out = detail::OpenOutput(path, true);
  Write(out);
  if (!out) throw Error(ErrorCategory::kIo, "write failed: " + path.string());
}

EmbeddingMatrix EmbeddingMatrix::Load(const std::filesystem::path& path) {
  auto in = detail::OpenInput(path, true);
  return Read(in);
}

// --- Builtin provider ------------------------------------------------------

std::vector<std::string> Bigrams(std::string_view text) {
  std::vector<std::string> chars{"^"};
  for (auto& c : utf8::Chars(text)) {
    std::size_t pos = 0;
    if (!utf8::IsWhitespace(utf8::Decode(c, pos))) chars.push_back(std::move(c));
  }
  chars.emplace_back("$");
  std::vector<std::string> out;
  if (chars.size() <= 2) return out;
  for (std::size_t i = 0; i + 1 < chars.size(); ++i) out.push_back(chars[i] + chars[i + 1]);
  return out;
}

BuiltinEmbedder::BuiltinEmbedder(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {
  if (dim == 0) throw Error(ErrorCategory::kConfig, "embedding dim must be positive");
}

BuiltinEmbedder BuiltinEmbedder::FitTexts(std::span<const std::string> documents, std::uint64_t seed,
                                          std::size_t dim) {
  BuiltinEmbedder e(seed, dim);
  for (const auto& doc : documents) {
    auto grams = Bigrams(doc);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++e.df_[std::move(g)];
    ++e.documents_;
  }
  return e;
}

BuiltinEmbedder BuiltinEmbedder::Fit(std::span<const LyricsParagraph> corpus, std::uint64_t seed, std::size_t dim) {
  std::vector<std::string> docs;
  for (const auto& p : corpus) {
    for (const auto& s : p.sentences) docs.push_back(s.text);
  }
  return FitTexts(docs, seed, dim);
}

double BuiltinEmbedder::Idf(std::string_view bigram) const {
  auto it = df_.find(bigram);
  const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(documents_)) / (1.0 + df)) + 1.0;
}

std::map<std::string, double> BuiltinEmbedder::Weights(std::string_view text) const {
  std::map<std::string, double> tf;
  for (auto& g : Bigrams(text)) tf[std::move(g)] += 1.0;
  for (auto& [g, w] : tf) w *= Idf(g);
  return tf;
}

Vector BuiltinEmbedder::Embed(std::string_view text) const {
  const auto weights = Weights(text);
  if (weights.empty()) {
    throw Error(ErrorCategory::kSchema, "cannot embed empty text");
  }
  Vector v(dim_, 0.0);
  for (const auto& [gram, w] : weights) {
    const std::uint64_t base = Fnv1a(gram);
    for (std::size_t block = 0; block * 64 < dim_; ++block) {
      const std::uint64_t bits = SplitMix64(base ^ SplitMix64(seed_ + block));
      const std::size_t end = std::min(dim_, (block + 1) * 64);
      for (std::size_t d = block * 64; d < end; ++d) {
        v[d] += ((bits >> (d - block * 64)) & 1U) ? w : -w;
      }
    }
  }
  const double n = Norm(v);
  for (double& x : v) x /= n;
  return v;
}

std::string BuiltinEmbedder::ToJson() const {
  json df = json::object();
  for (const auto& [g, c] : df_) df[g] = c;
  json root = {{"format", "cilyric-builtin-embedder"}, {"version", 1}, {"seed", seed_},
               {"dim", dim_}, {"documents", documents_}, {"df", std::move(df)}};
  return root.dump();
}

BuiltinEmbedder BuiltinEmbedder::FromJson(std::string_view json_text) {
  try {
    const json root = json::parse(json_text);
    if (root.at("format") != "cilyric-builtin-embedder" || root.at("version") != 1) {
      throw Error(ErrorCategory::kSchema, "unsupported embedder model");
    }
    BuiltinEmbedder e(root.at("seed").get<std::uint64_t>(), root.at("dim").get<std::size_t>());
    e.documents_ = root.at("documents").get<std::size_t>();
    for (const auto& [g, c] : root.at("df").items()) e.df_.emplace(g, c.get<std::uint32_t>());
    return e;
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::kSchema, std::string("embedder model: ") + e.what());
  }
}

void BuiltinEmbedder::Save(const std::filesystem::path& path) const {
  auto out = detail::OpenOutput(path);
  out << ToJson() << '\n';
}

BuiltinEmbedder BuiltinEmbedder::Load(const std::filesystem::path& path) { return FromJson(detail::ReadAll(path)); }

// --- File provider ---------------------------------------------------------

Vector FileEmbeddingProvider::Lookup(const std::string& key, std::string_view what) const {
  auto row = matrix_.Find(key);
  if (!row) {
    throw Error(ErrorCategory::kNotFound, "embedding file has no vector for " + std::string(what));
  }
  auto r = matrix_.Row(*row);
  return Vector(r.begin(), r.end());
}

Vector FileEmbeddingProvider::EmbedSentence(std::string_view key, std::string_view text) const {
  return Lookup(std::string(key), "sentence " + std::string(key) + " ('" + std::string(text) + "')");
}

Vector FileEmbeddingProvider::EmbedTopic(std::string_view topic) const {
  return Lookup("topic:" + std::string(topic), "topic '" + std::string(topic) + "'");
}

// --- Ranking ---------------------------------------------------------------

EmbeddingMatrix EmbedSentences(std::span<const LyricsParagraph> corpus, const EmbeddingProvider& provider) {
  EmbeddingMatrix m(provider.dim());
  for (const auto& p : corpus) {
    for (std::size_t i = 0; i < p.sentences.size(); ++i) {
      const std::string key = SentenceKey(p.id, i);
      m.Add(key, provider.EmbedSentence(key, p.sentences[i].text));
    }
  }
  return m;
}

SimilarityRanking RankBySimilarity(std::span<const double> topic, std::span<const PhraseRecord> phrases,
                                   const EmbeddingMatrix& matrix) {
  if (topic.size() != matrix.dim()) throw Error(ErrorCategory::kSchema, "topic vector dimension mismatch");
  // Phrases of one sentence share a row, so cache the score per row.
  std::unordered_map<std::string, double> by_sentence;
  SimilarityRanking ranking;
  ranking.reserve(phrases.size());
  for (const auto& p : phrases) {
    std::string key = SentenceKey(p.source_paragraph, p.sentence_index);
    auto it = by_sentence.find(key);
    if (it == by_sentence.end()) {
      auto row = matrix.Find(key);
      if (!row) throw Error(ErrorCategory::kIntegrity, "no embedding for sentence " + key);
      it = by_sentence.emplace(std::move(key), Dot(topic, matrix.Row(*row))).first;
    }
    ranking.push_back({p.id, it->second});
  }
  std::sort(ranking.begin(), ranking.end(), [](const ScoredPhrase& a, const ScoredPhrase& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return ranking;
}

std::vector<ScoredRow> RankRows(std::span<const double> topic, const EmbeddingMatrix& matrix) {
  if (topic.size() != matrix.dim()) throw Error(ErrorCategory::kSchema, "topic vector dimension mismatch");
  std::vector<ScoredRow> rows(matrix.size());
  for (std::size_t r = 0; r < matrix.size(); ++r) rows[r] = {r, Dot(topic, matrix.Row(r))};
  std::sort(rows.begin(), rows.end(), [](const ScoredRow& a, const ScoredRow& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.row < b.row;
  });
  return rows;
}

}  // namespace cilyric
