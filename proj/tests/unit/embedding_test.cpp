#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cilyric/embedding.h"
#include "cilyric/error.h"
#include "cilyric/rng.h"
#include "oracles.h"
#include "test_support.h"

namespace cilyric {
namespace {

const std::vector<std::string> kDocs{"明月清风", "明月照人", "落花流水"};

TEST(Bigrams, IncludeBoundaryMarkers) {
  EXPECT_EQ(Bigrams("明月"), (std::vector<std::string>{"^明", "明月", "月$"}));
  EXPECT_EQ(Bigrams("春"), (std::vector<std::string>{"^春", "春$"}));
  EXPECT_TRUE(Bigrams("").empty());
  EXPECT_TRUE(Bigrams(" 　").empty());
}

TEST(BuiltinEmbedder, TfIdfWeightsMatchHandValues) {
  const auto e = BuiltinEmbedder::FitTexts(kDocs, 1, 64);
  // 3 documents; "^明" and "明月" occur in two of them, everything else in one.
  const double shared = std::log(4.0 / 3.0) + 1.0;
  const double unique = std::log(4.0 / 2.0) + 1.0;
  const double unseen = std::log(4.0 / 1.0) + 1.0;
  const auto w = e.Weights("明月清风");
  ASSERT_EQ(w.size(), 5u);
  EXPECT_DOUBLE_EQ(w.at("^明"), shared);
  EXPECT_DOUBLE_EQ(w.at("明月"), shared);
  EXPECT_DOUBLE_EQ(w.at("月清"), unique);
  EXPECT_DOUBLE_EQ(w.at("风$"), unique);
  EXPECT_DOUBLE_EQ(e.Idf("不在"), unseen);
  // Term frequency counts repeats.
  EXPECT_DOUBLE_EQ(e.Weights("明月明月").at("明月"), 2.0 * shared);
}

TEST(BuiltinEmbedder, SharedBigramsAreCloser) {
  const auto e = BuiltinEmbedder::FitTexts(kDocs, 3, 256);
  const auto a = e.Embed(kDocs[0]);
  const auto b = e.Embed(kDocs[1]);
  const auto c = e.Embed(kDocs[2]);
  EXPECT_GT(Cosine(a, b), Cosine(a, c));
  EXPECT_NEAR(Cosine(a, a), 1.0, 1e-12);
  EXPECT_NEAR(Norm(a), 1.0, 1e-12);
}

TEST(BuiltinEmbedder, DeterministicAndSeeded) {
  const auto e1 = BuiltinEmbedder::FitTexts(kDocs, 3);
  const auto e2 = BuiltinEmbedder::FitTexts(kDocs, 3);
  const auto e3 = BuiltinEmbedder::FitTexts(kDocs, 4);
  EXPECT_EQ(e1.Embed("明月清风"), e2.Embed("明月清风"));
  EXPECT_NE(e1.Embed("明月清风"), e3.Embed("明月清风"));
  EXPECT_EQ(e1.Embed("明月清风").size(), kDefaultEmbeddingDim);
  EXPECT_EQ(BuiltinEmbedder::FromJson(e1.ToJson()).Embed("明月照人"), e1.Embed("明月照人"));
}

TEST(BuiltinEmbedder, EmptyTextIsAnError) {
  const auto e = BuiltinEmbedder::FitTexts(kDocs, 3);
  EXPECT_THROW(e.Embed(""), Error);
}

TEST(EmbedSentences, OneRowPerSentence) {
  const auto corpus = LoadCorpus(testing::DataDir() / "toy/corpus.jsonl");
  const auto e = BuiltinEmbedder::Fit(corpus, 5, 32);
  const auto m = EmbedSentences(corpus, e);
  std::size_t sentences = 0;
  for (const auto& p : corpus) sentences += p.sentences.size();
  EXPECT_EQ(m.size(), sentences);
  for (std::size_t r = 0; r < m.size(); ++r) EXPECT_NEAR(Norm(m.Row(r)), 1.0, 1e-6);
  EXPECT_EQ(EmbedSentences(corpus, e), m);

  const std::vector<LyricsParagraph> one{{0, "r", "", SplitSentences("明月。")}};
  const auto single = EmbedSentences(one, e);
  EXPECT_EQ(single.size(), 1u);
  EXPECT_NEAR(Norm(single.Row(0)), 1.0, 1e-12);
}

EmbeddingMatrix RandomMatrix(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingMatrix m(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    Vector v(dim);
    for (double& x : v) x = rng.Unit() * 2.0 - 1.0;
    m.Add("row" + std::to_string(r), v);
  }
  return m;
}

std::string Bytes(const EmbeddingMatrix& m) {
  std::ostringstream out;
  m.Write(out);
  return out.str();
}

TEST(EmbeddingMatrix, FileRoundTripIsBitExact) {
  const auto m = RandomMatrix(20, 16, 9);
  testing::TempDir dir;
  m.Save(dir / "a.emb");
  const auto loaded = EmbeddingMatrix::Load(dir / "a.emb");
  loaded.Save(dir / "b.emb");
  std::ifstream a(dir / "a.emb", std::ios::binary), b(dir / "b.emb", std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
  EXPECT_EQ(EmbeddingMatrix::Load(dir / "b.emb"), loaded);
  ASSERT_EQ(loaded.ids(), m.ids());
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t d = 0; d < m.dim(); ++d) EXPECT_EQ(loaded.Row(r)[d], static_cast<double>(static_cast<float>(m.Row(r)[d])));
  }
}

TEST(EmbeddingMatrix, HeaderLayout) {
  EmbeddingMatrix m(2);
  m.Add("ab", std::vector<double>{3.0, 4.0});
  const std::string bytes = Bytes(m);
  ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 4 + 2 + 2 * 4);
  EXPECT_EQ(bytes.substr(0, 4), "EMB1");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 2);
  EXPECT_EQ(bytes[12], 2);
  EXPECT_EQ(bytes.substr(16, 2), "ab");
  float x;
  std::memcpy(&x, bytes.data() + 18, 4);
  EXPECT_FLOAT_EQ(x, 0.6f);
}

TEST(EmbeddingMatrix, LoadRenormalizesOffNormRows) {
  std::string bytes = "EMB1";
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes += static_cast<char>((v >> (8 * i)) & 0xFF);
  };
  auto f32 = [&](float f) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    u32(v);
  };
  u32(1);
  u32(2);
  u32(1);
  bytes += "x";
  f32(3.0f);
  f32(4.0f);
  std::istringstream in(bytes);
  const auto m = EmbeddingMatrix::Read(in);
  EXPECT_NEAR(m.Row(0)[0], 0.6, 1e-7);
  EXPECT_NEAR(Norm(m.Row(0)), 1.0, 1e-12);
}

TEST(EmbeddingMatrix, RejectsCorruptFiles) {
  const std::string good = Bytes(RandomMatrix(2, 4, 1));
  std::istringstream magic("EMB2" + good.substr(4));
  EXPECT_THROW(EmbeddingMatrix::Read(magic), Error);
  std::istringstream truncated(good.substr(0, good.size() - 3));
  EXPECT_THROW(EmbeddingMatrix::Read(truncated), Error);
  std::istringstream trailing(good + "z");
  EXPECT_THROW(EmbeddingMatrix::Read(trailing), Error);
  EmbeddingMatrix m(2);
  EXPECT_THROW(m.Add("z", std::vector<double>{0.0, 0.0}), Error);
  m.Add("a", std::vector<double>{1.0, 0.0});
  EXPECT_THROW(m.Add("a", std::vector<double>{1.0, 0.0}), Error);
  EXPECT_THROW(m.Add("b", std::vector<double>{1.0}), Error);
}

TEST(FileEmbeddingProvider, NamesMissingSentence) {
  EmbeddingMatrix m(2);
  m.Add(SentenceKey(0, 0), std::vector<double>{1.0, 0.0});
  m.Add("topic:春", std::vector<double>{0.0, 1.0});
  FileEmbeddingProvider provider(m);
  EXPECT_EQ(provider.EmbedTopic("春"), (Vector{0.0, 1.0}));
  const std::vector<LyricsParagraph> corpus{{0, "r", "", SplitSentences("明月，清风。")}};
  try {
    EmbedSentences(corpus, provider);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(SentenceKey(0, 1)), std::string::npos) << e.what();
  }
}

std::vector<PhraseRecord> PhrasesOver(std::size_t sentences, std::size_t per_sentence) {
  std::vector<PhraseRecord> out;
  for (std::size_t s = 0; s < sentences; ++s) {
    for (std::size_t j = 0; j < per_sentence; ++j) {
      PhraseRecord p = testing::MakePhrase(static_cast<PhraseId>(out.size()), "x");
      p.source_paragraph = static_cast<ParagraphId>(s);
      out.push_back(p);
    }
  }
  return out;
}

EmbeddingMatrix SentenceMatrix(std::size_t sentences, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingMatrix m(dim);
  for (std::size_t s = 0; s < sentences; ++s) {
    Vector v(dim);
    for (double& x : v) x = rng.Unit() - 0.5;
    m.Add(SentenceKey(static_cast<ParagraphId>(s), 0), v);
  }
  return m;
}

TEST(RankBySimilarity, MatchesBruteForceSort) {
  const auto phrases = PhrasesOver(40, 3);
  const auto m = SentenceMatrix(40, 8, 2);
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Vector topic(8);
    for (double& x : topic) x = rng.Unit() - 0.5;
    const double n = Norm(topic);
    for (double& x : topic) x /= n;
    const auto got = RankBySimilarity(topic, phrases, m);
    const auto want = oracle::BruteForceRanking(topic, phrases, m);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].id, want[i].id) << i;
      EXPECT_NEAR(got[i].score, want[i].score, 1e-12);
    }
  }
}

TEST(RankBySimilarity, OwnSentenceRanksFirst) {
  const auto phrases = PhrasesOver(10, 2);
  const auto m = SentenceMatrix(10, 6, 4);
  const auto row = m.Row(*m.Find(SentenceKey(7, 0)));
  const auto ranking = RankBySimilarity(Vector(row.begin(), row.end()), phrases, m);
  EXPECT_EQ(ranking[0].id, 14u);
  EXPECT_EQ(ranking[1].id, 15u);
  EXPECT_NEAR(ranking[0].score, 1.0, 1e-12);
  EXPECT_EQ(ranking[0].score, ranking[1].score);
}

TEST(RankBySimilarity, OrthogonalTiesFallBackToIdOrder) {
  EmbeddingMatrix m(3);
  m.Add(SentenceKey(0, 0), std::vector<double>{1, 0, 0});
  m.Add(SentenceKey(1, 0), std::vector<double>{0, 1, 0});
  std::vector<PhraseRecord> phrases = PhrasesOver(2, 2);
  std::swap(phrases[0], phrases[3]);
  const auto ranking = RankBySimilarity(std::vector<double>{0, 0, 1}, phrases, m);
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    EXPECT_EQ(ranking[i].id, i);
    EXPECT_EQ(ranking[i].score, 0.0);
  }
}

TEST(RankBySimilarity, MissingSentenceIsIntegrityError) {
  const auto phrases = PhrasesOver(3, 1);
  const auto m = SentenceMatrix(2, 4, 1);
  EXPECT_THROW(RankBySimilarity(std::vector<double>(4, 0.5), phrases, m), Error);
}

TEST(RankRows, DescendingWithRowTieBreak) {
  EmbeddingMatrix m(2);
  m.Add("a", std::vector<double>{1, 0});
  m.Add("b", std::vector<double>{0, 1});
  m.Add("c", std::vector<double>{1, 0});
  const auto r = RankRows(std::vector<double>{1, 0}, m);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].row, 0u);
  EXPECT_EQ(r[1].row, 2u);
  EXPECT_EQ(r[2].row, 1u);
}

}  // namespace
}  // namespace cilyric
