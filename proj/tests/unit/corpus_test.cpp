#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <sstream>

#include "cilyric/corpus.h"
#include "cilyric/error.h"
#include "cilyric/utf8.h"
#include "test_support.h"

namespace cilyric {
namespace {

using testing::TempDir;

ErrorCategory CategoryOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCategory::kIo;
}

TEST(Utf8, CountsScalarValues) {
  EXPECT_EQ(utf8::Length("明月几时有"), 5u);
  EXPECT_EQ(utf8::Length("ab明"), 3u);
  EXPECT_EQ(utf8::Prefix("明月几时有", 2), "明月");
  EXPECT_EQ(utf8::Suffix("明月几时有", 2), "时有");
  EXPECT_EQ(utf8::Suffix("明", 5), "明");
  EXPECT_EQ(utf8::Chars("春a").size(), 2u);
}

TEST(SplitSentences, FoldsPunctuation) {
  const auto s = SplitSentences("明月、几时有；把酒：问青天？不知！天上宫阙。");
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(s[0].terminal, Punct::kComma);
  EXPECT_EQ(s[1].terminal, Punct::kComma);
  EXPECT_EQ(s[2].terminal, Punct::kComma);
  EXPECT_EQ(s[3].terminal, Punct::kPeriod);
  EXPECT_EQ(s[4].terminal, Punct::kPeriod);
  EXPECT_EQ(s[5].text, "天上宫阙");
}

TEST(SplitSentences, StripsWhitespace) {
  const auto s = SplitSentences(" 明 月，　几时有。\n");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].text, "明月");
  EXPECT_EQ(s[1].text, "几时有");
}

TEST(SplitSentences, RejectsMalformedText) {
  EXPECT_EQ(CategoryOf([] { SplitSentences("明月，几时有，"); }), ErrorCategory::kSchema);
  EXPECT_EQ(CategoryOf([] { SplitSentences("明月，，几时有。"); }), ErrorCategory::kSchema);
  EXPECT_EQ(CategoryOf([] { SplitSentences("明月。几时有"); }), ErrorCategory::kSchema);
  EXPECT_EQ(CategoryOf([] { SplitSentences(""); }), ErrorCategory::kSchema);
}

TEST(ParseCorpus, ReadsWellFormedLines) {
  std::istringstream in(
      R"({"id": 7, "rhythmic": "如梦令", "author": "李清照", "paragraphs": ["常记溪亭日暮，沉醉不知归路。"]}
{"rhythmic": "如梦令", "author": "", "paragraphs": ["兴尽晚回舟，误入藕花深处。"]}

{"id": 9, "rhythmic": "卜算子", "author": "x", "paragraphs": ["缺月挂疏桐，", "漏断人初静。"]}
)");
  const auto corpus = ParseCorpus(in);
  ASSERT_EQ(corpus.size(), 3u);
  EXPECT_EQ(corpus[0].id, 7u);
  EXPECT_EQ(corpus[1].id, 1u);  // falls back to the line index
  EXPECT_EQ(corpus[2].sentences.size(), 2u);
  EXPECT_EQ(corpus[0].Text(), "常记溪亭日暮，沉醉不知归路。");
}

TEST(ParseCorpus, ReportsEveryBadLine) {
  std::istringstream in(
      R"({"rhythmic": "a", "author": "", "paragraphs": ["明月，几时有，"]}
{"rhythmic": "a", "author": "", "paragraphs": ["明月。"]}
not json
)");
  try {
    ParseCorpus(in, "c.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kSchema);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("c.jsonl:1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("c.jsonl:3"), std::string::npos) << msg;
    EXPECT_EQ(msg.find("c.jsonl:2"), std::string::npos) << msg;
  }
}

TEST(ParseCorpus, RejectsEmptyAndDuplicateIds) {
  std::istringstream empty("\n\n");
  EXPECT_EQ(CategoryOf([&] { ParseCorpus(empty); }), ErrorCategory::kSchema);
  std::istringstream dup(
      R"({"id": 1, "rhythmic": "a", "author": "", "paragraphs": ["明月。"]}
{"id": 1, "rhythmic": "a", "author": "", "paragraphs": ["清风。"]}
)");
  EXPECT_EQ(CategoryOf([&] { ParseCorpus(dup); }), ErrorCategory::kSchema);
}

TEST(Corpus, SaveLoadRoundTrip) {
  const auto corpus = LoadCorpus(testing::DataDir() / "toy/corpus.jsonl");
  TempDir dir;
  SaveCorpus(corpus, dir / "c.jsonl");
  EXPECT_EQ(LoadCorpus(dir / "c.jsonl"), corpus);
}

TEST(Corpus, MissingFileIsMissingArtifact) {
  EXPECT_EQ(CategoryOf([] { LoadCorpus("/nonexistent/corpus.jsonl"); }), ErrorCategory::kMissingArtifact);
}

TEST(HalfOf, UsesCeilingBoundary) {
  EXPECT_EQ(HalfOf(0, 1), Half::kUpper);
  EXPECT_EQ(HalfOf(2, 5), Half::kUpper);
  EXPECT_EQ(HalfOf(3, 5), Half::kLower);
  EXPECT_EQ(HalfOf(1, 4), Half::kUpper);
  EXPECT_EQ(HalfOf(2, 4), Half::kLower);
}

LyricsParagraph Para(ParagraphId id, std::string rhythmic, std::string_view text) {
  return {id, std::move(rhythmic), "", SplitSentences(text)};
}

TEST(StructureTable, SingleParagraphGivesItsShape) {
  const std::vector<LyricsParagraph> corpus{Para(0, "r", "明月几，时有。")};
  const auto t = StructureTable::Derive(corpus);
  const SongStructure& s = t.Lookup("r");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.entries[0], (StructureEntry{3, Punct::kComma}));
  EXPECT_EQ(s.entries[1], (StructureEntry{2, Punct::kPeriod}));
}

TEST(StructureTable, PicksModalShape) {
  const std::vector<LyricsParagraph> corpus{Para(0, "r", "甲乙，丙丁。"), Para(1, "r", "甲乙丙，丁。"),
                                            Para(2, "r", "戊己，庚辛。"), Para(3, "r", "壬癸，子丑。")};
  const auto table = StructureTable::Derive(corpus);
  const auto& s = table.Lookup("r");
  EXPECT_EQ(s.entries[0].length, 2u);
  EXPECT_EQ(s.entries[1].length, 2u);
}

TEST(StructureTable, TieGoesToSmallerLengthSequence) {
  const std::vector<LyricsParagraph> corpus{Para(0, "r", "甲乙丙，丁。"), Para(1, "r", "甲乙，丙丁。"),
                                            Para(2, "r", "甲乙丙，丁。"), Para(3, "r", "甲乙，丙丁。")};
  const auto table = StructureTable::Derive(corpus);
  const auto& s = table.Lookup("r");
  EXPECT_EQ(s.entries[0].length, 2u);
}

TEST(StructureTable, DerivedShapeMatchesBruteForceCount) {
  const auto corpus = LoadCorpus(testing::DataDir() / "toy/corpus.jsonl");
  const auto table = StructureTable::Derive(corpus);
  std::map<std::string, std::map<std::vector<StructureEntry>, int>> counts;
  for (const auto& p : corpus) ++counts[p.rhythmic][ShapeOf(p)];
  for (const auto& [rhythmic, shapes] : counts) {
    int best = 0;
    for (const auto& [shape, n] : shapes) best = std::max(best, n);
    const auto& derived = table.Lookup(rhythmic).entries;
    ASSERT_TRUE(shapes.count(derived));
    EXPECT_EQ(shapes.at(derived), best) << rhythmic;
    EXPECT_NO_THROW(table.Lookup(rhythmic).Validate());
  }
}

TEST(StructureTable, LookupSuggestsNearMatches) {
  StructureTable t;
  t.Insert({"如梦令", {{6, Punct::kComma}, {6, Punct::kPeriod}}});
  t.Insert({"卜算子", {{5, Punct::kPeriod}}});
  try {
    t.Lookup("如梦");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kNotFound);
    EXPECT_NE(std::string(e.what()).find("如梦令"), std::string::npos);
  }
}

TEST(StructureTable, JsonRoundTripAndOverride) {
  StructureTable t;
  t.Insert({"a", {{4, Punct::kComma}, {5, Punct::kPeriod}}});
  const auto back = StructureTable::FromJson(t.ToJson());
  EXPECT_EQ(back.Lookup("a"), t.Lookup("a"));
  const auto over = StructureTable::FromJson(R"({"a": [[7, "period"]]})");
  t.OverrideWith(over);
  EXPECT_EQ(t.Lookup("a").entries, (std::vector<StructureEntry>{{7, Punct::kPeriod}}));
}

TEST(SongStructure, ValidateRejectsBadShapes) {
  EXPECT_EQ(CategoryOf([] { SongStructure{"x", {}}.Validate(); }), ErrorCategory::kSchema);
  EXPECT_EQ(CategoryOf([] { SongStructure{"x", {{4, Punct::kComma}}}.Validate(); }), ErrorCategory::kSchema);
  EXPECT_EQ(CategoryOf([] { SongStructure{"x", {{0, Punct::kPeriod}}}.Validate(); }), ErrorCategory::kSchema);
}

TEST(EditDistance, CountsCharacters) {
  EXPECT_EQ(EditDistance("如梦令", "如梦"), 1u);
  EXPECT_EQ(EditDistance("", "abc"), 3u);
  EXPECT_EQ(EditDistance("卜算子", "卜算子"), 0u);
}

}  // namespace
}  // namespace cilyric
