#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <functional>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cilyric/error.h"
#include "config.h"
#include "fake_scorer.h"
#include "test_support.h"

namespace cilyric {
namespace {

using cli::Config;

void ParseText(Config& c, const std::string& text) {
  std::istringstream in(text);
  c.Parse(in, "test.conf");
}

ErrorCategory CategoryOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.category();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCategory::kIo;
}

TEST(Config, DefaultsCoverEveryKey) {
  Config c;
  for (const auto& key : cli::ConfigKeys()) EXPECT_EQ(c.Get(key.name), key.default_value) << key.name;
  EXPECT_EQ(c.Sampling().Capacity(), 300u);
  EXPECT_EQ(c.BeamWidth(), 16u);
  EXPECT_NO_THROW(c.Validate());
}

TEST(Config, Grammar) {
  Config c;
  ParseText(c,
            "# comment line\n"
            "\n"
            "  beta = 2.5   # trailing comment\n"
            "topic = \"明月 # not a comment\"\n"
            "rhythmic=\"say \\\"hi\\\" \\\\ there\"\n"
            "corpus = my#file.jsonl\n"
            "beam = inf\n");
  EXPECT_EQ(c.Real("beta"), 2.5);
  EXPECT_EQ(c.Get("topic"), "明月 # not a comment");
  EXPECT_EQ(c.Get("rhythmic"), "say \"hi\" \\ there");
  EXPECT_EQ(c.Get("corpus"), "my#file.jsonl");
  EXPECT_EQ(c.BeamWidth(), kUnboundedBeam);
}

TEST(Config, GrammarErrorsNameTheLine) {
  for (const char* bad : {"nokey\n", "unknown_key = 1\n", "beta = 1\nbeta = 2\n", "topic = \"unterminated\n",
                          "topic = \"x\" trailing\n", " = 3\n"}) {
    Config c;
    try {
      ParseText(c, bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.category(), ErrorCategory::kConfig) << bad;
      EXPECT_NE(std::string(e.what()).find("test.conf:"), std::string::npos) << e.what();
    }
  }
}

TEST(Config, TypedAccessorsValidate) {
  Config c;
  c.Set("M", "0");
  EXPECT_EQ(CategoryOf([&] { c.Validate(); }), ErrorCategory::kConfig);
  c.Set("M", "3");
  c.Set("alpha", "-1");
  EXPECT_EQ(CategoryOf([&] { c.Validate(); }), ErrorCategory::kConfig);
  c.Set("alpha", "abc");
  EXPECT_EQ(CategoryOf([&] { c.Real("alpha"); }), ErrorCategory::kConfig);
  c.Set("alpha", "1");
  c.Set("beam", "0");
  EXPECT_EQ(CategoryOf([&] { c.BeamWidth(); }), ErrorCategory::kConfig);
  EXPECT_EQ(CategoryOf([&] { c.Set("nope", "1"); }), ErrorCategory::kConfig);
  EXPECT_EQ(CategoryOf([&] { c.LoadFile("/nonexistent/cilyric.conf"); }), ErrorCategory::kMissingArtifact);
}

// --- The command-line binary ---------------------------------------------------

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string ShellQuote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

CliResult RunCli(const testing::TempDir& dir, const std::vector<std::string>& args) {
  std::string cmd = "cd " + ShellQuote(dir.path().string()) + " && " + ShellQuote(CILYRIC_CLI_PATH);
  for (const auto& a : args) cmd += " " + ShellQuote(a);
  cmd += " > out.txt 2> err.txt";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = Slurp(dir / "out.txt");
  r.err = Slurp(dir / "err.txt");
  return r;
}

/// Config pointing at the bundled data, artifacts under the temp dir.
void WriteConfig(const testing::TempDir& dir) {
  const auto data = testing::DataDir();
  testing::WriteFile(dir / "cilyric.conf", "corpus = \"" + (data / "toy/corpus.jsonl").string() + "\"\n" +
                                               "trees = \"" + (data / "toy/trees.jsonl").string() + "\"\n" +
                                               "rhymes = \"" + (data / "rhyme/default.tsv").string() + "\"\n" +
                                               "prompts = \"" + (data / "toy/prompts.jsonl").string() + "\"\n" +
                                               "embedding_dim = 64\nlog_level = warn\n");
}

class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir;
    WriteConfig(*dir_);
    for (const char* step : {"curate", "embed", "npp-dataset", "train-scorer"}) {
      const auto r = RunCli(*dir_, {step, "--config", "cilyric.conf"});
      ASSERT_EQ(r.code, 0) << step << ": " << r.err;
    }
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static testing::TempDir* dir_;
};

testing::TempDir* CliPipeline::dir_ = nullptr;

TEST_F(CliPipeline, ArtifactsExist) {
  for (const char* f : {"phrases.jsonl", "structures.json", "embedder.json", "sentences.emb", "npp.jsonl", "scorer.json"})
    EXPECT_TRUE(std::filesystem::exists(dir_->path() / "artifacts" / f)) << f;
}

TEST_F(CliPipeline, GenerateJsonIsCompleteAndSeedDeterministic) {
  const std::vector<std::string> args{"generate", "--config", "cilyric.conf", "--topic", "明月照孤舟",
                                      "--rhythmic", "如梦令", "--M", "5", "--L", "60", "--N", "10", "--seed", "4", "--json"};
  const auto a = RunCli(*dir_, args);
  ASSERT_EQ(a.code, 0) << a.err;
  const auto piece = nlohmann::json::parse(a.out);
  EXPECT_EQ(piece.at("method"), "phrase-connector");
  EXPECT_TRUE(piece.at("complete").get<bool>());
  EXPECT_FALSE(piece.at("text").get<std::string>().empty());
  EXPECT_EQ(piece.at("seed"), 4);
  EXPECT_EQ(RunCli(*dir_, args).out, a.out);
}

TEST_F(CliPipeline, FlagsOverrideTheConfigFile) {
  testing::WriteFile(dir_->path() / "override.conf",
                     Slurp(dir_->path() / "cilyric.conf") + "topic = 春雨\nrhythmic = 不存在\n");
  const auto from_file = RunCli(*dir_, {"generate", "--config", "override.conf", "--json"});
  EXPECT_EQ(from_file.code, 6) << from_file.err;  // not-found
  EXPECT_NE(from_file.err.find("error[not-found]"), std::string::npos) << from_file.err;
  const auto flagged = RunCli(*dir_, {"generate", "--config", "override.conf", "--json", "--rhythmic", "浣溪沙"});
  ASSERT_EQ(flagged.code, 0) << flagged.err;
  EXPECT_EQ(nlohmann::json::parse(flagged.out).at("rhythmic"), "浣溪沙");
}

TEST_F(CliPipeline, HumanReadableGenerateAndBaseline) {
  for (const char* cmd : {"generate", "baseline"}) {
    const auto r = RunCli(*dir_, {cmd, "--config", "cilyric.conf", "--topic", "离愁", "--rhythmic", "卜算子"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("total"), std::string::npos) << r.out;
  }
}

TEST_F(CliPipeline, RetrievePrintsRankedPool) {
  const auto r = RunCli(*dir_, {"retrieve", "--config", "cilyric.conf", "--topic", "明月", "--M", "2", "--L", "5",
                             "--N", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("rank"));
    EXPECT_TRUE(j.contains("score"));
    ++n;
  }
  EXPECT_EQ(n, 6);
}

TEST_F(CliPipeline, EvalWritesCsv) {
  const auto r = RunCli(*dir_, {"eval", "--config", "cilyric.conf", "--M", "5", "--L", "60", "--N", "10",
                             "--out", "report.csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream csv(Slurp(dir_->path() / "report.csv"));
  std::string line;
  int rows = 0;
  std::string last;
  while (std::getline(csv, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 1 + 10 + 1);
  EXPECT_EQ(last.rfind("mean,", 0), 0u) << last;
}

TEST_F(CliPipeline, GenerateAgainstAnExternalScorer) {
  testing::FakeScorer server([](const nlohmann::json& req) {
    // Favour the true paragraph order only weakly: any valid distribution will do.
    const double direct = req["candidate"].get<std::string>().size() % 2 ? 0.4 : 0.3;
    return nlohmann::json{{"id", req["id"]}, {"probs", {direct, 0.3, 0.2, 0.5 - direct}}}.dump() + "\n";
  });
  const auto r = RunCli(*dir_, {"generate", "--config", "cilyric.conf", "--topic", "明月", "--rhythmic", "如梦令",
                                "--M", "5", "--L", "60", "--N", "10", "--beam", "4", "--json", "--scorer",
                                "external:127.0.0.1:" + std::to_string(server.port())});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(nlohmann::json::parse(r.out).at("complete").get<bool>());
  EXPECT_GT(server.requests.size(), 0u);

  const auto down = RunCli(*dir_, {"generate", "--config", "cilyric.conf", "--topic", "明月", "--rhythmic",
                                   "如梦令", "--scorer", "external:127.0.0.1:1", "--scorer_timeout_ms", "200"});
  EXPECT_EQ(down.code, 9) << down.err;  // scorer error
}

TEST(Cli, MissingArtifactExitsWithCode2) {
  testing::TempDir dir;
  WriteConfig(dir);
  const auto r = RunCli(dir, {"generate", "--config", "cilyric.conf", "--topic", "明月", "--rhythmic", "如梦令"});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(r.err.find("error[missing-artifact]"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, ConfigErrorsExitWithCode3) {
  testing::TempDir dir;
  testing::WriteFile(dir / "bad.conf", "bogus = 1\n");
  EXPECT_EQ(RunCli(dir, {"curate", "--config", "bad.conf"}).code, 3);
  EXPECT_EQ(RunCli(dir, {"curate", "--alpha", "-2"}).code, 3);
  EXPECT_NE(RunCli(dir, {"no-such-command"}).code, 0);
}

}  // namespace
}  // namespace cilyric
