// cilyric: command-line entry point for the lyrics pipeline.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cilyric/baseline.h"
#include "cilyric/connector.h"
#include "cilyric/corpus.h"
#include "cilyric/curation.h"
#include "cilyric/embedding.h"
#include "cilyric/error.h"
#include "cilyric/eval.h"
#include "cilyric/external_scorer.h"
#include "cilyric/fluency.h"
#include "cilyric/retriever.h"
#include "cilyric/rhyme.h"
#include "cilyric/utf8.h"
#include "config.h"

namespace cilyric::cli {
namespace {

using nlohmann::json;

int ExitCode(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kMissingArtifact: return 2;
    case ErrorCategory::kConfig: return 3;
    case ErrorCategory::kSchema: return 4;
    case ErrorCategory::kIo: return 5;
    case ErrorCategory::kNotFound: return 6;
    case ErrorCategory::kIntegrity: return 7;
    case ErrorCategory::kInsufficientData: return 8;
    case ErrorCategory::kScorer: return 9;
    case ErrorCategory::kSearch: return 10;
  }
  return 1;
}

void ReportError(std::string_view category, std::string message) {
  for (char& c : message) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  std::fprintf(stderr, "error[%.*s]: %s\n", static_cast<int>(category.size()), category.data(), message.c_str());
}

void PrintJson(const json& j) { std::cout << j.dump(2) << '\n'; }

// --- Artifact loading ------------------------------------------------------

struct Loaded {
  std::vector<LyricsParagraph> corpus;
  std::vector<PhraseRecord> phrases;
  EmbeddingMatrix matrix;
  std::unique_ptr<EmbeddingProvider> provider;
  StructureTable structures;
  RhymeTable rhymes;

  Workspace View() const { return {corpus, phrases, matrix, *provider, structures, rhymes}; }
};

std::unique_ptr<EmbeddingProvider> LoadProvider(const Config& cfg) {
  if (cfg.Get("provider") == "file") return std::make_unique<FileEmbeddingProvider>(EmbeddingMatrix::Load(cfg.Path("embeddings")));
  return std::make_unique<BuiltinEmbedder>(BuiltinEmbedder::Load(cfg.Path("embedder")));
}

StructureTable LoadStructures(const Config& cfg) {
  StructureTable table = StructureTable::Load(cfg.Path("structures"));
  if (!cfg.Get("structure_overrides").empty()) table.OverrideWith(StructureTable::Load(cfg.Path("structure_overrides")));
  return table;
}

Loaded LoadAll(const Config& cfg, bool need_phrases) {
  Loaded l;
  if (need_phrases) l.phrases = LoadPhrases(cfg.Path("phrases"));
  l.matrix = EmbeddingMatrix::Load(cfg.Path("embeddings"));
  l.provider = LoadProvider(cfg);
  l.structures = LoadStructures(cfg);
  l.rhymes = RhymeTable::Load(cfg.Path("rhymes"));
  l.corpus = LoadCorpus(cfg.Path("corpus"));
  return l;
}

std::unique_ptr<Scorer> MakeScorer(const Config& cfg) {
  const std::string& backend = cfg.Get("scorer");
  if (backend == "builtin") return std::make_unique<NaiveBayesScorer>(NaiveBayesScorer::Load(cfg.Path("scorer_model")));
  const auto timeout = std::chrono::milliseconds(cfg.Count("scorer_timeout_ms"));
  return std::make_unique<ExternalScorer>(ExternalScorer::FromAddress(backend.substr(9), timeout));
}

RunSettings Settings(const Config& cfg) {
  RunSettings s;
  s.sampling = cfg.Sampling();
  s.generate.weights = cfg.Weights();
  s.generate.beam_width = cfg.BeamWidth();
  s.generate.seed = cfg.UInt("seed");
  return s;
}

Prompt PromptFrom(const Config& cfg) {
  Prompt p{cfg.Get("topic"), cfg.Get("rhythmic")};
  if (p.topic.empty()) throw Error(ErrorCategory::kConfig, "--topic is required");
  if (p.rhythmic.empty()) throw Error(ErrorCategory::kConfig, "--rhythmic is required");
  return p;
}

// --- Subcommands -----------------------------------------------------------

int Curate(const Config& cfg, bool as_json) {
  const auto corpus = LoadCorpus(cfg.Path("corpus"));
  const auto trees = LoadTrees(cfg.Path("trees"));
  const auto phrases = cilyric::Curate(corpus, trees);
  SavePhrases(phrases, cfg.Path("phrases"));
  const auto structures = StructureTable::Derive(corpus);
  structures.Save(cfg.Path("structures"));
  const auto stats = Summarize(phrases);
  spdlog::info("curated {} phrases from {} paragraphs; {} structures", stats.phrase_count, corpus.size(),
               structures.size());
  if (as_json) {
    PrintJson({{"paragraphs", corpus.size()},
               {"phrases", stats.phrase_count},
               {"mean_length", stats.mean_length},
               {"over_threshold", stats.over_threshold},
               {"structures", structures.size()},
               {"phrase_db", cfg.Get("phrases")},
               {"structure_table", cfg.Get("structures")}});
  }
  return 0;
}

int Embed(const Config& cfg, bool as_json) {
  if (cfg.Get("provider") != "builtin") {
    throw Error(ErrorCategory::kConfig, "embed fits the built-in provider; with provider=file supply the embeddings file");
  }
  const auto corpus = LoadCorpus(cfg.Path("corpus"));
  const auto embedder = BuiltinEmbedder::Fit(corpus, cfg.UInt("seed"), cfg.Count("embedding_dim"));
  const auto matrix = EmbedSentences(corpus, embedder);
  embedder.Save(cfg.Path("embedder"));
  matrix.Save(cfg.Path("embeddings"));
  spdlog::info("embedded {} sentences at dim {}", matrix.size(), matrix.dim());
  if (as_json) {
    PrintJson({{"sentences", matrix.size()},
               {"dim", matrix.dim()},
               {"embeddings", cfg.Get("embeddings")},
               {"embedder", cfg.Get("embedder")}});
  }
  return 0;
}

int NppDataset(const Config& cfg, bool as_json) {
  const auto phrases = LoadPhrases(cfg.Path("phrases"));
  const auto samples =
      BuildNppDataset(phrases, cfg.Count("npp_samples"), cfg.Real("npp_other_fraction"), cfg.UInt("seed"));
  SaveNppDataset(samples, cfg.Path("npp_dataset"));
  std::array<std::size_t, kClassCount> counts{};
  for (const auto& s : samples) ++counts[Index(s.label)];
  spdlog::info("wrote {} NPP samples", samples.size());
  if (as_json) {
    json per_class = json::object();
    for (auto c : kAllClasses) per_class[std::string(ClassName(c))] = counts[Index(c)];
    PrintJson({{"samples", samples.size()}, {"per_class", per_class}, {"path", cfg.Get("npp_dataset")}});
  }
  return 0;
}

int TrainScorer(const Config& cfg, bool as_json) {
  const auto samples = LoadNppDataset(cfg.Path("npp_dataset"));
  const auto model = NaiveBayesScorer::Train(samples, cfg.Real("smoothing"), cfg.Count("history_window"));
  model.Save(cfg.Path("scorer_model"));
  std::size_t correct = 0;
  for (const auto& s : samples) correct += model.Predict(s.history, s.candidate).Argmax() == s.label ? 1 : 0;
  const double accuracy = samples.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(samples.size());
  spdlog::info("trained scorer on {} samples; training accuracy {:.3f}", samples.size(), accuracy);
  if (as_json) PrintJson({{"samples", samples.size()}, {"train_accuracy", accuracy}, {"path", cfg.Get("scorer_model")}});
  return 0;
}

int Retrieve(const Config& cfg, bool) {
  const std::string topic = cfg.Get("topic");
  if (topic.empty()) throw Error(ErrorCategory::kConfig, "--topic is required");
  const auto phrases = LoadPhrases(cfg.Path("phrases"));
  const auto matrix = EmbeddingMatrix::Load(cfg.Path("embeddings"));
  const auto provider = LoadProvider(cfg);
  Vector t = provider->EmbedTopic(topic);
  const double n = Norm(t);
  for (double& x : t) x /= n;
  const auto ranking = RankBySimilarity(t, phrases, matrix);
  const auto pool = SamplePool(ranking, PhraseIndex(phrases), cfg.Sampling(), cfg.UInt("seed"));
  std::unordered_map<PhraseId, std::pair<std::size_t, double>> rank_of;
  for (std::size_t i = 0; i < ranking.size(); ++i) rank_of.emplace(ranking[i].id, std::make_pair(i, ranking[i].score));
  for (const auto& p : pool.members) {
    json j = PhraseToJson(p);
    j["rank"] = rank_of.at(p.id).first;
    j["score"] = rank_of.at(p.id).second;
    std::cout << j.dump() << '\n';
  }
  spdlog::info("pool of {} ({} upper, {} lower) from {} ranked phrases", pool.size(), pool.upper.size(),
               pool.lower.size(), ranking.size());
  return 0;
}

void PrintPiece(const LyricsPiece& piece, const SongStructure& structure, const EvalReport* report) {
  std::cout << piece.text << "\n\n";
  std::printf(" %-3s %-14s %-14s %s\n", "#", "expected", "realized", "sentence");
  const std::size_t rows = std::max(piece.sentences.size(), structure.size());
  for (std::size_t k = 0; k < rows; ++k) {
    std::string expected = "-";
    std::string realized = "-";
    std::string text;
    if (k < structure.size()) {
      expected = std::to_string(structure.entries[k].length) + " " + std::string(PunctName(structure.entries[k].terminal));
    }
    if (k < piece.sentences.size()) {
      const auto& s = piece.sentences[k];
      realized = std::to_string(utf8::Length(s.text)) + " " + std::string(PunctName(s.terminal));
      text = s.text;
    }
    const char* mark = expected == realized ? " " : "*";
    std::printf("%s%-3zu %-14s %-14s %s\n", mark, k + 1, expected.c_str(), realized.c_str(), text.c_str());
  }
  std::printf("\nloss: fluency=%.6f structure=%.6f rhyme=%.6f total=%.6f\n", piece.loss.fluency, piece.loss.structure,
              piece.loss.rhyme, piece.loss.total);
  std::printf("complete: %s\n", piece.complete ? "yes" : "no");
  if (report != nullptr) {
    std::printf("structure_match_rate=%.4f rhyme_consistency=%.4f reuse=%zu mean_fluency_loss=%.4f\n",
                report->structure_match_rate, report->rhyme_consistency, report->phrase_reuse_count,
                report->mean_fluency_loss);
  }
}

int GenerateCmd(const Config& cfg, bool as_json) {
  const Prompt prompt = PromptFrom(cfg);
  const Loaded l = LoadAll(cfg, true);
  const SongStructure& structure = l.structures.Lookup(prompt.rhythmic);
  auto scorer = MakeScorer(cfg);
  SearchStats stats;
  const LyricsPiece piece = GenerateForPrompt(l.View(), prompt, *scorer, Settings(cfg), cfg.UInt("seed"), &stats);
  spdlog::info("search: {} iterations, {} expansions, {} scorer calls, {:.3f}s", stats.iterations, stats.expansions,
               stats.scorer_calls, piece.wall_seconds);
  if (as_json) {
    PrintJson(piece.ToJson(structure));
  } else {
    PrintPiece(piece, structure, nullptr);
  }
  return 0;
}

int BaselineCmd(const Config& cfg, bool as_json) {
  const Prompt prompt = PromptFrom(cfg);
  const Loaded l = LoadAll(cfg, false);
  const SongStructure& structure = l.structures.Lookup(prompt.rhythmic);
  auto scorer = MakeScorer(cfg);
  LyricsPiece piece = BaselineForPrompt(l.View(), prompt, Settings(cfg), cfg.UInt("seed"));
  piece.loss = ScorePiece(piece, structure, l.rhymes, *scorer, cfg.Weights());
  if (as_json) {
    PrintJson(piece.ToJson(structure));
  } else {
    const EvalReport report = Evaluate(piece, structure, l.rhymes, *scorer);
    PrintPiece(piece, structure, &report);
  }
  return 0;
}

int EvalCmd(const Config& cfg, bool as_json) {
  const auto prompts = LoadPrompts(cfg.Path("prompts"));
  const Loaded l = LoadAll(cfg, true);
  auto scorer = MakeScorer(cfg);
  const auto report = RunPromptset(l.View(), prompts, *scorer, Settings(cfg), cfg.UInt("seed"));
  const std::filesystem::path out_path = cfg.Path("out");
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
  std::ofstream out(out_path);
  if (!out) throw Error(ErrorCategory::kIo, "cannot write " + out_path.string());
  WriteCsv(report, out);
  std::size_t ours_ok = 0, base_ok = 0;
  for (const auto& r : report.rows) {
    ours_ok += r.connector.ok ? 1 : 0;
    base_ok += r.baseline.ok ? 1 : 0;
    if (!r.connector.ok) spdlog::warn("connector failed on '{}'/{}: {}", r.prompt.topic, r.prompt.rhythmic, r.connector.error);
    if (!r.baseline.ok) spdlog::warn("baseline failed on '{}'/{}: {}", r.prompt.topic, r.prompt.rhythmic, r.baseline.error);
  }
  spdlog::info("evaluated {} prompts (connector ok {}, baseline ok {}); wrote {}", report.rows.size(), ours_ok,
               base_ok, out_path.string());
  if (as_json) {
    PrintJson({{"prompts", report.rows.size()},
               {"connector_ok", ours_ok},
               {"baseline_ok", base_ok},
               {"report", out_path.string()}});
  }
  return 0;
}

int Run(int argc, char** argv) {
  CLI::App app{"Controllable Song Ci lyrics generation from phrase prototypes"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  bool as_json = false;
  std::map<std::string, std::string> flags;
  app.add_option("--config", config_file, "key = value configuration file");
  app.add_flag("--json", as_json, "machine-readable output on stdout");
  for (const auto& key : ConfigKeys()) {
    app.add_option("--" + key.name, flags[key.name], key.help + " [default: " + key.default_value + "]");
  }

  using Handler = int (*)(const Config&, bool);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"curate", "extract phrases and derive structures", Curate},
      {"embed", "fit the built-in embedder and embed corpus sentences", Embed},
      {"npp-dataset", "build the next-phrase-prediction dataset", NppDataset},
      {"train-scorer", "train the built-in fluency scorer", TrainScorer},
      {"retrieve", "dump the topic's phrase pool as JSONL", Retrieve},
      {"generate", "generate a piece with the phrase connector", GenerateCmd},
      {"baseline", "generate a piece with the sentence baseline", BaselineCmd},
      {"eval", "run both methods on a prompt set and write a CSV report", EvalCmd},
  };
  std::map<const CLI::App*, Handler> handlers;
  for (const auto& [name, help, handler] : commands) handlers[app.add_subcommand(name, help)] = handler;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    ReportError("config", e.what());
    return ExitCode(ErrorCategory::kConfig);
  }

  try {
    Config cfg;
    if (!config_file.empty()) cfg.LoadFile(config_file);
    for (const auto& key : ConfigKeys()) {
      if (app.count("--" + key.name) > 0) cfg.Set(key.name, flags[key.name]);
    }
    cfg.Validate();
    auto logger = spdlog::stderr_color_mt("cilyric");
    logger->set_level(spdlog::level::from_str(cfg.Get("log_level")));
    spdlog::set_default_logger(logger);
    for (const auto& [sub, handler] : handlers) {
      if (sub->parsed()) return handler(cfg, as_json);
    }
    return 1;
  } catch (const Error& e) {
    ReportError(CategoryName(e.category()), e.what());
    return ExitCode(e.category());
  } catch (const std::exception& e) {
    ReportError("internal", e.what());
    return 1;
  }
}

}  // namespace
}  // namespace cilyric::cli

int main(int argc, char** argv) { return cilyric::cli::Run(argc, argv); }
