#include "cilyric/eval.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>

#include "cilyric/baseline.h"
#include "cilyric/error.h"
#include "cilyric/utf8.h"

namespace cilyric {

Vector TopicVector(const Workspace& ws, std::string_view topic) {
  Vector v = ws.provider.EmbedTopic(topic);
  const double n = Norm(v);
  if (!(n > 0.0)) throw Error(ErrorCategory::kSchema, "topic '" + std::string(topic) + "' has a zero embedding");
  for (double& x : v) x /= n;
  return v;
}

PhrasePool RetrievePool(const Workspace& ws, std::string_view topic, const SamplingParams& params,
                        std::uint64_t seed) {
  const Vector t = TopicVector(ws, topic);
  const auto ranking = RankBySimilarity(t, ws.phrases, ws.matrix);
  return SamplePool(ranking, PhraseIndex(ws.phrases), params, seed);
}

LyricsPiece GenerateForPrompt(const Workspace& ws, const Prompt& prompt, Scorer& scorer, const RunSettings& settings,
                              std::uint64_t seed, SearchStats* stats) {
  const auto started = std::chrono::steady_clock::now();
  const SongStructure& structure = ws.structures.Lookup(prompt.rhythmic);
  const PhrasePool pool = RetrievePool(ws, prompt.topic, settings.sampling, seed);
  GenerateOptions options = settings.generate;
  options.seed = seed;
  LyricsPiece piece = Generate(prompt, structure, pool, scorer, ws.rhymes, options, stats);
  piece.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return piece;
}

LyricsPiece BaselineForPrompt(const Workspace& ws, const Prompt& prompt, const RunSettings& settings,
                              std::uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  const SongStructure& structure = ws.structures.Lookup(prompt.rhythmic);
  const Vector t = TopicVector(ws, prompt.topic);
  LyricsPiece piece = BaselineGenerate(prompt, structure, ws.corpus, ws.matrix, t, settings.sampling, seed);
  piece.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return piece;
}

Layout LayoutOf(const LyricsPiece& piece) {
  Layout layout;
  for (const auto& s : piece.sentences) {
    layout.push_back({static_cast<std::uint32_t>(utf8::Length(s.text)), true, s.terminal, utf8::Suffix(s.text, 1)});
  }
  return layout;
}

namespace {

/// Sum of per-transition fluency losses, replaying the history the
/// connector would have seen.
double FluencySum(const LyricsPiece& piece, Scorer& scorer, std::size_t* transitions) {
  double sum = 0.0;
  std::string history;
  std::size_t count = 0;
  for (std::size_t i = 0; i < piece.units.size(); ++i) {
    const auto& u = piece.units[i];
    if (i > 0) {
      sum += FluencyLoss(scorer.Score(history, u.text), u.connection);
      ++count;
      if (u.connection == ConnectionClass::kComma) history += PunctGlyph(Punct::kComma);
      if (u.connection == ConnectionClass::kPeriod) history += PunctGlyph(Punct::kPeriod);
    }
    history += u.text;
  }
  if (transitions != nullptr) *transitions = count;
  return sum;
}

}  // namespace

LossTerms ScorePiece(const LyricsPiece& piece, const SongStructure& structure, const RhymeTable& table,
                     Scorer& scorer, const LossWeights& weights) {
  const Layout layout = LayoutOf(piece);
  LossTerms t;
  t.fluency = FluencySum(piece, scorer, nullptr);
  t.structure = StructureLoss(layout, structure, ScoringMode::kFinal);
  t.rhyme = RhymeLoss(layout, structure, table, ScoringMode::kFinal);
  t.total = weights.alpha * t.fluency + weights.beta * t.structure + weights.gamma * t.rhyme;
  return t;
}

EvalReport Evaluate(const LyricsPiece& piece, const SongStructure& structure, const RhymeTable& table,
                    Scorer& scorer) {
  EvalReport r;
  const Layout layout = LayoutOf(piece);
  const std::size_t slots = std::max(structure.size(), layout.size());
  std::size_t matches = 0;
  for (std::size_t k = 0; k < std::min(structure.size(), layout.size()); ++k) {
    if (layout[k].length == structure.entries[k].length) ++matches;
  }
  r.structure_match_rate = slots == 0 ? 1.0 : static_cast<double>(matches) / static_cast<double>(slots);
  r.rhyme_consistency = 1.0 - RhymeLoss(layout, structure, table, ScoringMode::kFinal);
  std::set<std::uint64_t> distinct;
  for (const auto& u : piece.units) distinct.insert(u.id);
  r.phrase_reuse_count = piece.units.size() - distinct.size();
  const double sum = FluencySum(piece, scorer, &r.transitions);
  r.mean_fluency_loss = r.transitions == 0 ? 0.0 : sum / static_cast<double>(r.transitions);
  r.wall_seconds = piece.wall_seconds;
  return r;
}

namespace {

template <typename Produce>
MethodOutcome RunMethod(Produce produce, std::string_view rhythmic, const Workspace& ws, Scorer& scorer,
                        const LossWeights& weights, bool rescore) {
  MethodOutcome out;
  try {
    const SongStructure& structure = ws.structures.Lookup(rhythmic);
    const LyricsPiece piece = produce();
    out.report = Evaluate(piece, structure, ws.rhymes, scorer);
    out.complete = piece.complete;
    out.total_loss = rescore ? ScorePiece(piece, structure, ws.rhymes, scorer, weights).total : piece.loss.total;
    out.ok = true;
  } catch (const Error& e) {
    out.error = std::string(CategoryName(e.category())) + ": " + e.what();
  }
  return out;
}

}  // namespace

PromptsetReport RunPromptset(const Workspace& ws, std::span<const Prompt> prompts, Scorer& scorer,
                             const RunSettings& settings, std::uint64_t seed) {
  PromptsetReport report;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const Prompt& prompt = prompts[i];
    const std::uint64_t s = seed + i;
    PromptOutcome row;
    row.prompt = prompt;
    row.connector = RunMethod([&] { return GenerateForPrompt(ws, prompt, scorer, settings, s); }, prompt.rhythmic, ws,
                              scorer, settings.generate.weights, false);
    row.baseline = RunMethod([&] { return BaselineForPrompt(ws, prompt, settings, s); }, prompt.rhythmic, ws, scorer,
                             settings.generate.weights, true);
    report.rows.push_back(std::move(row));
  }
  return report;
}

const std::vector<std::string>& CsvColumns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c{"index", "topic", "rhythmic"};
    for (const char* m : {"connector", "baseline"}) {
      for (const char* f : {"status", "complete", "structure_match_rate", "rhyme_consistency", "phrase_reuse_count",
                            "mean_fluency_loss", "total_loss", "wall_seconds", "error"}) {
        c.push_back(std::string(m) + "_" + f);
      }
    }
    return c;
  }();
  return columns;
}

namespace {

std::string Quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void WriteRow(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << Quote(fields[i]);
  out << '\n';
}

void AppendMethod(std::vector<std::string>& f, const MethodOutcome& m) {
  f.push_back(m.ok ? "ok" : "error");
  if (!m.ok) {
    for (int i = 0; i < 7; ++i) f.emplace_back();
  } else {
    f.push_back(m.complete ? "1" : "0");
    f.push_back(Num(m.report.structure_match_rate));
    f.push_back(Num(m.report.rhyme_consistency));
    f.push_back(std::to_string(m.report.phrase_reuse_count));
    f.push_back(Num(m.report.mean_fluency_loss));
    f.push_back(Num(m.total_loss));
    f.push_back(Num(m.report.wall_seconds));
  }
  f.push_back(m.error);
}

void AppendMean(std::vector<std::string>& f, const std::vector<const MethodOutcome*>& all) {
  std::size_t ok = 0;
  double complete = 0, match = 0, rhyme = 0, reuse = 0, flu = 0, total = 0, wall = 0;
  for (const MethodOutcome* m : all) {
    if (!m->ok) continue;
    ++ok;
    complete += m->complete ? 1.0 : 0.0;
    match += m->report.structure_match_rate;
    rhyme += m->report.rhyme_consistency;
    reuse += static_cast<double>(m->report.phrase_reuse_count);
    flu += m->report.mean_fluency_loss;
    total += m->total_loss;
    wall += m->report.wall_seconds;
  }
  f.push_back("ok=" + std::to_string(ok) + "/" + std::to_string(all.size()));
  if (ok == 0) {
    for (int i = 0; i < 7; ++i) f.emplace_back();
  } else {
    const double n = static_cast<double>(ok);
    for (double v : {complete, match, rhyme, reuse, flu, total, wall}) f.push_back(Num(v / n));
  }
  f.emplace_back();
}

}  // namespace

void WriteCsv(const PromptsetReport& report, std::ostream& out) {
  WriteRow(out, CsvColumns());
  std::vector<const MethodOutcome*> ours;
  std::vector<const MethodOutcome*> base;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    std::vector<std::string> f{std::to_string(i), row.prompt.topic, row.prompt.rhythmic};
    AppendMethod(f, row.connector);
    AppendMethod(f, row.baseline);
    WriteRow(out, f);
    ours.push_back(&row.connector);
    base.push_back(&row.baseline);
  }
  std::vector<std::string> f{"mean", "", ""};
  AppendMean(f, ours);
  AppendMean(f, base);
  WriteRow(out, f);
}

}  // namespace cilyric
