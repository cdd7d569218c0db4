#include "cilyric/connector.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "cilyric/error.h"
#include "cilyric/utf8.h"

namespace cilyric {

using nlohmann::json;

double ShapePenalty(double x) { return x < 1.0 ? 2.0 * x - x * x : 1.0; }

double StructureLoss(std::span<const LayoutSentence> layout, const SongStructure& structure, ScoringMode mode) {
  const std::size_t n = structure.size();
  double loss = 0.0;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (k >= n) {
      loss += 1.0;
      continue;
    }
    const double expected = structure.entries[k].length;
    const double actual = layout[k].length;
    if (layout[k].closed || mode == ScoringMode::kFinal) {
      loss += ShapePenalty(std::abs(expected - actual) / expected);
    } else if (actual > expected) {
      loss += ShapePenalty((actual - expected) / expected);
    }
  }
  if (mode == ScoringMode::kFinal && layout.size() < n) loss += static_cast<double>(n - layout.size());
  return loss;
}

double RhymeLoss(std::span<const LayoutSentence> layout, const SongStructure& structure, const RhymeTable& table,
                 ScoringMode mode) {
  std::vector<RhymeClass> classes;
  const std::size_t limit = std::min(layout.size(), structure.size());
  for (std::size_t k = 0; k < limit; ++k) {
    if (structure.entries[k].terminal != Punct::kPeriod) continue;
    if (!layout[k].closed && mode == ScoringMode::kSearch) continue;
    classes.push_back(table.ClassOf(layout[k].last_char));
  }
  return RhymeDispersion(classes, table.class_count());
}

void LossWeights::Validate() const {
  for (double w : {alpha, beta, gamma}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCategory::kConfig, "loss weights must be finite and >= 0");
  }
  if (alpha == 0.0 && beta == 0.0 && gamma == 0.0) {
    throw Error(ErrorCategory::kConfig, "loss weights must not all be zero");
  }
}

bool Hypothesis::Uses(PhraseId id) const { return std::binary_search(used.begin(), used.end(), id); }

namespace {

struct Evaluation {
  Layout layout;
  LossTerms terms;
};

double Combine(const LossWeights& w, const LossTerms& t) {
  return w.alpha * t.fluency + w.beta * t.structure + w.gamma * t.rhyme;
}

/// Shared by the search's scoring pass and by Extend, so both produce
/// bit-identical losses.
std::optional<Evaluation> Evaluate(const Hypothesis& h, std::uint32_t phrase_length, std::string_view last_char,
                                   ConnectionClass scenario, const ScorerVerdict& verdict,
                                   const ConnectorContext& ctx) {
  if (h.complete) return std::nullopt;
  if (scenario == ConnectionClass::kOther) {
    throw Error(ErrorCategory::kConfig, "OTHER is not a connection scenario");
  }
  Evaluation e{h.layout, h.loss};
  if (h.steps.empty()) {
    if (scenario != ConnectionClass::kDirect) return std::nullopt;
    e.layout.push_back({phrase_length, false, Punct::kPeriod, std::string(last_char)});
  } else if (scenario == ConnectionClass::kDirect) {
    e.layout.back().length += phrase_length;
    e.layout.back().last_char = last_char;
    e.terms.fluency += FluencyLoss(verdict, scenario);
  } else {
    if (e.layout.size() >= ctx.structure.size()) return std::nullopt;
    e.layout.back().closed = true;
    e.layout.back().terminal = scenario == ConnectionClass::kComma ? Punct::kComma : Punct::kPeriod;
    e.layout.push_back({phrase_length, false, Punct::kPeriod, std::string(last_char)});
    e.terms.fluency += FluencyLoss(verdict, scenario);
  }
  e.terms.structure = StructureLoss(e.layout, ctx.structure, ScoringMode::kSearch);
  e.terms.rhyme = RhymeLoss(e.layout, ctx.structure, ctx.rhymes, ScoringMode::kSearch);
  e.terms.total = Combine(ctx.weights, e.terms);
  return e;
}

Hypothesis Materialize(const Hypothesis& h, const PhraseRecord& phrase, ConnectionClass scenario, Evaluation e) {
  Hypothesis n;
  n.steps = h.steps;
  n.steps.push_back({phrase.id, h.steps.empty() ? ConnectionClass::kDirect : scenario});
  n.layout = std::move(e.layout);
  n.text = h.text;
  if (!h.steps.empty() && scenario != ConnectionClass::kDirect) {
    n.text += PunctGlyph(scenario == ConnectionClass::kComma ? Punct::kComma : Punct::kPeriod);
  }
  n.text += phrase.text;
  n.used = h.used;
  n.used.insert(std::upper_bound(n.used.begin(), n.used.end(), phrase.id), phrase.id);
  n.loss = e.terms;
  return n;
}

void CheckReuse(const Hypothesis& h, const PhraseRecord& phrase) {
  if (h.Uses(phrase.id)) {
    throw Error(ErrorCategory::kSearch, "phrase " + std::to_string(phrase.id) + " is already used by this hypothesis");
  }
}

LossTerms FinalTerms(const Layout& layout, const LossTerms& base, const ConnectorContext& ctx) {
  LossTerms t = base;
  t.structure = StructureLoss(layout, ctx.structure, ScoringMode::kFinal);
  t.rhyme = RhymeLoss(layout, ctx.structure, ctx.rhymes, ScoringMode::kFinal);
  t.total = Combine(ctx.weights, t);
  return t;
}

}  // namespace

std::optional<Hypothesis> ExtendWithVerdict(const Hypothesis& h, const PhraseRecord& phrase, ConnectionClass scenario,
                                            const ScorerVerdict& verdict, const ConnectorContext& ctx) {
  CheckReuse(h, phrase);
  auto e = Evaluate(h, static_cast<std::uint32_t>(utf8::Length(phrase.text)), utf8::Suffix(phrase.text, 1), scenario,
                    verdict, ctx);
  if (!e) return std::nullopt;
  return Materialize(h, phrase, scenario, std::move(*e));
}

std::optional<Hypothesis> Extend(const Hypothesis& h, const PhraseRecord& phrase, ConnectionClass scenario,
                                 Scorer& scorer, const ConnectorContext& ctx) {
  CheckReuse(h, phrase);
  const ScorerVerdict verdict = h.steps.empty() ? ScorerVerdict{} : scorer.Score(h.text, phrase.text);
  return ExtendWithVerdict(h, phrase, scenario, verdict, ctx);
}

std::optional<Hypothesis> Finalize(const Hypothesis& h, const ConnectorContext& ctx) {
  if (h.complete || h.layout.size() != ctx.structure.size()) return std::nullopt;
  Hypothesis f = h;
  f.layout.back().closed = true;
  f.layout.back().terminal = Punct::kPeriod;
  f.text += PunctGlyph(Punct::kPeriod);
  f.loss = FinalTerms(f.layout, h.loss, ctx);
  f.complete = true;
  return f;
}

bool BetterHypothesis(const Hypothesis& a, const Hypothesis& b) {
  if (a.loss.total != b.loss.total) return a.loss.total < b.loss.total;
  if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    if (a.steps[i].phrase != b.steps[i].phrase) return a.steps[i].phrase < b.steps[i].phrase;
  }
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    if (a.steps[i].connection != b.steps[i].connection) return a.steps[i].connection < b.steps[i].connection;
  }
  return false;
}

// --- Pieces ----------------------------------------------------------------

LyricsPiece ToPiece(const Hypothesis& h, const PhrasePool& pool, const Prompt& prompt) {
  std::unordered_map<PhraseId, const PhraseRecord*> by_id;
  for (const auto& p : pool.members) by_id.emplace(p.id, &p);
  LyricsPiece piece;
  piece.method = "phrase-connector";
  piece.prompt = prompt;
  piece.loss = h.loss;
  piece.complete = h.complete;
  for (const auto& step : h.steps) {
    const PhraseRecord& p = *by_id.at(step.phrase);
    piece.units.push_back({p.id, p.text, step.connection});
    if (piece.sentences.empty()) {
      piece.sentences.push_back({p.text, Punct::kPeriod});
    } else if (step.connection == ConnectionClass::kDirect) {
      piece.sentences.back().text += p.text;
    } else {
      piece.sentences.back().terminal = step.connection == ConnectionClass::kComma ? Punct::kComma : Punct::kPeriod;
      piece.sentences.push_back({p.text, Punct::kPeriod});
    }
  }
  for (const auto& s : piece.sentences) piece.text += s.text + std::string(PunctGlyph(s.terminal));
  return piece;
}

json LyricsPiece::ToJson(const SongStructure& structure) const {
  json sentences_json = json::array();
  const std::size_t rows = std::max(sentences.size(), structure.size());
  for (std::size_t k = 0; k < rows; ++k) {
    json row = json::object();
    if (k < sentences.size()) {
      row["text"] = sentences[k].text;
      row["terminal"] = PunctName(sentences[k].terminal);
      row["length"] = utf8::Length(sentences[k].text);
    } else {
      row["text"] = nullptr;
      row["terminal"] = nullptr;
      row["length"] = 0;
    }
    if (k < structure.size()) {
      row["expected_length"] = structure.entries[k].length;
      row["expected_terminal"] = PunctName(structure.entries[k].terminal);
    } else {
      row["expected_length"] = nullptr;
      row["expected_terminal"] = nullptr;
    }
    sentences_json.push_back(std::move(row));
  }
  json units_json = json::array();
  for (const auto& u : units) {
    units_json.push_back({{"id", u.id}, {"text", u.text}, {"connection", ClassName(u.connection)}});
  }
  return {{"method", method},
          {"topic", prompt.topic},
          {"rhythmic", prompt.rhythmic},
          {"seed", seed},
          {"complete", complete},
          {"text", text},
          {"sentences", std::move(sentences_json)},
          {"units", std::move(units_json)},
          {"loss", {{"fluency", loss.fluency}, {"structure", loss.structure}, {"rhyme", loss.rhyme}, {"total", loss.total}}}};
}

// --- Beam search -----------------------------------------------------------

namespace {

struct Candidate {
  std::size_t parent;
  std::size_t member;  // index into pool.members
  ConnectionClass scenario;
  LossTerms terms;
  ScorerVerdict verdict;
};

/// Dense rank of each hypothesis under `less`, equal sequences sharing a rank.
template <typename Less>
std::vector<std::size_t> DenseRank(const std::vector<Hypothesis>& beam, Less less) {
  std::vector<std::size_t> order(beam.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return less(beam[a], beam[b]); });
  std::vector<std::size_t> rank(beam.size());
  std::size_t r = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && less(beam[order[i - 1]], beam[order[i]])) ++r;
    rank[order[i]] = r;
  }
  return rank;
}

bool IdsLess(const Hypothesis& a, const Hypothesis& b) {
  return std::lexicographical_compare(a.steps.begin(), a.steps.end(), b.steps.begin(), b.steps.end(),
                                      [](const Step& x, const Step& y) { return x.phrase < y.phrase; });
}

bool ConnectionsLess(const Hypothesis& a, const Hypothesis& b) {
  return std::lexicographical_compare(a.steps.begin(), a.steps.end(), b.steps.begin(), b.steps.end(),
                                      [](const Step& x, const Step& y) { return x.connection < y.connection; });
}

}  // namespace

LyricsPiece Generate(const Prompt& prompt, const SongStructure& structure, const PhrasePool& pool, Scorer& scorer,
                     const RhymeTable& rhymes, const GenerateOptions& options, SearchStats* stats_out) {
  const auto started = std::chrono::steady_clock::now();
  options.weights.Validate();
  structure.Validate();
  if (options.beam_width == 0) throw Error(ErrorCategory::kConfig, "beam width must be positive");
  if (pool.members.empty()) throw Error(ErrorCategory::kSearch, "phrase pool is empty");

  SearchStats stats;
  const ConnectorContext ctx{structure, rhymes, options.weights};
  const auto& members = pool.members;

  std::vector<std::size_t> upper;
  std::vector<std::size_t> lower;
  std::vector<std::size_t> everyone;
  for (std::size_t i = 0; i < members.size(); ++i) {
    (members[i].half == Half::kUpper ? upper : lower).push_back(i);
    everyone.push_back(i);
  }
  if (upper.empty()) {
    stats.upper_fallback = true;
    spdlog::warn("upper-half pool is empty; using the whole pool for upper sentences");
    upper = everyone;
  }
  if (lower.empty() && structure.size() > structure.UpperCount()) {
    stats.lower_fallback = true;
    spdlog::warn("lower-half pool is empty; using the whole pool for lower sentences");
    lower = everyone;
  }
  auto source_for = [&](std::size_t sentence) -> const std::vector<std::size_t>& {
    return sentence < structure.UpperCount() ? upper : lower;
  };

  std::vector<std::uint32_t> lengths(members.size());
  std::vector<std::string> last_chars(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    lengths[i] = static_cast<std::uint32_t>(utf8::Length(members[i].text));
    last_chars[i] = utf8::Suffix(members[i].text, 1);
  }

  std::optional<Hypothesis> best_complete;
  std::optional<Hypothesis> best_partial;
  auto observe = [&](const Hypothesis& h) {
    if (auto f = Finalize(h, ctx)) {
      ++stats.completed;
      if (!best_complete || BetterHypothesis(*f, *best_complete)) best_complete = std::move(*f);
    }
    Hypothesis partial = h;
    partial.loss = FinalTerms(h.layout, h.loss, ctx);
    if (!best_partial || BetterHypothesis(partial, *best_partial)) best_partial = std::move(partial);
  };

  std::vector<Hypothesis> beam;
  const Hypothesis empty;
  for (std::size_t i : upper) {
    if (beam.size() >= options.beam_width) break;
    if (!members[i].is_sentence_begin) continue;
    auto h = ExtendWithVerdict(empty, members[i], ConnectionClass::kDirect, ScorerVerdict{}, ctx);
    beam.push_back(std::move(*h));
  }
  if (beam.empty()) throw Error(ErrorCategory::kSearch, "no sentence-initial phrase in the upper-half pool");
  for (const auto& h : beam) observe(h);

  std::vector<std::optional<ScorerVerdict>> verdicts(members.size());
  std::vector<Candidate> candidates;
  while (!beam.empty()) {
    ++stats.iterations;
    candidates.clear();
    for (std::size_t b = 0; b < beam.size(); ++b) {
      const Hypothesis& h = beam[b];
      std::fill(verdicts.begin(), verdicts.end(), std::nullopt);
      const std::size_t open = h.layout.size() - 1;
      for (ConnectionClass scenario : kScenarios) {
        const bool new_sentence = scenario != ConnectionClass::kDirect;
        if (new_sentence && h.layout.size() >= structure.size()) continue;
        for (std::size_t m : source_for(new_sentence ? open + 1 : open)) {
          if (h.Uses(members[m].id)) continue;
          if (!verdicts[m]) {
            verdicts[m] = scorer.Score(h.text, members[m].text);
            ++stats.scorer_calls;
          }
          auto e = Evaluate(h, lengths[m], last_chars[m], scenario, *verdicts[m], ctx);
          if (!e) continue;
          ++stats.expansions;
          if (best_complete) {
            const double bound = options.weights.alpha * e->terms.fluency + options.weights.beta * e->terms.structure;
            if (bound > best_complete->loss.total) continue;
          }
          candidates.push_back({b, m, scenario, e->terms, *verdicts[m]});
        }
      }
    }
    if (candidates.empty()) break;

    const auto id_rank = DenseRank(beam, IdsLess);
    const auto conn_rank = DenseRank(beam, ConnectionsLess);
    auto better = [&](const Candidate& a, const Candidate& b) {
      if (a.terms.total != b.terms.total) return a.terms.total < b.terms.total;
      if (id_rank[a.parent] != id_rank[b.parent]) return id_rank[a.parent] < id_rank[b.parent];
      if (members[a.member].id != members[b.member].id) return members[a.member].id < members[b.member].id;
      if (conn_rank[a.parent] != conn_rank[b.parent]) return conn_rank[a.parent] < conn_rank[b.parent];
      return a.scenario < b.scenario;
    };
    const std::size_t keep = std::min(options.beam_width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      better);

    std::vector<Hypothesis> next;
    next.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const Candidate& c = candidates[i];
      auto h = ExtendWithVerdict(beam[c.parent], members[c.member], c.scenario, c.verdict, ctx);
      next.push_back(std::move(*h));
    }
    beam = std::move(next);
    for (const auto& h : beam) observe(h);
  }

  const Hypothesis& chosen = best_complete ? *best_complete : *best_partial;
  LyricsPiece piece = ToPiece(chosen, pool, prompt);
  piece.seed = options.seed;
  piece.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  if (stats_out != nullptr) *stats_out = stats;
  return piece;
}

}  // namespace cilyric
