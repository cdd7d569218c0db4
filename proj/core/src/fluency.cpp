#include "cilyric/fluency.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "cilyric/error.h"
#include "cilyric/rng.h"
#include "cilyric/utf8.h"
#include "io_util.h"

namespace cilyric {

using nlohmann::json;

std::string_view ClassName(ConnectionClass c) {
  switch (c) {
    case ConnectionClass::kDirect: return "direct";
    case ConnectionClass::kComma: return "comma";
    case ConnectionClass::kPeriod: return "period";
    case ConnectionClass::kOther: return "other";
  }
  return "other";
}

std::optional<ConnectionClass> ParseClassName(std::string_view name) {
  for (auto c : kAllClasses) {
    if (ClassName(c) == name) return c;
  }
  return std::nullopt;
}

ConnectionClass ClassOf(Punct p) { return p == Punct::kComma ? ConnectionClass::kComma : ConnectionClass::kPeriod; }

// --- Dataset ---------------------------------------------------------------

NppCounts PlanNppCounts(std::size_t total, double random_fraction) {
  if (!(random_fraction >= 0.0 && random_fraction <= 1.0)) {
    throw Error(ErrorCategory::kConfig, "random fraction must lie in [0, 1]");
  }
  NppCounts plan;
  const auto other = static_cast<std::size_t>(std::llround(static_cast<double>(total) * random_fraction));
  const std::size_t rest = total - other;
  for (std::size_t c = 0; c < 3; ++c) plan.per_class[c] = rest / 3 + (c < rest % 3 ? 1 : 0);
  plan.per_class[Index(ConnectionClass::kOther)] = other;
  return plan;
}

namespace {

struct Pair {
  std::size_t anchor;     // index into phrases
  std::size_t successor;  // index into phrases
  ConnectionClass label;
};

}  // namespace

std::vector<NppSample> BuildNppDataset(std::span<const PhraseRecord> phrases, std::size_t total,
                                       double random_fraction, std::uint64_t seed) {
  const NppCounts plan = PlanNppCounts(total, random_fraction);

  // Order each paragraph's phrases by (sentence, phrase).
  std::map<ParagraphId, std::vector<std::size_t>> by_paragraph;
  for (std::size_t i = 0; i < phrases.size(); ++i) by_paragraph[phrases[i].source_paragraph].push_back(i);

  std::vector<std::string> history(phrases.size());
  std::array<std::vector<Pair>, 3> positives;
  for (auto& [pid, members] : by_paragraph) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      const auto& pa = phrases[a];
      const auto& pb = phrases[b];
      return std::tie(pa.sentence_index, pa.phrase_index) < std::tie(pb.sentence_index, pb.phrase_index);
    });
    std::string prefix;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto& cur = phrases[members[k]];
      if (k > 0) {
        const auto& prev = phrases[members[k - 1]];
        if (prev.sentence_index != cur.sentence_index) {
          prefix += PunctGlyph(prev.sentence_terminal);
          if (cur.sentence_index == prev.sentence_index + 1 && prev.is_sentence_end && cur.is_sentence_begin) {
            positives[Index(ClassOf(prev.sentence_terminal))].push_back(
                {members[k - 1], members[k], ClassOf(prev.sentence_terminal)});
          }
        } else if (cur.phrase_index == prev.phrase_index + 1) {
          positives[Index(ConnectionClass::kDirect)].push_back({members[k - 1], members[k], ConnectionClass::kDirect});
        }
      }
      prefix += cur.text;
      history[members[k]] = prefix;
    }
  }

  const std::size_t needed_other = plan.per_class[Index(ConnectionClass::kOther)];
  const bool other_feasible = needed_other == 0 || by_paragraph.size() >= 2;
  bool feasible = other_feasible;
  for (std::size_t c = 0; c < 3; ++c) feasible = feasible && positives[c].size() >= plan.per_class[c];
  if (!feasible) {
    std::string message = "phrase database too small for the requested NPP mix; achievable:";
    for (std::size_t c = 0; c < 3; ++c) {
      message += " " + std::string(ClassName(kAllClasses[c])) + "=" + std::to_string(positives[c].size()) +
                 "/" + std::to_string(plan.per_class[c]);
    }
    message += std::string(" other=") + (other_feasible ? "ok" : "0 (needs two paragraphs)");
    throw Error(ErrorCategory::kInsufficientData, message);
  }

  Rng rng(seed);
  std::vector<NppSample> samples;
  samples.reserve(total);
  auto emit = [&](const Pair& pair, std::size_t candidate, ConnectionClass label) {
    NppSample s;
    s.history = history[pair.anchor];
    s.candidate = phrases[candidate].text;
    s.label = label;
    s.anchor = phrases[pair.anchor].id;
    s.candidate_id = phrases[candidate].id;
    s.true_successor = phrases[pair.successor].id;
    samples.push_back(std::move(s));
  };
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t k : rng.SampleIndices(positives[c].size(), plan.per_class[c])) {
      emit(positives[c][k], positives[c][k].successor, positives[c][k].label);
    }
  }

  std::vector<const Pair*> all_pairs;
  for (const auto& group : positives) {
    for (const auto& p : group) all_pairs.push_back(&p);
  }
  if (needed_other > 0 && all_pairs.empty()) {
    throw Error(ErrorCategory::kInsufficientData, "no adjacent phrase pairs to corrupt for OTHER samples");
  }
  for (std::size_t n = 0; n < needed_other; ++n) {
    const Pair& pair = *all_pairs[rng.Below(all_pairs.size())];
    const auto& anchor = phrases[pair.anchor];
    const auto& successor = phrases[pair.successor];
    std::size_t candidate = phrases.size();
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const std::size_t k = rng.Below(phrases.size());
      if (phrases[k].source_paragraph != anchor.source_paragraph && phrases[k].text != successor.text) {
        candidate = k;
        break;
      }
    }
    if (candidate == phrases.size()) {
      throw Error(ErrorCategory::kInsufficientData, "could not draw an OTHER candidate from another paragraph");
    }
    emit(pair, candidate, ConnectionClass::kOther);
  }

  // Interleave classes deterministically.
  for (std::size_t i = samples.size(); i > 1; --i) {
    std::swap(samples[i - 1], samples[rng.Below(i)]);
  }
  return samples;
}

void SaveNppDataset(std::span<const NppSample> samples, const std::filesystem::path& path) {
  auto out = detail::OpenOutput(path);
  for (const auto& s : samples) {
    out << json{{"history", s.history}, {"candidate", s.candidate}, {"label", ClassName(s.label)}}.dump() << '\n';
  }
  if (!out) throw Error(ErrorCategory::kIo, "write failed: " + path.string());
}

std::vector<NppSample> ParseNppDataset(std::istream& in, std::string_view source) {
  std::vector<NppSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::IsBlank(line)) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no) + ": ";
    try {
      const json obj = json::parse(line);
      NppSample s;
      s.history = obj.at("history").get<std::string>();
      s.candidate = obj.at("candidate").get<std::string>();
      auto label = ParseClassName(obj.at("label").get<std::string>());
      if (!label) throw Error(ErrorCategory::kSchema, "unknown label");
      if (s.candidate.empty()) throw Error(ErrorCategory::kSchema, "empty candidate");
      s.label = *label;
      samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw Error(ErrorCategory::kSchema, where + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCategory::kSchema, where + e.what());
    }
  }
  return samples;
}

std::vector<NppSample> LoadNppDataset(const std::filesystem::path& path) {
  auto in = detail::OpenInput(path);
  return ParseNppDataset(in, path.string());
}

// --- Verdicts and loss -----------------------------------------------------

ConnectionClass ScorerVerdict::Argmax() const {
  return kAllClasses[static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin())];
}

bool ScorerVerdict::IsValid(double tolerance) const {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tolerance;
}

double FluencyLoss(const ScorerVerdict& verdict, ConnectionClass scenario) {
  if (scenario == ConnectionClass::kOther) {
    throw Error(ErrorCategory::kConfig, "fluency loss is undefined for the OTHER class");
  }
  const double p = verdict[scenario];
  if (!(p > 0.0)) return kFluencyLossCap;
  return std::clamp(-std::log(p), 0.0, kFluencyLossCap);
}

// --- Naive Bayes -----------------------------------------------------------

std::vector<std::string> BoundaryFeatures(std::string_view history, std::string_view candidate,
                                          std::size_t window) {
  std::vector<std::string> out;
  const std::string h = utf8::Suffix(history, window);
  const std::size_t hlen = utf8::Length(h);
  const std::size_t clen = utf8::Length(candidate);
  const std::string h1 = utf8::Suffix(h, 1);
  const std::string c1 = utf8::Prefix(candidate, 1);
  if (hlen >= 1) out.push_back("h1=" + h1);
  if (hlen >= 2) out.push_back("h2=" + utf8::Suffix(h, 2));
  if (clen >= 1) out.push_back("c1=" + c1);
  if (clen >= 2) out.push_back("c2=" + utf8::Prefix(candidate, 2));
  if (hlen >= 1 && clen >= 1) out.push_back("x=" + h1 + c1);
  return out;
}

namespace {

std::string_view KindOf(std::string_view feature) { return feature.substr(0, feature.find('=')); }

}  // namespace

NaiveBayesScorer NaiveBayesScorer::Train(std::span<const NppSample> samples, double smoothing, std::size_t window) {
  if (!(smoothing > 0.0) || !std::isfinite(smoothing)) {
    throw Error(ErrorCategory::kConfig, "smoothing must be a positive finite number");
  }
  NaiveBayesScorer nb;
  nb.smoothing_ = smoothing;
  nb.window_ = window;
  for (const auto& s : samples) {
    const std::size_t c = Index(s.label);
    ++nb.class_counts_[c];
    ++nb.total_;
    for (auto& f : BoundaryFeatures(s.history, s.candidate, window)) {
      auto [it, fresh] = nb.features_.try_emplace(std::move(f));
      if (fresh) ++nb.vocab_[std::string(KindOf(it->first))];
      ++it->second[c];
    }
  }
  for (auto c : kAllClasses) {
    if (nb.class_counts_[Index(c)] == 0) {
      throw Error(ErrorCategory::kInsufficientData,
                  "no training samples for class '" + std::string(ClassName(c)) + "'");
    }
  }
  return nb;
}

std::size_t NaiveBayesScorer::FeatureCount(std::string_view feature, ConnectionClass c) const {
  auto it = features_.find(feature);
  return it == features_.end() ? 0 : it->second[Index(c)];
}

std::size_t NaiveBayesScorer::VocabularySize(std::string_view kind) const {
  auto it = vocab_.find(kind);
  return it == vocab_.end() ? 0 : it->second;
}

ScorerVerdict NaiveBayesScorer::Predict(std::string_view history, std::string_view candidate) const {
  const double k = smoothing_;
  std::array<double, kClassCount> logp{};
  for (std::size_t c = 0; c < kClassCount; ++c) {
    logp[c] = std::log((static_cast<double>(class_counts_[c]) + k) / (static_cast<double>(total_) + kClassCount * k));
  }
  for (const auto& f : BoundaryFeatures(history, candidate, window_)) {
    auto it = features_.find(f);
    // One extra vocabulary slot reserves mass for unseen values.
    const double v = static_cast<double>(VocabularySize(KindOf(f)) + 1);
    for (std::size_t c = 0; c < kClassCount; ++c) {
      const double count = it == features_.end() ? 0.0 : static_cast<double>(it->second[c]);
      logp[c] += std::log((count + k) / (static_cast<double>(class_counts_[c]) + k * v));
    }
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  ScorerVerdict verdict;
  double sum = 0.0;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    verdict.probs[c] = std::exp(logp[c] - top);
    sum += verdict.probs[c];
  }
  for (double& p : verdict.probs) p /= sum;
  return verdict;
}

std::string NaiveBayesScorer::ToJson() const {
  json features = json::object();
  for (const auto& [f, counts] : features_) features[f] = counts;
  json root = {{"format", "cilyric-nb-scorer"},
               {"version", 1},
               {"smoothing", smoothing_},
               {"window", window_},
               {"classes", {"direct", "comma", "period", "other"}},
               {"class_counts", class_counts_},
               {"features", std::move(features)}};
  return root.dump();
}

NaiveBayesScorer NaiveBayesScorer::FromJson(std::string_view json_text) {
  try {
    const json root = json::parse(json_text);
    if (root.at("format") != "cilyric-nb-scorer" || root.at("version") != 1) {
      throw Error(ErrorCategory::kSchema, "unsupported scorer model");
    }
    NaiveBayesScorer nb;
    nb.smoothing_ = root.at("smoothing").get<double>();
    nb.window_ = root.at("window").get<std::size_t>();
    nb.class_counts_ = root.at("class_counts").get<std::array<std::size_t, kClassCount>>();
    for (std::size_t c : nb.class_counts_) nb.total_ += c;
    for (const auto& [f, counts] : root.at("features").items()) {
      nb.features_.emplace(f, counts.get<std::array<std::size_t, kClassCount>>());
      ++nb.vocab_[std::string(KindOf(f))];
    }
    return nb;
  } catch (const json::exception& e) {
    throw Error(ErrorCategory::kSchema, std::string("scorer model: ") + e.what());
  }
}

void NaiveBayesScorer::Save(const std::filesystem::path& path) const {
  auto out = detail::OpenOutput(path);
  out << ToJson() << '\n';
}

NaiveBayesScorer NaiveBayesScorer::Load(const std::filesystem::path& path) { return FromJson(detail::ReadAll(path)); }

}  // namespace cilyric
