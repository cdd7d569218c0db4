#pragma once

// Independent reference implementations used to check the library. They are
// written for clarity, not speed, and share no code with core/ beyond the
// plain data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cilyric/connector.h"
#include "cilyric/corpus.h"
#include "cilyric/curation.h"
#include "cilyric/embedding.h"
#include "cilyric/fluency.h"
#include "cilyric/retriever.h"
#include "cilyric/rhyme.h"

namespace cilyric::oracle {

// --- Phrase extraction -----------------------------------------------------

inline std::size_t CountChars(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80 ? 1 : 0;
  return n;
}

struct Node {
  std::string content;
  std::vector<Node> children;
};

inline std::string Concat(const Node& n) {
  if (n.children.empty()) return n.content;
  std::string s;
  for (const auto& c : n.children) s += Concat(c);
  return s;
}

/// Straight recursive statement of the extraction rule, appending to `p`.
inline void ExtractPhrase(const Node& n, std::vector<std::string>& p) {
  if (n.children.empty()) {
    p.push_back(n.content);
    return;
  }
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    const Node& child = n.children[i];
    if (child.children.empty()) {
      p.push_back(child.content);
    } else if (CountChars(Concat(child)) <= 4) {
      p.push_back(Concat(child));
    } else {
      ExtractPhrase(child, p);
    }
  }
}

inline SemanticTree ToTree(const Node& n) {
  if (n.children.empty()) return SemanticTree::Leaf(n.content);
  std::vector<SemanticTree> kids;
  for (const auto& c : n.children) kids.push_back(ToTree(c));
  return SemanticTree::Node(std::move(kids));
}

/// Every ordered tree with exactly `leaves` leaves whose internal nodes have
/// at least two children. Leaf contents are left empty.
inline std::vector<Node> Shapes(std::size_t leaves) {
  if (leaves == 1) return {Node{}};
  std::vector<Node> out;
  // Children sequence: split `leaves` into an ordered list of >= 2 parts.
  std::function<void(std::size_t, std::vector<Node>&)> rec = [&](std::size_t left, std::vector<Node>& kids) {
    if (left == 0) {
      if (kids.size() >= 2) out.push_back(Node{"", kids});
      return;
    }
    for (std::size_t first = 1; first <= left; ++first) {
      if (kids.empty() && first == leaves) continue;  // would be a unary node
      for (const Node& sub : Shapes(first)) {
        kids.push_back(sub);
        rec(left - first, kids);
        kids.pop_back();
      }
    }
  };
  std::vector<Node> kids;
  rec(leaves, kids);
  return out;
}

inline std::size_t LeafCount(const Node& n) {
  if (n.children.empty()) return 1;
  std::size_t k = 0;
  for (const auto& c : n.children) k += LeafCount(c);
  return k;
}

/// Fills leaves left to right with texts of the given lengths drawn from `glyph`.
inline void FillLeaves(Node& n, const std::vector<std::size_t>& lengths, std::size_t& leaf, std::size_t& ch,
                       const std::function<std::string(std::size_t)>& glyph) {
  if (n.children.empty()) {
    n.content.clear();
    for (std::size_t i = 0; i < lengths[leaf]; ++i) n.content += glyph(ch++);
    ++leaf;
    return;
  }
  for (auto& c : n.children) FillLeaves(c, lengths, leaf, ch, glyph);
}

// --- Retrieval -------------------------------------------------------------

/// Full sort by extended-precision cosine (rows are unit norm, so the dot
/// product), ties by phrase id.
inline SimilarityRanking BruteForceRanking(const std::vector<double>& topic, const std::vector<PhraseRecord>& phrases,
                                           const EmbeddingMatrix& matrix) {
  struct Row {
    PhraseId id;
    long double score;
  };
  std::vector<Row> rows;
  for (const auto& p : phrases) {
    const auto r = matrix.Row(*matrix.Find(SentenceKey(p.source_paragraph, p.sentence_index)));
    long double dot = 0.0L;
    for (std::size_t d = 0; d < topic.size(); ++d) dot += static_cast<long double>(topic[d]) * r[d];
    rows.push_back({p.id, dot});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  SimilarityRanking out;
  for (const auto& r : rows) out.push_back({r.id, static_cast<double>(r.score)});
  return out;
}

// --- Losses ----------------------------------------------------------------

inline double F(double x) { return x >= 1.0 ? 1.0 : 2.0 * x - x * x; }

/// Finished-piece structure loss from realized sentence lengths.
inline double FinalStructure(const std::vector<std::uint32_t>& lengths, const SongStructure& s) {
  double loss = 0.0;
  for (std::size_t k = 0; k < lengths.size(); ++k) {
    if (k >= s.entries.size()) {
      loss += 1.0;
      continue;
    }
    const double l = s.entries[k].length;
    const double h = lengths[k];
    loss += F(std::fabs(l - h) / l);
  }
  if (lengths.size() < s.entries.size()) loss += static_cast<double>(s.entries.size() - lengths.size());
  return loss;
}

/// Normalized rhyme dispersion computed from class counts.
inline double Dispersion(const std::vector<RhymeClass>& classes, std::size_t k) {
  const std::size_t n = classes.size();
  if (n <= 1) return 0.0;
  std::map<RhymeClass, std::size_t> counts;
  for (auto c : classes) ++counts[c];
  double sq = 0.0;
  for (const auto& [c, m] : counts) sq += static_cast<double>(m * m);
  const double nn = static_cast<double>(n * n);
  const std::size_t classes_used = std::min(n, k);
  // Most even split: n / m items per class, the first n % m classes get one more.
  double even = 0.0;
  for (std::size_t j = 0; j < classes_used; ++j) {
    const std::size_t q = n / classes_used + (j < n % classes_used ? 1 : 0);
    even += static_cast<double>(q * q);
  }
  const double max = 1.0 - even / nn;
  if (max <= 0.0) return 0.0;
  return (1.0 - sq / nn) / max;
}

// --- Exhaustive connector search -------------------------------------------

struct SearchResult {
  double best_total = std::numeric_limits<double>::infinity();
  std::vector<Step> best_steps;
  std::size_t complete_count = 0;
};

/// Enumerates every phrase sequence and connection choice that the search
/// rules allow and returns the lowest finished total.
inline SearchResult Exhaustive(const PhrasePool& pool, const SongStructure& structure, const RhymeTable& rhymes,
                               Scorer& scorer, const LossWeights& w) {
  const std::size_t n = structure.entries.size();
  const std::size_t upper_count = (n + 1) / 2;
  std::vector<std::size_t> upper, lower, all;
  for (std::size_t i = 0; i < pool.members.size(); ++i) {
    (pool.members[i].half == Half::kUpper ? upper : lower).push_back(i);
    all.push_back(i);
  }
  if (upper.empty()) upper = all;
  if (lower.empty()) lower = all;

  SearchResult result;
  std::vector<bool> used(pool.members.size(), false);
  std::vector<std::uint32_t> lengths;
  std::vector<std::string> last_chars;
  std::vector<Step> steps;

  auto last_char = [](const std::string& s) {
    std::size_t i = s.size();
    while (i > 0 && (static_cast<unsigned char>(s[i - 1]) & 0xC0) == 0x80) --i;
    return s.substr(i > 0 ? i - 1 : 0);
  };

  std::function<void(const std::string&, double)> dfs = [&](const std::string& history, double flu) {
    if (lengths.size() == n) {
      std::vector<RhymeClass> classes;
      for (std::size_t k = 0; k < n; ++k) {
        if (structure.entries[k].terminal == Punct::kPeriod) classes.push_back(rhymes.ClassOf(last_chars[k]));
      }
      const double total =
          w.alpha * flu + w.beta * FinalStructure(lengths, structure) + w.gamma * Dispersion(classes, rhymes.class_count());
      ++result.complete_count;
      if (total < result.best_total) {
        result.best_total = total;
        result.best_steps = steps;
      }
    }
    for (ConnectionClass scenario : kScenarios) {
      const bool opens = scenario != ConnectionClass::kDirect;
      if (opens && lengths.size() == n) continue;
      const std::size_t target = opens ? lengths.size() : lengths.size() - 1;
      for (std::size_t m : target < upper_count ? upper : lower) {
        if (used[m]) continue;
        const PhraseRecord& p = pool.members[m];
        const double loss = std::min(20.0, std::max(0.0, -std::log(scorer.Score(history, p.text)[scenario])));
        std::string next = history;
        if (scenario == ConnectionClass::kComma) next += "，";
        if (scenario == ConnectionClass::kPeriod) next += "。";
        next += p.text;
        const std::uint32_t len = static_cast<std::uint32_t>(CountChars(p.text));
        const auto saved_lengths = lengths;
        const auto saved_chars = last_chars;
        if (opens) {
          lengths.push_back(len);
          last_chars.push_back(last_char(p.text));
        } else {
          lengths.back() += len;
          last_chars.back() = last_char(p.text);
        }
        used[m] = true;
        steps.push_back({p.id, scenario});
        dfs(next, flu + loss);
        steps.pop_back();
        used[m] = false;
        lengths = saved_lengths;
        last_chars = saved_chars;
      }
    }
  };

  for (std::size_t m : upper) {
    const PhraseRecord& p = pool.members[m];
    if (!p.is_sentence_begin) continue;
    used[m] = true;
    lengths = {static_cast<std::uint32_t>(CountChars(p.text))};
    last_chars = {last_char(p.text)};
    steps = {{p.id, ConnectionClass::kDirect}};
    dfs(p.text, 0.0);
    used[m] = false;
  }
  return result;
}

}  // namespace cilyric::oracle
