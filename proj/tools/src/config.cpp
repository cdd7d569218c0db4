#include "config.h"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "cilyric/error.h"

namespace cilyric::cli {

const std::vector<ConfigKey>& ConfigKeys() {
  static const std::vector<ConfigKey> keys = {
      {"corpus", "data/toy/corpus.jsonl", "lyrics corpus JSONL"},
      {"trees", "data/toy/trees.jsonl", "semantic trees JSONL"},
      {"phrases", "artifacts/phrases.jsonl", "phrase database JSONL"},
      {"structures", "artifacts/structures.json", "rhythmic -> structure table"},
      {"structure_overrides", "", "optional structure table applied over the derived one"},
      {"provider", "builtin", "embedding provider: builtin | file"},
      {"embedder", "artifacts/embedder.json", "fitted built-in embedder"},
      {"embeddings", "artifacts/sentences.emb", "sentence embedding file"},
      {"embedding_dim", "256", "built-in embedder dimension"},
      {"rhymes", "data/rhyme/default.tsv", "rhyme table TSV"},
      {"npp_dataset", "artifacts/npp.jsonl", "NPP dataset JSONL"},
      {"npp_samples", "2000", "NPP dataset size"},
      {"npp_other_fraction", "0.25", "share of OTHER samples in the NPP dataset"},
      {"scorer_model", "artifacts/scorer.json", "built-in scorer model"},
      {"smoothing", "1.0", "scorer add-k smoothing"},
      {"history_window", "30", "scorer history window (characters)"},
      {"scorer", "builtin", "fluency scorer: builtin | external:host:port"},
      {"scorer_timeout_ms", "5000", "external scorer timeout"},
      {"M", "10", "retrieval interval count"},
      {"L", "200", "retrieval interval size"},
      {"N", "30", "phrases drawn per interval"},
      {"alpha", "1.0", "fluency weight"},
      {"beta", "1.0", "structure weight"},
      {"gamma", "1.0", "rhyme weight"},
      {"beam", "16", "beam width, or inf"},
      {"seed", "0", "seed for every random choice"},
      {"topic", "", "topic text"},
      {"rhythmic", "", "rhythmic (Cipai) name"},
      {"prompts", "data/toy/prompts.jsonl", "prompt set JSONL"},
      {"out", "artifacts/report.csv", "evaluation CSV"},
      {"log_level", "info", "trace | debug | info | warn | error | off"},
  };
  return keys;
}

namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void Bad(std::string_view source, std::size_t line, const std::string& what) {
  throw Error(ErrorCategory::kConfig, std::string(source) + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

Config::Config() {
  for (const auto& k : ConfigKeys()) values_.emplace(k.name, k.default_value);
}

void Config::Parse(std::istream& in, std::string_view source) {
  std::set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) Bad(source, line_no, "expected key = value");
    const std::string key = Trim(std::string_view(line).substr(0, eq));
    std::string rest = Trim(std::string_view(line).substr(eq + 1));
    if (values_.find(key) == values_.end()) Bad(source, line_no, "unknown key '" + key + "'");
    if (!seen.insert(key).second) Bad(source, line_no, "key '" + key + "' repeated");
    std::string value;
    if (!rest.empty() && rest.front() == '"') {
      std::size_t i = 1;
      bool closed = false;
      for (; i < rest.size(); ++i) {
        if (rest[i] == '\\' && i + 1 < rest.size() && (rest[i + 1] == '"' || rest[i + 1] == '\\')) {
          value += rest[++i];
        } else if (rest[i] == '"') {
          closed = true;
          break;
        } else {
          value += rest[i];
        }
      }
      if (!closed) Bad(source, line_no, "unterminated string");
      const std::string tail = Trim(std::string_view(rest).substr(i + 1));
      if (!tail.empty() && tail.front() != '#') Bad(source, line_no, "text after quoted value");
    } else {
      const auto hash = rest.find(" #");
      value = Trim(hash == std::string::npos ? rest : rest.substr(0, hash));
      if (value == "#" || (!value.empty() && value.front() == '#')) value.clear();
    }
    values_[key] = value;
  }
}

void Config::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCategory::kMissingArtifact, "config file not found: " + path.string());
  }
  if (!in) throw Error(ErrorCategory::kIo, "cannot open " + path.string());
  Parse(in, path.string());
}

void Config::Set(std::string_view key, std::string value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCategory::kConfig, "unknown key '" + std::string(key) + "'");
  it->second = std::move(value);
}

const std::string& Config::Get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCategory::kConfig, "unknown key '" + std::string(key) + "'");
  return it->second;
}

std::uint64_t Config::UInt(std::string_view key) const {
  const std::string& v = Get(key);
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE || v.front() == '-') {
    throw Error(ErrorCategory::kConfig, std::string(key) + " must be a non-negative integer, got '" + v + "'");
  }
  return x;
}

std::size_t Config::Count(std::string_view key) const {
  const auto x = UInt(key);
  if (x == 0) throw Error(ErrorCategory::kConfig, std::string(key) + " must be positive");
  return static_cast<std::size_t>(x);
}

double Config::Real(std::string_view key) const {
  const std::string& v = Get(key);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(x)) {
    throw Error(ErrorCategory::kConfig, std::string(key) + " must be a finite number, got '" + v + "'");
  }
  return x;
}

SamplingParams Config::Sampling() const {
  SamplingParams p{Count("M"), Count("L"), Count("N")};
  p.Validate();
  return p;
}

LossWeights Config::Weights() const {
  LossWeights w{Real("alpha"), Real("beta"), Real("gamma")};
  w.Validate();
  return w;
}

std::size_t Config::BeamWidth() const {
  if (Get("beam") == "inf") return kUnboundedBeam;
  return Count("beam");
}

void Config::Validate() const {
  Sampling();
  Weights();
  BeamWidth();
  UInt("seed");
  Count("embedding_dim");
  Count("npp_samples");
  Count("history_window");
  Count("scorer_timeout_ms");
  const double f = Real("npp_other_fraction");
  if (f < 0.0 || f >= 1.0) throw Error(ErrorCategory::kConfig, "npp_other_fraction must be in [0, 1)");
  if (Real("smoothing") <= 0.0) throw Error(ErrorCategory::kConfig, "smoothing must be positive");
  const std::string& provider = Get("provider");
  if (provider != "builtin" && provider != "file") {
    throw Error(ErrorCategory::kConfig, "provider must be builtin or file, got '" + provider + "'");
  }
  const std::string& scorer = Get("scorer");
  if (scorer != "builtin" && scorer.rfind("external:", 0) != 0) {
    throw Error(ErrorCategory::kConfig, "scorer must be builtin or external:host:port, got '" + scorer + "'");
  }
  static const std::set<std::string> levels{"trace", "debug", "info", "warn", "error", "off"};
  if (levels.count(Get("log_level")) == 0) {
    throw Error(ErrorCategory::kConfig, "unknown log_level '" + Get("log_level") + "'");
  }
}

}  // namespace cilyric::cli
