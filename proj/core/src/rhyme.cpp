#include "cilyric/rhyme.h"

#include <algorithm>
#include <map>

#include "cilyric/error.h"
#include "cilyric/utf8.h"
#include "io_util.h"

namespace cilyric {

RhymeTable RhymeTable::FromPairs(std::span<const std::pair<std::string, std::string>> pairs) {
  RhymeTable table;
  table.labels_.clear();
  std::map<std::string, RhymeClass> ids;
  for (const auto& [ch, label] : pairs) {
    if (utf8::Length(ch) != 1) throw Error(ErrorCategory::kSchema, "rhyme key '" + ch + "' is not one character");
    if (label.empty() || label == "UNKNOWN") throw Error(ErrorCategory::kSchema, "invalid rhyme label for '" + ch + "'");
    auto [it, fresh] = ids.emplace(label, static_cast<RhymeClass>(table.labels_.size()));
    if (fresh) table.labels_.push_back(label);
    table.map_.insert_or_assign(ch, it->second);
  }
  table.labels_.emplace_back("UNKNOWN");
  return table;
}

RhymeTable RhymeTable::ParseTsv(std::istream& in, std::string_view source) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::IsBlank(line) || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCategory::kSchema, std::string(source) + ":" + std::to_string(line_no) + ": expected <char>\\t<class>");
    }
    pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  try {
    return FromPairs(pairs);
  } catch (const Error& e) {
    throw Error(e.category(), std::string(source) + ": " + e.what());
  }
}

RhymeTable RhymeTable::Load(const std::filesystem::path& path) {
  auto in = detail::OpenInput(path);
  return ParseTsv(in, path.string());
}

RhymeClass RhymeTable::ClassOf(std::string_view character) const {
  auto it = map_.find(std::string(character));
  return it == map_.end() ? unknown_class() : it->second;
}

double RhymeDispersion(std::span<const RhymeClass> classes, std::size_t class_count) {
  const std::size_t n = classes.size();
  if (n <= 1 || class_count <= 1) return 0.0;
  std::map<RhymeClass, std::size_t> counts;
  for (RhymeClass c : classes) ++counts[c];
  double sum_sq = 0.0;
  for (const auto& [_, k] : counts) sum_sq += static_cast<double>(k * k);
  const double nn = static_cast<double>(n * n);
  const double dispersion = 1.0 - sum_sq / nn;

  const std::size_t m = std::min(n, class_count);
  const std::size_t q = n / m;
  const std::size_t extra = n % m;
  const double even_sq = static_cast<double>(extra * (q + 1) * (q + 1) + (m - extra) * q * q);
  const double max_dispersion = 1.0 - even_sq / nn;
  if (max_dispersion <= 0.0) return 0.0;
  return std::clamp(dispersion / max_dispersion, 0.0, 1.0);
}

}  // namespace cilyric
