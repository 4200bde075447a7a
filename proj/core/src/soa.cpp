#include "atelier/soa.hpp"

#include <algorithm>
#include <fstream>

#include "atelier/error.hpp"
#include "atelier/text.hpp"

namespace atelier::eval {
namespace {

bool token_matches(const std::string& token, const std::string& word, bool allow_plural) {
  if (token == word) return true;
  if (!allow_plural) return false;
  return token == word + "s" || token == word + "es";
}

struct Keyword {
  std::vector<std::string> words;
  std::string label;
};

}  // namespace

LabelMap label_map_from_json(const nlohmann::json& j) {
  LabelMap map;
  for (const auto& [label, synonyms] : j.items()) {
    auto& list = map[label];
    for (const auto& s : synonyms) list.push_back(text::normalize(s.get<std::string>(), SIZE_MAX));
  }
  return map;
}

LabelMap load_label_map(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open label map " + file.string());
  try {
    return label_map_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid label map " + file.string() + ": " + e.what());
  }
}

std::set<std::string> extract_target_labels(const std::vector<std::string>& tokens,
                                            const LabelMap& label_map) {
  std::vector<Keyword> keywords;
  for (const auto& [label, synonyms] : label_map) {
    for (const auto& s : synonyms) keywords.push_back({text::tokenize(s, SIZE_MAX), label});
  }
  std::erase_if(keywords, [](const Keyword& k) { return k.words.empty(); });
  std::stable_sort(keywords.begin(), keywords.end(),
                   [](const Keyword& a, const Keyword& b) { return a.words.size() > b.words.size(); });

  std::set<std::string> found;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t advance = 1;
    for (const auto& k : keywords) {
      const std::size_t n = k.words.size();
      if (i + n > tokens.size()) continue;
      bool ok = true;
      for (std::size_t w = 0; w < n && ok; ++w) {
        ok = token_matches(tokens[i + w], k.words[w], w + 1 == n);
      }
      if (ok) {
        found.insert(k.label);
        advance = n;
        break;
      }
    }
    i += advance;
  }
  return found;
}

nlohmann::json SOAReport::to_json() const {
  nlohmann::ordered_json classes = nlohmann::ordered_json::object();
  for (const auto& [label, s] : per_class) {
    classes[label] = {{"images_evaluated", s.images_evaluated},
                      {"images_containing", s.images_containing},
                      {"rate", s.rate()}};
  }
  nlohmann::ordered_json j;
  j["metric"] = "soa";
  j["overall"] = overall;
  j["n_records"] = records_evaluated + records_excluded;
  j["n_evaluated"] = records_evaluated;
  j["n_excluded"] = records_excluded;
  j["threshold"] = threshold;
  j["per_class"] = classes;
  return j;
}

SOAReport soa(std::span<const SoaRecord> records, Detector& detector, const LabelMap& label_map,
              double threshold) {
  SOAReport report;
  report.threshold = threshold;
  for (const auto& r : records) {
    const auto targets = extract_target_labels(text::tokenize(r.caption, SIZE_MAX), label_map);
    if (targets.empty()) {
      ++report.records_excluded;
      continue;
    }
    std::vector<Detection> detections;
    try {
      detections = detector.detect(r.image);
    } catch (const std::exception& e) {
      throw Error("detector " + detector.id() + " failed on " + r.image.string() + ": " + e.what());
    }
    std::set<std::string> present;
    for (const auto& d : detections) {
      if (d.confidence >= threshold) present.insert(d.label);
    }
    ++report.records_evaluated;
    for (const auto& c : targets) {
      auto& s = report.per_class[c];
      ++s.images_evaluated;
      if (present.count(c)) ++s.images_containing;
    }
  }
  if (report.records_evaluated == 0) throw Error("soa: no record has a mappable target class");
  double sum = 0.0;
  for (const auto& [label, s] : report.per_class) sum += s.rate();
  report.overall = sum / static_cast<double>(report.per_class.size());
  return report;
}

}  // namespace atelier::eval
