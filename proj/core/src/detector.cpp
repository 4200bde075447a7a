#include "atelier/detector.hpp"

#include <fstream>

#include "atelier/error.hpp"
#include "shell.hpp"

namespace atelier::eval {
namespace {

Detection detection_from_json(const nlohmann::json& j) {
  Detection d;
  d.label = j.at("label").get<std::string>();
  d.confidence = j.at("confidence").get<double>();
  if (j.contains("box")) d.box = j.at("box").get<std::array<double, 4>>();
  return d;
}

std::vector<Detection> detections_from_json(const nlohmann::json& arr) {
  std::vector<Detection> out;
  for (const auto& d : arr) out.push_back(detection_from_json(d));
  return out;
}

}  // namespace

SaturatingDetector::SaturatingDetector(const LabelMap& label_map) {
  for (const auto& [label, synonyms] : label_map) all_.push_back({label, 1.0, {}});
}

std::vector<Detection> SaturatingDetector::detect(const std::filesystem::path&) { return all_; }

FixtureDetector::FixtureDetector(std::map<std::string, std::vector<Detection>> table)
    : table_(std::move(table)) {}

FixtureDetector::FixtureDetector(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open detector fixture " + file.string());
  const auto j = nlohmann::json::parse(in);
  for (const auto& [key, arr] : j.items()) table_[key] = detections_from_json(arr);
}

std::vector<Detection> FixtureDetector::detect(const std::filesystem::path& image) {
  if (auto it = table_.find(image.filename().string()); it != table_.end()) return it->second;
  if (auto it = table_.find(image.generic_string()); it != table_.end()) return it->second;
  throw Error("no fixture detections for " + image.string());
}

std::vector<Detection> CommandDetector::detect(const std::filesystem::path& image) {
  return detections_from_json(nlohmann::json::parse(detail::run_command(command_, image.string())));
}

std::unique_ptr<Detector> make_detector(const std::string& spec, const LabelMap& label_map) {
  if (spec == "stub-all") return std::make_unique<SaturatingDetector>(label_map);
  if (spec.rfind("fixture:", 0) == 0) return std::make_unique<FixtureDetector>(spec.substr(8));
  if (spec.rfind("external:", 0) == 0) return std::make_unique<CommandDetector>(spec.substr(9));
  throw Error("unknown detector: " + spec);
}

}  // namespace atelier::eval
