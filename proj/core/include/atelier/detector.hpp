#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "atelier/soa.hpp"

namespace atelier::eval {

/// Reports every class of the label map at confidence 1.0.
class SaturatingDetector final : public Detector {
 public:
  explicit SaturatingDetector(const LabelMap& label_map);
  std::vector<Detection> detect(const std::filesystem::path& image) override;
  std::string id() const override { return "stub-all"; }

 private:
  std::vector<Detection> all_;
};

/// Replays detections from a JSON file {"<image file name>": [{label, confidence, box}]}.
/// Images missing from the fixture are detector failures.
class FixtureDetector final : public Detector {
 public:
  explicit FixtureDetector(const std::filesystem::path& file);
  explicit FixtureDetector(std::map<std::string, std::vector<Detection>> table);
  std::vector<Detection> detect(const std::filesystem::path& image) override;
  std::string id() const override { return "fixture"; }

 private:
  std::map<std::string, std::vector<Detection>> table_;
};

/// Runs `<command> <image>`; stdout must be a JSON array of detections.
class CommandDetector final : public Detector {
 public:
  explicit CommandDetector(std::string command) : command_(std::move(command)) {}
  std::vector<Detection> detect(const std::filesystem::path& image) override;
  std::string id() const override { return "external"; }

 private:
  std::string command_;
};

/// "stub-all" | "fixture:<file.json>" | "external:<command>".
std::unique_ptr<Detector> make_detector(const std::string& spec, const LabelMap& label_map);

}  // namespace atelier::eval
