#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace atelier::eval {

/// class -> keywords/synonyms (possibly multi-word, e.g. "teddy bear"). Only
/// the listed keywords match; the class name itself is not implied, so a
/// class like "orange" can avoid firing on the colour adjective.
using LabelMap = std::map<std::string, std::vector<std::string>>;

LabelMap load_label_map(const std::filesystem::path& file);
LabelMap label_map_from_json(const nlohmann::json& j);

/// Classes whose keyword occurs in `tokens`. Trailing "s"/"es" plurals match,
/// and longer keywords win over their sub-phrases ("teddy bear" does not also
/// yield "bear").
std::set<std::string> extract_target_labels(const std::vector<std::string>& tokens,
                                            const LabelMap& label_map);

struct Detection {
  std::string label;
  double confidence = 0.0;
  std::array<double, 4> box{};  // x0, y0, x1, y1
};

class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::vector<Detection> detect(const std::filesystem::path& image) = 0;
  virtual std::string id() const = 0;
};

struct SoaRecord {
  std::filesystem::path image;
  std::string caption;
};

struct ClassStats {
  std::size_t images_evaluated = 0;
  std::size_t images_containing = 0;
  double rate() const {
    return images_evaluated == 0 ? 0.0
                                 : static_cast<double>(images_containing) /
                                       static_cast<double>(images_evaluated);
  }
  friend bool operator==(const ClassStats&, const ClassStats&) = default;
};

struct SOAReport {
  std::map<std::string, ClassStats> per_class;
  double overall = 0.0;  // unweighted mean of per-class rates
  std::size_t records_evaluated = 0;
  std::size_t records_excluded = 0;  // captions without a mappable class
  double threshold = 0.5;

  nlohmann::json to_json() const;
};

inline constexpr double kDefaultDetectionThreshold = 0.5;

SOAReport soa(std::span<const SoaRecord> records, Detector& detector, const LabelMap& label_map,
              double threshold = kDefaultDetectionThreshold);

}  // namespace atelier::eval
