#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace atelier::dataset {

/// Token <-> id mapping. Ids are contiguous from 0; the four special tokens
/// occupy ids 0..3, and kept tokens follow in descending frequency with
/// lexicographic tie-break so that a vocabulary is a pure function of its
/// input captions.
class Vocabulary {
 public:
  static constexpr std::int64_t kPad = 0;
  static constexpr std::int64_t kUnk = 1;
  static constexpr std::int64_t kBos = 2;
  static constexpr std::int64_t kEos = 3;

  Vocabulary();

  /// `captions` are normalized caption strings (see text::normalize).
  static Vocabulary build(const std::vector<std::string>& captions, int min_freq = 1);

  std::int64_t id(std::string_view token) const;
  const std::string& token(std::int64_t id) const;
  bool contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  int min_freq() const { return min_freq_; }

  /// Maps tokens to ids, unknown tokens to kUnk.
  std::vector<std::int64_t> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::int64_t> encode_caption(std::string_view caption) const;

  /// Content hash identifying this vocabulary.
  std::string ref() const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int64_t> ids_;
  int min_freq_ = 1;
};

}  // namespace atelier::dataset
