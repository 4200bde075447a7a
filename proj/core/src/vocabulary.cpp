#include "atelier/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "atelier/error.hpp"
#include "atelier/hashing.hpp"
#include "atelier/text.hpp"

namespace atelier::dataset {

Vocabulary::Vocabulary() {
  for (const char* special : {"<pad>", "<unk>", "<bos>", "<eos>"}) add(special);
}

void Vocabulary::add(std::string token) {
  ids_.emplace(token, static_cast<std::int64_t>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(const std::vector<std::string>& captions, int min_freq) {
  if (min_freq < 1) throw Error("vocabulary min_freq must be >= 1");
  std::map<std::string, int> freq;
  for (const auto& c : captions) {
    for (auto& t : text::tokenize(c, SIZE_MAX)) ++freq[t];
  }
  std::vector<std::pair<std::string, int>> kept;
  for (auto& [tok, n] : freq) {
    if (n >= min_freq) kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  v.min_freq_ = min_freq;
  for (auto& [tok, n] : kept) {
    if (!v.contains(tok)) v.add(tok);
  }
  return v;
}

std::int64_t Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(std::int64_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw Error("token id out of range: " + std::to_string(id));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.find(std::string(token)) != ids_.end();
}

std::vector<std::int64_t> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<std::int64_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::int64_t> Vocabulary::encode_caption(std::string_view caption) const {
  return encode(text::tokenize(caption));
}

std::string Vocabulary::ref() const {
  std::string blob;
  for (const auto& t : tokens_) {
    blob += t;
    blob.push_back('\n');
  }
  return "vocab-" + sha256_hex(blob).substr(0, 16);
}

nlohmann::json Vocabulary::to_json() const {
  return {{"min_freq", min_freq_}, {"tokens", tokens_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  auto tokens = j.at("tokens").get<std::vector<std::string>>();
  if (tokens.size() < 4 || tokens[0] != "<pad>" || tokens[1] != "<unk>") {
    throw Error("vocabulary json is missing its special tokens");
  }
  Vocabulary v;
  v.min_freq_ = j.value("min_freq", 1);
  for (std::size_t i = 4; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw Error("vocabulary json has duplicate token " + tokens[i]);
    v.add(tokens[i]);
  }
  return v;
}

}  // namespace atelier::dataset
