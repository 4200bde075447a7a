#include "atelier/text.hpp"

#include <cctype>

namespace atelier::text {

std::vector<std::string> tokenize(std::string_view caption, std::size_t max_len) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      if (tokens.size() < max_len) tokens.push_back(std::move(current));
      current.clear();
    }
  };
  for (char raw : caption) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c) && c != '\'') {
      // Punctuation separates tokens ("red,blue" -> "red blue").
      flush();
    } else {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    }
  }
  flush();
  return tokens;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string normalize(std::string_view caption, std::size_t max_len) {
  return join(tokenize(caption, max_len));
}

}  // namespace atelier::text
