#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace atelier::text {

inline constexpr std::size_t kMaxCaptionLen = 18;

/// Lowercases, strips punctuation except apostrophes, splits on whitespace and
/// truncates to `max_len` tokens.
std::vector<std::string> tokenize(std::string_view caption, std::size_t max_len = kMaxCaptionLen);

/// Tokens joined with single spaces; the canonical stored form of a caption.
std::string normalize(std::string_view caption, std::size_t max_len = kMaxCaptionLen);

std::string join(const std::vector<std::string>& tokens);

}  // namespace atelier::text
