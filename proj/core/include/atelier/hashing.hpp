#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace atelier {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// First eight digest bytes as an integer; stable across platforms.
std::uint64_t stable_hash64(std::string_view bytes);

}  // namespace atelier
