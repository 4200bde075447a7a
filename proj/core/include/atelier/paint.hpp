#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace atelier::paint {

enum class PaintMode { style_transfer, finetuned };

std::string_view to_string(PaintMode mode);
PaintMode parse_paint_mode(std::string_view s);

/// Artifacts used by `paint`. Only those needed by the requested mode must exist.
struct PaintConfig {
  std::filesystem::path photo_checkpoint;      // style-transfer mode
  std::filesystem::path style_bank;            // style-transfer mode
  std::filesystem::path finetuned_checkpoint;  // finetuned mode

  nlohmann::json to_json() const;
  static PaintConfig from_json(const nlohmann::json& j, PaintConfig base);
  static PaintConfig from_json(const nlohmann::json& j) { return from_json(j, PaintConfig()); }
};

struct PaintRequest {
  std::string prompt;
  PaintMode mode = PaintMode::style_transfer;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

struct PaintResult {
  std::filesystem::path image;
  std::filesystem::path sidecar;
  std::optional<std::string> style_id;
  nlohmann::json metadata;
};

/// Sidecar path for an output image: "<out>.json".
std::filesystem::path sidecar_path(const std::filesystem::path& out);

/// Generates an image for `prompt` with the checkpoint of the requested mode;
/// in style-transfer mode the result is stylized with the bank entry whose
/// color histogram matches best. Writes the PNG and a JSON sidecar with
/// prompt, mode, seed, checkpoint, checkpoint_hash and style_id. The output is
/// a pure function of (prompt, mode, seed, artifacts).
PaintResult paint(const PaintRequest& request, const PaintConfig& config);

}  // namespace atelier::paint
