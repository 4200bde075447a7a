#include "atelier/paint.hpp"

#include <fstream>

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

#include "atelier/checkpoint.hpp"
#include "atelier/color_histogram.hpp"
#include "atelier/error.hpp"
#include "atelier/image_io.hpp"
#include "atelier/style_bank.hpp"
#include "atelier/text.hpp"

namespace atelier::paint {
namespace fs = std::filesystem;

std::string_view to_string(PaintMode mode) {
  return mode == PaintMode::style_transfer ? "style-transfer" : "finetuned";
}

PaintMode parse_paint_mode(std::string_view s) {
  if (s == "style-transfer") return PaintMode::style_transfer;
  if (s == "finetuned") return PaintMode::finetuned;
  throw Error("unknown paint mode '" + std::string(s) + "' (expected style-transfer|finetuned)");
}

nlohmann::json PaintConfig::to_json() const {
  return {{"photo_checkpoint", photo_checkpoint.string()},
          {"style_bank", style_bank.string()},
          {"finetuned_checkpoint", finetuned_checkpoint.string()}};
}

PaintConfig PaintConfig::from_json(const nlohmann::json& j, PaintConfig c) {
  c.photo_checkpoint = j.value("photo_checkpoint", c.photo_checkpoint.string());
  c.style_bank = j.value("style_bank", c.style_bank.string());
  c.finetuned_checkpoint = j.value("finetuned_checkpoint", c.finetuned_checkpoint.string());
  return c;
}

fs::path sidecar_path(const fs::path& out) { return fs::path(out.string() + ".json"); }

namespace {

void require_artifact(const fs::path& path, const std::string& what) {
  if (path.empty()) throw Error("missing " + what + ": no path configured");
  if (!fs::exists(path)) throw Error("missing " + what + ": " + path.string());
}

}  // namespace

PaintResult paint(const PaintRequest& request, const PaintConfig& config) {
  const std::string prompt = text::normalize(request.prompt);
  if (prompt.empty()) throw Error("prompt is empty");
  if (request.out.empty()) throw Error("no output path given");

  const bool stylizing = request.mode == PaintMode::style_transfer;
  const auto checkpoint_path = stylizing ? config.photo_checkpoint : config.finetuned_checkpoint;
  require_artifact(checkpoint_path, stylizing ? "photo checkpoint" : "fine-tuned checkpoint");
  if (stylizing) require_artifact(config.style_bank / "index.json", "style bank");

  const auto checkpoint = training::resume(checkpoint_path);
  auto model = training::load_model(checkpoint);
  model.set_training(false);

  torch::Tensor generated;
  {
    torch::NoGradGuard no_grad;
    auto embedding = textenc::encode_caption(model.encode_text(prompt), model.text);
    auto rng = at::make_generator<at::CPUGeneratorImpl>(request.seed);
    auto z = torch::randn({model.config.noise_dim}, rng);
    generated = t2i::generate(model.generator, z, embedding);
  }
  cv::Mat image = image::from_tensor(generated);

  std::optional<std::string> style_id;
  if (stylizing) {
    const auto bank = style::load_style_bank(config.style_bank);
    const auto& chosen =
        styleselect::select_style(image, std::span<const style::StyleBankEntry>(bank));
    style_id = chosen.style_id;
    image = style::stylize(image, *chosen.model);
  }

  if (request.out.has_parent_path()) fs::create_directories(request.out.parent_path());
  image::save_rgb(request.out, image);

  nlohmann::ordered_json meta;
  meta["prompt"] = request.prompt;
  meta["normalized_prompt"] = prompt;
  meta["mode"] = to_string(request.mode);
  meta["seed"] = request.seed;
  meta["checkpoint"] = checkpoint.directory.string();
  meta["checkpoint_hash"] = checkpoint.hash;
  meta["style_bank"] = stylizing ? config.style_bank.string() : std::string();
  meta["style_id"] = style_id ? nlohmann::ordered_json(*style_id) : nlohmann::ordered_json(nullptr);
  meta["width"] = image.cols;
  meta["height"] = image.rows;

  const auto sidecar = sidecar_path(request.out);
  std::ofstream out(sidecar);
  if (!out) throw Error("cannot write " + sidecar.string());
  out << meta.dump(2) << '\n';
  return {request.out, sidecar, style_id, nlohmann::json(meta)};
}

}  // namespace atelier::paint
