#include "atelier/style_bank.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

#include "atelier/error.hpp"
#include "atelier/image_io.hpp"

namespace atelier::style {
namespace fs = std::filesystem;

StyleTrainConfig StyleTrainConfig::toy() {
  StyleTrainConfig c;
  c.steps = 200;
  c.batch_size = 4;
  c.image_size = 64;
  c.net.channels = 8;
  c.net.residual_blocks = 2;
  return c;
}

nlohmann::json StyleTrainConfig::to_json() const {
  return {{"steps", steps},
          {"batch_size", batch_size},
          {"image_size", image_size},
          {"lr", lr},
          {"content_weight", weights.content},
          {"style_weight", weights.style},
          {"tv_weight", weights.tv},
          {"net", net.to_json()},
          {"seed", seed},
          {"extractor", extractor},
          {"bins_per_channel", bins_per_channel},
          {"divergence_window", divergence_window},
          {"divergence_factor", divergence_factor}};
}

StyleTrainConfig StyleTrainConfig::from_json(const nlohmann::json& j, StyleTrainConfig c) {
  if (j.value("preset", std::string()) == "toy") c = toy();
  c.steps = j.value("steps", c.steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.image_size = j.value("image_size", c.image_size);
  c.lr = j.value("lr", c.lr);
  c.weights.content = j.value("content_weight", c.weights.content);
  c.weights.style = j.value("style_weight", c.weights.style);
  c.weights.tv = j.value("tv_weight", c.weights.tv);
  if (j.contains("net")) c.net = TransformNetOptions::from_json(j.at("net"));
  c.seed = j.value("seed", c.seed);
  c.extractor = j.value("extractor", c.extractor);
  c.bins_per_channel = j.value("bins_per_channel", c.bins_per_channel);
  c.divergence_window = j.value("divergence_window", c.divergence_window);
  c.divergence_factor = j.value("divergence_factor", c.divergence_factor);
  return c;
}

StyleModel train_style_model(const std::string& style_id, const torch::Tensor& style_image,
                             const torch::Tensor& content, const StyleTrainConfig& config,
                             FeatureExtractor& extractor) {
  if (!content.defined() || content.dim() != 4 || content.size(0) == 0) {
    throw Error("style training needs a nonempty content set");
  }
  if (style_image.dim() != 3 || style_image.size(0) != 3) {
    throw Error("style image must be 3 x H x W");
  }
  if (config.steps < 0 || config.batch_size < 1) throw Error("invalid style training config");

  torch::manual_seed(config.seed);
  TransformNet net(config.net);
  net->train();

  StyleGrams targets;
  {
    torch::NoGradGuard no_grad;
    auto style = torch::nn::functional::interpolate(
        style_image.unsqueeze(0),
        torch::nn::functional::InterpolateFuncOptions()
            .size(std::vector<std::int64_t>{config.image_size, config.image_size})
            .mode(torch::kBilinear)
            .align_corners(false));
    targets = style_grams(extractor, style);
  }

  auto rng = at::make_generator<at::CPUGeneratorImpl>(config.seed ^ 0x5354594cULL);
  torch::optim::Adam opt(net->parameters(), torch::optim::AdamOptions(config.lr));
  const std::int64_t n = content.size(0);
  const std::int64_t batch = std::min(config.batch_size, n);

  double initial = 0.0;
  std::int64_t above = 0;
  for (std::int64_t step = 0; step < config.steps; ++step) {
    auto idx = torch::randperm(n, rng, torch::kLong).slice(0, 0, batch);
    auto x = content.index_select(0, idx);
    auto losses = perceptual_losses(net->forward(x), x, targets, extractor, config.weights);
    const double total = losses.total.item<double>();
    if (!std::isfinite(total)) {
      throw Error("style training for '" + style_id + "' produced a non-finite loss at step " +
                  std::to_string(step));
    }
    if (step == 0) initial = total;
    above = total > config.divergence_factor * initial ? above + 1 : 0;
    if (above >= config.divergence_window) {
      throw Error("style training for '" + style_id + "' diverged at step " +
                  std::to_string(step));
    }
    opt.zero_grad();
    losses.total.backward();
    opt.step();
  }
  net->eval();
  return StyleModel{style_id, net, config.to_json()};
}

torch::Tensor load_content_batch(const dataset::Manifest& manifest, std::int64_t side) {
  std::vector<torch::Tensor> images;
  images.reserve(manifest.size());
  for (const auto& r : manifest.records()) {
    images.push_back(image::to_tensor(image::load_rgb(manifest.resolve(r)), static_cast<int>(side)));
  }
  if (images.empty()) return {};
  return torch::stack(images);
}

StyleModel train_style_model(const fs::path& style_image, const dataset::Manifest& content_manifest,
                             const StyleTrainConfig& config, FeatureExtractor& extractor) {
  if (content_manifest.empty()) throw Error("content manifest is empty");
  auto style = image::to_tensor(image::load_rgb(style_image));
  return train_style_model(style_image.stem().string(), style,
                           load_content_batch(content_manifest, config.image_size), config,
                           extractor);
}

torch::Tensor stylize(const torch::Tensor& image, const StyleModel& model) {
  if (image.dim() != 3 || image.size(0) != 3) {
    throw Error("stylize expects a 3-channel image, got shape " + c10::str(image.sizes()));
  }
  if (image.size(1) < 32 || image.size(2) < 32) throw Error("stylize needs images of side >= 32");
  torch::NoGradGuard no_grad;
  auto net = model.net;
  return net->forward(image.to(torch::kFloat32).unsqueeze(0)).squeeze(0);
}

cv::Mat stylize(const cv::Mat& rgb, const StyleModel& model) {
  if (rgb.channels() != 3) throw Error("stylize expects a 3-channel image");
  return image::from_tensor(stylize(image::to_tensor(rgb), model));
}

namespace {

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing style bank file: " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed " + path.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<StyleBankEntry> build_style_bank(const std::vector<fs::path>& style_images,
                                             const dataset::Manifest& content_manifest,
                                             const StyleTrainConfig& config,
                                             const fs::path& out_dir) {
  if (style_images.empty()) throw Error("style bank needs at least one style image");
  if (content_manifest.empty()) throw Error("content manifest is empty");

  std::set<std::string> ids;
  for (const auto& p : style_images) {
    if (!ids.insert(p.stem().string()).second) {
      throw Error("duplicate style_id: " + p.stem().string());
    }
  }

  auto extractor = make_style_extractor(config.extractor);
  auto content = load_content_batch(content_manifest, config.image_size);
  fs::create_directories(out_dir);

  std::vector<StyleBankEntry> bank;
  std::vector<std::string> failed;
  for (const auto& path : style_images) {
    const std::string id = path.stem().string();
    try {
      auto rgb = image::load_rgb(path);
      auto model = std::make_shared<StyleModel>(
          train_style_model(id, image::to_tensor(rgb), content, config, *extractor));
      auto hist = styleselect::color_histogram(rgb, config.bins_per_channel);

      const auto dir = out_dir / id;
      fs::create_directories(dir);
      torch::save(model->net, (dir / "model.bin").string());
      image::save_rgb(dir / "style.png", rgb);
      write_json(dir / "hist.json", hist.to_json());
      bank.push_back({id, std::move(hist), dir / "style.png", std::move(model)});
    } catch (const std::exception& e) {
      failed.push_back(id + " (" + e.what() + ")");
    }
  }
  if (!failed.empty()) {
    std::string msg = "style bank build failed for:";
    for (const auto& f : failed) msg += " " + f + ";";
    throw Error(msg);
  }

  nlohmann::json styles = nlohmann::json::array();
  for (const auto& e : bank) styles.push_back(e.style_id);
  write_json(out_dir / "index.json",
             {{"styles", styles}, {"config", config.to_json()}, {"net", config.net.to_json()}});
  return bank;
}

std::vector<StyleBankEntry> load_style_bank(const fs::path& bank_dir) {
  const auto index = read_json(bank_dir / "index.json");
  const auto options = TransformNetOptions::from_json(index.at("net"));
  std::vector<StyleBankEntry> bank;
  for (const auto& id_json : index.at("styles")) {
    const auto id = id_json.get<std::string>();
    const auto dir = bank_dir / id;
    const auto model_path = dir / "model.bin";
    if (!fs::exists(model_path)) throw Error("missing style bank file: " + model_path.string());
    auto model = std::make_shared<StyleModel>();
    model->style_id = id;
    model->net = TransformNet(options);
    torch::load(model->net, model_path.string());
    model->net->eval();
    model->config = index.value("config", nlohmann::json::object());
    bank.push_back({id, styleselect::ColorHistogram::from_json(read_json(dir / "hist.json")),
                    dir / "style.png", std::move(model)});
  }
  if (bank.empty()) throw Error("style bank at " + bank_dir.string() + " is empty");
  return bank;
}

const StyleBankEntry& find_style(std::span<const StyleBankEntry> bank, const std::string& style_id) {
  for (const auto& e : bank) {
    if (e.style_id == style_id) return e;
  }
  throw Error("unknown style_id: " + style_id);
}

}  // namespace atelier::style
