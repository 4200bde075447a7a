#include "atelier/checkpoint.hpp"

#include <fstream>

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

#include "atelier/error.hpp"
#include "atelier/hashing.hpp"

namespace atelier::training {
namespace fs = std::filesystem;

namespace {

constexpr const char* kMeta = "meta.json";
constexpr const char* kFiles[] = {"config.json",       "vocab.json",     "text_encoder.pt",
                                  "generator.pt",      "discriminator.pt", "region_encoder.pt",
                                  "optimizer_g.pt",    "optimizer_d.pt", "rng.pt"};

void write_json(const fs::path& file, const nlohmann::json& j) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read " + file.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt checkpoint file " + file.string() + ": " + e.what());
  }
}

template <typename Holder>
void load_module(Holder& module, const fs::path& file) {
  try {
    torch::load(module, file.string());
  } catch (const c10::Error& e) {
    throw Error("cannot load " + file.string() + ": " + e.what_without_backtrace());
  }
}

}  // namespace

T2IModel T2IModel::create(ModelConfig config, dataset::Vocabulary vocab) {
  config.vocab_size = static_cast<std::int64_t>(vocab.size());
  T2IModel m;
  m.config = config;
  m.vocab = std::move(vocab);
  m.text = textenc::TextEncoder(
      textenc::TextEncoderOptions{config.vocab_size, config.embed_dim, config.hidden});
  const auto cond = m.text->output_dim();
  m.generator = t2i::Generator(
      t2i::GeneratorOptions{config.noise_dim, cond, config.gen_channels, config.out_res});
  m.discriminator =
      t2i::Discriminator(t2i::DiscriminatorOptions{config.disc_channels, cond, config.out_res});
  m.regions = t2i::RegionEncoder(cond, config.out_res, config.region_channels);
  return m;
}

std::vector<torch::Tensor> T2IModel::generator_side_parameters() const {
  std::vector<torch::Tensor> params = generator->parameters();
  for (auto& p : text->parameters()) params.push_back(p);
  for (auto& p : regions->parameters()) params.push_back(p);
  return params;
}

void T2IModel::set_training(bool on) {
  text->train(on);
  generator->train(on);
  discriminator->train(on);
  regions->train(on);
}

std::vector<std::int64_t> T2IModel::encode_text(const std::string& caption) const {
  return vocab.encode_caption(caption);
}

fs::path checkpoint_dir(const fs::path& run_dir, std::int64_t epoch) {
  return run_dir / ("ckpt_epoch_" + std::to_string(epoch));
}

Checkpoint write_checkpoint(const fs::path& directory, std::int64_t epoch, std::int64_t step,
                            const TrainConfig& config, const T2IModel& model,
                            torch::optim::Optimizer& opt_g, torch::optim::Optimizer& opt_d,
                            const at::Generator& rng) {
  // Written next to the destination and renamed, so a crash never leaves a
  // half-written checkpoint under the final name.
  const fs::path tmp = directory.parent_path() / (directory.filename().string() + ".partial");
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  TrainConfig snapshot = config;
  snapshot.model = model.config;
  write_json(tmp / "config.json", snapshot.to_json());
  write_json(tmp / "vocab.json", model.vocab.to_json());
  torch::save(model.text, (tmp / "text_encoder.pt").string());
  torch::save(model.generator, (tmp / "generator.pt").string());
  torch::save(model.discriminator, (tmp / "discriminator.pt").string());
  torch::save(model.regions, (tmp / "region_encoder.pt").string());
  torch::save(opt_g, (tmp / "optimizer_g.pt").string());
  torch::save(opt_d, (tmp / "optimizer_d.pt").string());
  torch::save(rng.get_state(), (tmp / "rng.pt").string());

  nlohmann::json files = nlohmann::json::object();
  for (const char* name : kFiles) files[name] = sha256_file(tmp / name);
  write_json(tmp / kMeta, {{"epoch", epoch}, {"step", step}, {"files", files}});

  fs::remove_all(directory);
  fs::rename(tmp, directory);
  return resume(directory);
}

Checkpoint resume(const fs::path& directory) {
  if (!fs::is_directory(directory)) throw Error("checkpoint not found: " + directory.string());
  const fs::path meta_file = directory / kMeta;
  if (!fs::is_regular_file(meta_file)) {
    throw Error("corrupt checkpoint " + directory.string() + ": missing " + kMeta);
  }
  const auto meta = read_json(meta_file);
  std::string digest_input;
  try {
    for (const char* name : kFiles) {
      const fs::path file = directory / name;
      const std::string expected = meta.at("files").at(name).get<std::string>();
      if (!fs::is_regular_file(file) || sha256_file(file) != expected) {
        throw Error("corrupt checkpoint " + directory.string() + ": " + name + " failed its integrity check");
      }
      digest_input += std::string(name) + "=" + expected + "\n";
    }
    Checkpoint c;
    c.epoch = meta.at("epoch").get<std::int64_t>();
    c.step = meta.at("step").get<std::int64_t>();
    c.directory = directory;
    c.config = TrainConfig::from_json(read_json(directory / "config.json"));
    c.hash = sha256_hex(digest_input);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error("corrupt checkpoint " + directory.string() + ": " + e.what());
  }
}

void require_compatible(const ModelConfig& wanted, const Checkpoint& checkpoint) {
  if (!wanted.architecture_equals(checkpoint.config.model)) {
    throw Error("incompatible checkpoint " + checkpoint.directory.string() + ": architecture " +
                checkpoint.config.model.to_json().dump() + " vs configured " + wanted.to_json().dump());
  }
}

T2IModel load_model(const Checkpoint& checkpoint) {
  auto vocab = dataset::Vocabulary::from_json(read_json(checkpoint.directory / "vocab.json"));
  auto model = T2IModel::create(checkpoint.config.model, std::move(vocab));
  load_module(model.text, checkpoint.directory / "text_encoder.pt");
  load_module(model.generator, checkpoint.directory / "generator.pt");
  load_module(model.discriminator, checkpoint.directory / "discriminator.pt");
  load_module(model.regions, checkpoint.directory / "region_encoder.pt");
  return model;
}

void load_optimizers(const Checkpoint& checkpoint, torch::optim::Optimizer& opt_g,
                     torch::optim::Optimizer& opt_d) {
  torch::load(opt_g, (checkpoint.directory / "optimizer_g.pt").string());
  torch::load(opt_d, (checkpoint.directory / "optimizer_d.pt").string());
}

at::Generator load_rng(const Checkpoint& checkpoint) {
  torch::Tensor state;
  torch::load(state, (checkpoint.directory / "rng.pt").string());
  auto gen = at::make_generator<at::CPUGeneratorImpl>();
  gen.set_state(state);
  return gen;
}

}  // namespace atelier::training
