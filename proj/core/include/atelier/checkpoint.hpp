#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <ATen/core/Generator.h>
#include <torch/nn.h>
#include <torch/optim/optimizer.h>

#include "atelier/damsm.hpp"
#include "atelier/discriminator.hpp"
#include "atelier/generator.hpp"
#include "atelier/text_encoder.hpp"
#include "atelier/train_config.hpp"
#include "atelier/vocabulary.hpp"

namespace atelier::training {

/// Every network trained together, plus the vocabulary the text encoder indexes.
struct T2IModel {
  ModelConfig config;
  dataset::Vocabulary vocab;
  textenc::TextEncoder text{nullptr};
  t2i::Generator generator{nullptr};
  t2i::Discriminator discriminator{nullptr};
  t2i::RegionEncoder regions{nullptr};

  /// Fresh weights drawn from the global torch RNG.
  static T2IModel create(ModelConfig config, dataset::Vocabulary vocab);

  /// Parameters updated by the generator step (generator, text encoder, region encoder).
  std::vector<torch::Tensor> generator_side_parameters() const;
  void set_training(bool on);

  /// Token ids of a free-text caption under this model's vocabulary.
  std::vector<std::int64_t> encode_text(const std::string& caption) const;
};

/// Handle to an on-disk checkpoint `runs/<name>/ckpt_epoch_<E>/` that has
/// passed its integrity check.
struct Checkpoint {
  std::int64_t epoch = 0;
  std::int64_t step = 0;
  std::filesystem::path directory;
  TrainConfig config;
  std::string hash;  // digest over the per-file digests
};

std::filesystem::path checkpoint_dir(const std::filesystem::path& run_dir, std::int64_t epoch);

/// Validates the checkpoint at `directory` (manifest present, every file's
/// SHA-256 matches). Errors name the offending path.
Checkpoint resume(const std::filesystem::path& directory);

/// Loads networks and vocabulary.
T2IModel load_model(const Checkpoint& checkpoint);

/// Throws "incompatible ..." when the architectures differ.
void require_compatible(const ModelConfig& wanted, const Checkpoint& checkpoint);

Checkpoint write_checkpoint(const std::filesystem::path& directory, std::int64_t epoch,
                            std::int64_t step, const TrainConfig& config, const T2IModel& model,
                            torch::optim::Optimizer& opt_g, torch::optim::Optimizer& opt_d,
                            const at::Generator& rng);

void load_optimizers(const Checkpoint& checkpoint, torch::optim::Optimizer& opt_g,
                     torch::optim::Optimizer& opt_d);
at::Generator load_rng(const Checkpoint& checkpoint);

}  // namespace atelier::training
