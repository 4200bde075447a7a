#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace atelier::training {

/// Architecture hyper-parameters. Two checkpoints are compatible iff these
/// agree (vocab_size is carried by the checkpoint's vocabulary).
struct ModelConfig {
  std::int64_t embed_dim = 300;
  std::int64_t hidden = 128;
  std::int64_t noise_dim = 100;
  std::int64_t gen_channels = 32;
  std::int64_t disc_channels = 32;
  std::int64_t region_channels = 16;
  std::int64_t out_res = 256;
  std::int64_t vocab_size = 0;

  static ModelConfig toy();

  bool architecture_equals(const ModelConfig& other) const;
  nlohmann::json to_json() const;
  /// Keys missing from `j` keep the values of `base`.
  static ModelConfig from_json(const nlohmann::json& j, ModelConfig base);
  static ModelConfig from_json(const nlohmann::json& j) { return from_json(j, ModelConfig()); }
};

struct TrainConfig {
  ModelConfig model;
  double lr_g = 1e-4;
  double lr_d = 4e-4;
  double beta1 = 0.0;
  double beta2 = 0.9;
  std::int64_t batch_size = 24;
  std::int64_t checkpoint_every = 10;
  double lambda_damsm = 0.1;
  std::uint64_t seed = 0;
  int min_word_freq = 1;
  std::string run_name = "run";
  std::filesystem::path runs_dir = "runs";

  /// Desk-scale preset: 64x64 output, hidden 16, batch 16.
  static TrainConfig toy();

  std::filesystem::path run_dir() const { return runs_dir / run_name; }
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j, TrainConfig base);
  static TrainConfig from_json(const nlohmann::json& j) { return from_json(j, TrainConfig()); }
};

}  // namespace atelier::training
