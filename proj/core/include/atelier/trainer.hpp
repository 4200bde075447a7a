#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <torch/optim/adam.h>

#include "atelier/checkpoint.hpp"
#include "atelier/dataset.hpp"
#include "atelier/error.hpp"
#include "atelier/train_config.hpp"

namespace atelier::training {

/// How a start checkpoint is used.
///   resume:    continue the same run (weights, optimizer, RNG and epoch counter).
///   fine_tune: start a new run from the checkpoint's weights and vocabulary
///              with fresh optimizers, a fresh RNG and epochs counted from 0.
enum class StartMode { resume, fine_tune };

struct StepRecord {
  std::int64_t epoch = 0;
  std::int64_t step = 0;
  double d_real = 0, d_fake_generated = 0, d_fake_mismatched = 0;
  double g_adv = 0, damsm = 0;
  double d_total = 0, g_total = 0;

  nlohmann::json to_json() const;
};

/// Raised when a loss goes non-finite. Nothing is written after the failing
/// step; `last_good` names the newest checkpoint of the run, if any.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, std::optional<std::filesystem::path> last_good)
      : Error(what), last_good_(std::move(last_good)) {}
  const std::optional<std::filesystem::path>& last_good() const { return last_good_; }

 private:
  std::optional<std::filesystem::path> last_good_;
};

/// Alternating hinge D/G training of the text-conditioned GAN. The generator
/// step also updates the text and region encoders through the DAMSM term.
/// Deterministic for a fixed seed: all sampling goes through one CPU generator
/// whose state is checkpointed.
class Trainer {
 public:
  Trainer(const dataset::Manifest& manifest, TrainConfig config,
          std::optional<Checkpoint> start = std::nullopt, StartMode mode = StartMode::resume);
  ~Trainer();

  /// Trains `epochs` further epochs, writing a checkpoint whenever the epoch
  /// counter is a multiple of checkpoint_every.
  std::vector<Checkpoint> run(std::int64_t epochs);

  /// Runs a single D/G step on the next batch without touching the epoch
  /// counter or the filesystem.
  StepRecord step_once();

  T2IModel& model() { return model_; }
  const TrainConfig& config() const { return config_; }
  std::int64_t epoch() const { return epoch_; }
  std::int64_t steps_per_epoch() const;
  const std::vector<StepRecord>& history() const { return history_; }

  /// Real images (N x 3 x R x R in [-1, 1]) and their first-caption token ids.
  torch::Tensor images(const std::vector<std::int64_t>& indices) const;
  const std::vector<std::vector<std::int64_t>>& caption_ids(std::size_t index) const;
  std::size_t sample_count() const;

  std::function<void(const StepRecord&)> on_step;

 private:
  struct Data;
  StepRecord train_step(const std::vector<std::int64_t>& batch);

  TrainConfig config_;
  T2IModel model_;
  std::unique_ptr<Data> data_;
  std::unique_ptr<torch::optim::Adam> opt_g_;
  std::unique_ptr<torch::optim::Adam> opt_d_;
  at::Generator rng_;
  std::int64_t epoch_ = 0;
  std::int64_t step_ = 0;
  std::optional<std::filesystem::path> last_checkpoint_;
  std::vector<StepRecord> history_;
};

/// Convenience wrapper; `epochs == 0` returns immediately without side effects.
std::vector<Checkpoint> train(const dataset::Manifest& manifest, const TrainConfig& config,
                              std::optional<Checkpoint> start, std::int64_t epochs,
                              StartMode mode = StartMode::resume);

}  // namespace atelier::training
