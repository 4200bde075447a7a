#include "atelier/trainer.hpp"

#include <cmath>
#include <fstream>

#include <ATen/CPUGeneratorImpl.h>
#include <torch/torch.h>

#include "atelier/adversarial.hpp"
#include "atelier/image_io.hpp"
#include "atelier/text.hpp"

namespace atelier::training {
namespace fs = std::filesystem;

nlohmann::json StepRecord::to_json() const {
  return {{"epoch", epoch},
          {"step", step},
          {"d_real", d_real},
          {"d_fake_generated", d_fake_generated},
          {"d_fake_mismatched", d_fake_mismatched},
          {"g_adv", g_adv},
          {"damsm", damsm},
          {"d_total", d_total},
          {"g_total", g_total}};
}

struct Trainer::Data {
  torch::Tensor images;  // N x 3 x R x R uint8
  std::vector<std::vector<std::vector<std::int64_t>>> captions;
};

namespace {

std::vector<dataset::CaptionedRecord> training_records(const dataset::Manifest& manifest) {
  auto records = manifest.with_split(dataset::Split::train);
  if (records.empty()) {
    // Manifests that were never split train on everything.
    if (manifest.with_split(dataset::Split::val).empty()) records = manifest.records();
  }
  if (records.empty()) throw Error("manifest has no train split");
  std::erase_if(records, [](const auto& r) { return r.captions.empty(); });
  if (records.size() < 2) throw Error("training needs at least 2 captioned records");
  return records;
}

dataset::Vocabulary build_vocab(const std::vector<dataset::CaptionedRecord>& records, int min_freq) {
  std::vector<std::string> captions;
  for (const auto& r : records) captions.insert(captions.end(), r.captions.begin(), r.captions.end());
  return dataset::Vocabulary::build(captions, min_freq);
}

double scalar(const torch::Tensor& t) { return t.defined() ? t.item<double>() : 0.0; }

}  // namespace

Trainer::Trainer(const dataset::Manifest& manifest, TrainConfig config,
                 std::optional<Checkpoint> start, StartMode mode)
    : config_(std::move(config)), data_(std::make_unique<Data>()) {
  if (config_.batch_size < 2) throw Error("batch_size must be >= 2");
  if (config_.checkpoint_every < 1) throw Error("checkpoint_every must be >= 1");
  const auto records = training_records(manifest);

  if (start) {
    require_compatible(config_.model, *start);
    model_ = load_model(*start);
  } else {
    torch::manual_seed(config_.seed);
    model_ = T2IModel::create(config_.model, build_vocab(records, config_.min_word_freq));
  }
  config_.model = model_.config;

  const auto res = static_cast<int>(config_.model.out_res);
  std::vector<torch::Tensor> images;
  images.reserve(records.size());
  for (const auto& r : records) {
    images.push_back(image::to_byte_tensor(image::load_rgb(manifest.resolve(r)), res));
    auto& ids = data_->captions.emplace_back();
    for (const auto& c : r.captions) ids.push_back(model_.vocab.encode(text::tokenize(c)));
  }
  data_->images = torch::stack(images);

  opt_g_ = std::make_unique<torch::optim::Adam>(
      model_.generator_side_parameters(),
      torch::optim::AdamOptions(config_.lr_g).betas({config_.beta1, config_.beta2}));
  opt_d_ = std::make_unique<torch::optim::Adam>(
      model_.discriminator->parameters(),
      torch::optim::AdamOptions(config_.lr_d).betas({config_.beta1, config_.beta2}));

  if (start && mode == StartMode::resume) {
    load_optimizers(*start, *opt_g_, *opt_d_);
    rng_ = load_rng(*start);
    epoch_ = start->epoch;
    step_ = start->step;
    last_checkpoint_ = start->directory;
  } else {
    rng_ = at::make_generator<at::CPUGeneratorImpl>(config_.seed);
  }
}

Trainer::~Trainer() = default;

std::size_t Trainer::sample_count() const { return data_->captions.size(); }

std::int64_t Trainer::steps_per_epoch() const {
  const auto n = static_cast<std::int64_t>(sample_count());
  const auto full = n / config_.batch_size;
  return full + ((n % config_.batch_size) >= 2 ? 1 : 0);
}

torch::Tensor Trainer::images(const std::vector<std::int64_t>& indices) const {
  auto idx = torch::tensor(indices, torch::kInt64);
  return data_->images.index_select(0, idx).to(torch::kFloat32).div(127.5).sub(1.0);
}

const std::vector<std::vector<std::int64_t>>& Trainer::caption_ids(std::size_t index) const {
  return data_->captions.at(index);
}

StepRecord Trainer::train_step(const std::vector<std::int64_t>& batch) {
  const auto n = static_cast<std::int64_t>(batch.size());
  std::vector<std::vector<std::int64_t>> ids;
  ids.reserve(batch.size());
  for (auto i : batch) {
    const auto& options = data_->captions[static_cast<std::size_t>(i)];
    std::size_t pick = 0;
    if (options.size() > 1) {
      pick = static_cast<std::size_t>(
          torch::randint(static_cast<std::int64_t>(options.size()), {1}, rng_, torch::kInt64).item<std::int64_t>());
    }
    ids.push_back(options[pick]);
  }
  auto [tokens, lengths] = textenc::pad_batch(ids, static_cast<std::int64_t>(text::kMaxCaptionLen));
  const auto real = images(batch);
  const auto z = at::randn({n, config_.model.noise_dim}, rng_, torch::kFloat32);

  model_.set_training(true);
  const auto emb = model_.text->forward(tokens, lengths);
  const auto fake = model_.generator->forward(z, emb.sentence);

  // Discriminator step on detached inputs.
  const auto s_detached = emb.sentence.detach();
  t2i::LossBundle bundle = t2i::adversarial_losses(model_.discriminator, real, fake.detach(),
                                                   s_detached, t2i::derange(s_detached));
  const auto d_total = bundle.discriminator_total();

  StepRecord rec;
  rec.epoch = epoch_;
  rec.step = step_;
  rec.d_real = scalar(bundle.d_real);
  rec.d_fake_generated = scalar(bundle.d_fake_generated);
  rec.d_fake_mismatched = scalar(bundle.d_fake_mismatched);
  rec.d_total = scalar(d_total);
  auto diverged = [&] {
    return TrainingDiverged("non-finite loss at epoch " + std::to_string(epoch_) + " step " +
                                std::to_string(step_),
                            last_checkpoint_);
  };
  if (!std::isfinite(rec.d_total)) throw diverged();

  opt_d_->zero_grad();
  d_total.backward();
  opt_d_->step();

  // Generator step against the updated discriminator, plus DAMSM on the
  // generated images (this is what trains the text and region encoders).
  bundle.g_adv = -model_.discriminator->forward(fake, emb.sentence).mean();
  bundle.damsm = t2i::damsm_loss(model_.regions->forward(fake), emb.words, lengths);
  const auto g_total = bundle.generator_total(config_.lambda_damsm);
  rec.g_adv = scalar(bundle.g_adv);
  rec.damsm = scalar(bundle.damsm);
  rec.g_total = scalar(g_total);
  if (!bundle.all_finite() || !std::isfinite(rec.g_total)) throw diverged();

  opt_g_->zero_grad();
  g_total.backward();
  opt_g_->step();

  ++step_;
  history_.push_back(rec);
  if (on_step) on_step(rec);
  return rec;
}

StepRecord Trainer::step_once() {
  const auto n = static_cast<std::int64_t>(sample_count());
  const auto perm = torch::randperm(n, rng_, torch::kInt64);
  const auto take = std::min<std::int64_t>(n, config_.batch_size);
  std::vector<std::int64_t> batch(perm.data_ptr<std::int64_t>(), perm.data_ptr<std::int64_t>() + take);
  return train_step(batch);
}

std::vector<Checkpoint> Trainer::run(std::int64_t epochs) {
  std::vector<Checkpoint> written;
  if (epochs <= 0) return written;
  const fs::path run_dir = config_.run_dir();
  fs::create_directories(run_dir);
  std::ofstream log(run_dir / "log.jsonl", std::ios::app);
  if (!log) throw Error("cannot open training log in " + run_dir.string());

  const auto n = static_cast<std::int64_t>(sample_count());
  for (std::int64_t e = 0; e < epochs; ++e) {
    ++epoch_;
    const auto perm = torch::randperm(n, rng_, torch::kInt64);
    const auto* p = perm.data_ptr<std::int64_t>();
    for (std::int64_t begin = 0; begin < n; begin += config_.batch_size) {
      const auto end = std::min(n, begin + config_.batch_size);
      if (end - begin < 2) break;  // no derangement for a lone sample
      const auto rec = train_step(std::vector<std::int64_t>(p + begin, p + end));
      log << rec.to_json().dump() << '\n';
    }
    log.flush();
    if (epoch_ % config_.checkpoint_every == 0) {
      written.push_back(write_checkpoint(checkpoint_dir(run_dir, epoch_), epoch_, step_, config_,
                                         model_, *opt_g_, *opt_d_, rng_));
      last_checkpoint_ = written.back().directory;
    }
  }
  return written;
}

std::vector<Checkpoint> train(const dataset::Manifest& manifest, const TrainConfig& config,
                              std::optional<Checkpoint> start, std::int64_t epochs, StartMode mode) {
  if (epochs == 0) return {};
  if (epochs < 0) throw Error("epochs must be >= 0");
  Trainer trainer(manifest, config, std::move(start), mode);
  return trainer.run(epochs);
}

}  // namespace atelier::training
