#include <fstream>

#include <gtest/gtest.h>
#include <torch/torch.h>

#include "atelier/checkpoint.hpp"
#include "atelier/error.hpp"
#include "atelier/trainer.hpp"
#include "toy_corpus.hpp"

namespace fs = std::filesystem;
using namespace atelier;
using namespace atelier::training;

namespace {

/// Smaller than the toy preset so the unit tests stay fast.
TrainConfig tiny_config(const fs::path& runs, const std::string& name) {
  TrainConfig c = TrainConfig::toy();
  c.model.embed_dim = 8;
  c.model.hidden = 4;
  c.model.noise_dim = 8;
  c.model.gen_channels = 2;
  c.model.disc_channels = 2;
  c.model.region_channels = 2;
  c.model.out_res = 32;
  c.batch_size = 4;
  c.checkpoint_every = 1;
  c.runs_dir = runs;
  c.run_name = name;
  c.seed = 5;
  return c;
}

struct Fixture {
  fs::path dir;
  toy::ToyCorpus corpus;
};

Fixture corpus(const std::string& name, int count = 8) {
  auto dir = toy::fresh_dir(name);
  return {dir, toy::make_toy_corpus(dir / "data", count, 32)};
}

torch::Tensor probe_output(T2IModel& m) {
  torch::NoGradGuard no_grad;
  m.set_training(false);
  auto gen = at::make_generator<at::CPUGeneratorImpl>(99);
  auto z = at::randn({2, m.config.noise_dim}, gen, torch::kFloat32);
  auto [tokens, lengths] = textenc::pad_batch({m.encode_text("red circle"), m.encode_text("blue square")});
  auto emb = m.text->forward(tokens, lengths);
  return m.generator->forward(z, emb.sentence);
}

bool same_parameters(const torch::nn::Module& a, const torch::nn::Module& b) {
  auto pa = a.named_parameters();
  auto pb = b.named_parameters();
  if (pa.size() != pb.size()) return false;
  for (const auto& item : pa) {
    if (!torch::equal(item.value(), pb[item.key()])) return false;
  }
  return true;
}

}  // namespace

TEST(Training, ZeroEpochsIsANoOp) {
  auto f = corpus("train_zero");
  auto cfg = tiny_config(f.dir / "runs", "zero");
  EXPECT_TRUE(train(f.corpus.manifest, cfg, std::nullopt, 0).empty());
  EXPECT_FALSE(fs::exists(f.dir / "runs"));
}

TEST(Training, SmokeRunLogsFiniteLossesPerStep) {
  auto f = corpus("train_smoke");
  auto cfg = tiny_config(f.dir / "runs", "smoke");
  Trainer t(f.corpus.manifest, cfg);
  EXPECT_EQ(t.steps_per_epoch(), 2);
  auto ckpts = t.run(2);
  ASSERT_EQ(ckpts.size(), 2u);
  ASSERT_EQ(t.history().size(), 4u);
  for (const auto& r : t.history()) {
    for (double v : {r.d_real, r.d_fake_generated, r.d_fake_mismatched, r.g_adv, r.damsm}) {
      EXPECT_TRUE(std::isfinite(v));
    }
  }
  std::ifstream log(cfg.run_dir() / "log.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("d_fake_mismatched"));
    ++lines;
  }
  EXPECT_EQ(lines, 4);
}

TEST(Training, CheckpointCadence) {
  auto f = corpus("train_cadence");
  auto cfg = tiny_config(f.dir / "runs", "cadence");
  cfg.checkpoint_every = 2;
  auto ckpts = train(f.corpus.manifest, cfg, std::nullopt, 5);
  std::vector<std::int64_t> epochs;
  for (const auto& c : ckpts) epochs.push_back(c.epoch);
  EXPECT_EQ(epochs, (std::vector<std::int64_t>{2, 4}));
  EXPECT_TRUE(fs::is_directory(cfg.run_dir() / "ckpt_epoch_2"));
  EXPECT_FALSE(fs::exists(cfg.run_dir() / "ckpt_epoch_5"));
}

TEST(Training, DeterministicReplay) {
  auto f = corpus("train_replay");
  Trainer a(f.corpus.manifest, tiny_config(f.dir / "runs", "a"));
  Trainer b(f.corpus.manifest, tiny_config(f.dir / "runs", "b"));
  a.run(2);
  b.run(2);
  ASSERT_EQ(a.history().size(), b.history().size());
  for (std::size_t i = 0; i < a.history().size(); ++i) {
    EXPECT_EQ(a.history()[i].to_json(), b.history()[i].to_json());
  }
}

TEST(Training, ResumeEqualsUninterruptedRun) {
  auto f = corpus("train_resume");
  Trainer straight(f.corpus.manifest, tiny_config(f.dir / "runs", "straight"));
  straight.run(2);

  std::vector<Checkpoint> first;
  {
    Trainer part(f.corpus.manifest, tiny_config(f.dir / "runs", "split"));
    first = part.run(1);
  }
  ASSERT_EQ(first.size(), 1u);
  Trainer resumed(f.corpus.manifest, tiny_config(f.dir / "runs", "split"), resume(first[0].directory));
  EXPECT_EQ(resumed.epoch(), 1);
  resumed.run(1);

  EXPECT_TRUE(torch::equal(probe_output(straight.model()), probe_output(resumed.model())));
  EXPECT_TRUE(same_parameters(*straight.model().discriminator, *resumed.model().discriminator));
  EXPECT_EQ(straight.history().back().to_json(), resumed.history().back().to_json());
}

TEST(Training, CheckpointRoundTripReproducesOutputs) {
  auto f = corpus("train_roundtrip");
  Trainer t(f.corpus.manifest, tiny_config(f.dir / "runs", "rt"));
  auto ckpts = t.run(1);
  auto loaded = load_model(resume(ckpts[0].directory));
  EXPECT_LE((probe_output(t.model()) - probe_output(loaded)).abs().max().item<double>(), 1e-6);
  EXPECT_EQ(loaded.vocab.ref(), t.model().vocab.ref());
}

TEST(Training, MissingCheckpointNamesThePath) {
  try {
    resume("/definitely/not/here/ckpt_epoch_3");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("/definitely/not/here/ckpt_epoch_3"), std::string::npos);
  }
}

TEST(Training, CorruptCheckpointIsRejected) {
  auto f = corpus("train_corrupt");
  auto ckpts = train(f.corpus.manifest, tiny_config(f.dir / "runs", "c"), std::nullopt, 1);
  const auto file = ckpts[0].directory / "generator.pt";
  {
    std::fstream io(file, std::ios::in | std::ios::out | std::ios::binary);
    io.seekp(100);
    io.put('\x7f');
  }
  try {
    resume(ckpts[0].directory);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("generator.pt"), std::string::npos);
  }
}

TEST(Training, IncompatibleResolutionIsRejected) {
  auto f = corpus("train_incompatible");
  auto ckpts = train(f.corpus.manifest, tiny_config(f.dir / "runs", "small"), std::nullopt, 1);
  auto big = tiny_config(f.dir / "runs", "big");
  big.model.out_res = 256;
  try {
    Trainer t(f.corpus.manifest, big, resume(ckpts[0].directory));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("incompatible"), std::string::npos);
  }
}

TEST(Training, FineTuneRestartsEpochsAndKeepsWeights) {
  auto f = corpus("train_finetune");
  auto ckpts = train(f.corpus.manifest, tiny_config(f.dir / "runs", "photo"), std::nullopt, 2);
  auto paintings = toy::make_toy_corpus(f.dir / "paint", 8, 32, 3, dataset::EpochTag::impressionism);
  auto start = resume(ckpts.back().directory);
  auto cfg = tiny_config(f.dir / "runs", "ft");
  cfg.checkpoint_every = 2;
  Trainer t(paintings.manifest, cfg, start, StartMode::fine_tune);
  EXPECT_EQ(t.epoch(), 0);
  auto reference = load_model(start);
  EXPECT_TRUE(same_parameters(*t.model().generator, *reference.generator));
  auto out = t.run(4);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].epoch, 2);
  EXPECT_EQ(out[1].epoch, 4);
}

TEST(Training, NonFiniteLossAbortsWithLastGoodCheckpoint) {
  auto f = corpus("train_nan");
  auto cfg = tiny_config(f.dir / "runs", "nan");
  Trainer t(f.corpus.manifest, cfg);
  auto ckpts = t.run(1);
  {
    torch::NoGradGuard no_grad;
    t.model().discriminator->parameters().front().fill_(std::nan(""));
  }
  const auto steps_before = t.history().size();
  try {
    t.run(1);
    FAIL();
  } catch (const TrainingDiverged& e) {
    ASSERT_TRUE(e.last_good().has_value());
    EXPECT_EQ(*e.last_good(), ckpts[0].directory);
  }
  EXPECT_EQ(t.history().size(), steps_before);
  EXPECT_FALSE(fs::exists(cfg.run_dir() / "ckpt_epoch_2"));
  EXPECT_NO_THROW(resume(ckpts[0].directory));
}

TEST(Training, TextEncoderIsUpdatedByTraining) {
  auto f = corpus("train_textenc");
  Trainer t(f.corpus.manifest, tiny_config(f.dir / "runs", "te"));
  auto before = t.model().text->embedding->weight.clone();
  t.step_once();
  EXPECT_GT((t.model().text->embedding->weight - before).abs().max().item<double>(), 0.0);
}

TEST(Training, BatchSizeOneIsRejected) {
  auto f = corpus("train_batch1");
  auto cfg = tiny_config(f.dir / "runs", "b1");
  cfg.batch_size = 1;
  EXPECT_THROW(Trainer(f.corpus.manifest, cfg), Error);
}
