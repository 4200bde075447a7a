#include <fstream>
#include <iterator>

#include <gtest/gtest.h>

#include "atelier/error.hpp"
#include "atelier/image_io.hpp"
#include "atelier/paint.hpp"
#include "atelier/style_bank.hpp"
#include "atelier/trainer.hpp"
#include "toy_corpus.hpp"

namespace fs = std::filesystem;
using namespace atelier;
using namespace atelier::paint;

namespace {

std::string bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

/// One-epoch photo and fine-tuned checkpoints plus a two-style bank, shared by all tests.
class PaintTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(toy::fresh_dir("paint"));
    const auto& dir = *dir_;
    auto photos = toy::make_toy_corpus(dir / "photos", 8, 32);
    auto paintings = toy::make_toy_corpus(dir / "paintings", 8, 32, 4, dataset::EpochTag::impressionism);

    training::TrainConfig c = training::TrainConfig::toy();
    c.model.embed_dim = 8;
    c.model.hidden = 4;
    c.model.noise_dim = 8;
    c.model.gen_channels = 2;
    c.model.disc_channels = 2;
    c.model.region_channels = 2;
    c.model.out_res = 32;
    c.batch_size = 4;
    c.checkpoint_every = 1;
    c.runs_dir = dir / "runs";
    c.run_name = "photo";
    auto photo = training::train(photos.manifest, c, std::nullopt, 1);
    c.run_name = "finetuned";
    auto finetuned = training::train(paintings.manifest, c, photo.back(), 1, training::StartMode::fine_tune);

    fs::create_directories(dir / "styles");
    image::save_rgb(dir / "styles/amber.png", toy::solid(32, 220, 140, 30));
    image::save_rgb(dir / "styles/teal.png", toy::solid(32, 20, 140, 140));
    auto sc = style::StyleTrainConfig::toy();
    sc.steps = 2;
    sc.image_size = 32;
    style::build_style_bank({dir / "styles/amber.png", dir / "styles/teal.png"}, photos.manifest, sc,
                            dir / "bank");

    config_ = new PaintConfig{photo.back().directory, dir / "bank", finetuned.back().directory};
  }

  static fs::path* dir_;
  static PaintConfig* config_;
};

fs::path* PaintTest::dir_ = nullptr;
PaintConfig* PaintTest::config_ = nullptr;

}  // namespace

TEST_F(PaintTest, DeterministicInBothModes) {
  for (auto mode : {PaintMode::style_transfer, PaintMode::finetuned}) {
    const auto tag = std::string(to_string(mode));
    auto a = paint::paint({"a red circle", mode, 11, *dir_ / ("a_" + tag + ".png")}, *config_);
    auto b = paint::paint({"a red circle", mode, 11, *dir_ / ("b_" + tag + ".png")}, *config_);
    EXPECT_EQ(bytes(a.image), bytes(b.image)) << tag;
    EXPECT_EQ(a.style_id, b.style_id);
    auto c = paint::paint({"a red circle", mode, 12, *dir_ / ("c_" + tag + ".png")}, *config_);
    EXPECT_NE(bytes(a.image), bytes(c.image)) << tag;
  }
}

TEST_F(PaintTest, SidecarRecordsProvenance) {
  auto r = paint::paint({"A Blue  Square!", PaintMode::style_transfer, 3, *dir_ / "side/st.png"}, *config_);
  EXPECT_EQ(r.sidecar, *dir_ / "side/st.png.json");
  std::ifstream in(r.sidecar);
  auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j, r.metadata);
  EXPECT_EQ(j.at("prompt"), "A Blue  Square!");
  EXPECT_EQ(j.at("normalized_prompt"), "a blue square");
  EXPECT_EQ(j.at("mode"), "style-transfer");
  EXPECT_EQ(j.at("seed"), 3);
  EXPECT_EQ(j.at("checkpoint"), config_->photo_checkpoint.string());
  EXPECT_EQ(j.at("checkpoint_hash"), training::resume(config_->photo_checkpoint).hash);
  ASSERT_TRUE(r.style_id.has_value());
  EXPECT_TRUE(*r.style_id == "amber" || *r.style_id == "teal");
  EXPECT_EQ(j.at("style_id"), *r.style_id);
  EXPECT_EQ(j.at("width"), 32);
  EXPECT_EQ(image::load_rgb(r.image).rows, 32);

  auto f = paint::paint({"a blue square", PaintMode::finetuned, 3, *dir_ / "side/ft.png"}, *config_);
  EXPECT_FALSE(f.style_id.has_value());
  EXPECT_TRUE(f.metadata.at("style_id").is_null());
  EXPECT_EQ(f.metadata.at("checkpoint"), config_->finetuned_checkpoint.string());
}

TEST_F(PaintTest, ErrorsNameTheProblem) {
  auto expect_error = [](const PaintRequest& req, const PaintConfig& cfg, const std::string& needle) {
    try {
      paint::paint(req, cfg);
      FAIL() << "no error for " << needle;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error({"   ", PaintMode::finetuned, 0, *dir_ / "e.png"}, *config_, "prompt is empty");
  expect_error({"", PaintMode::style_transfer, 0, *dir_ / "e.png"}, *config_, "prompt is empty");

  auto cfg = *config_;
  cfg.style_bank = *dir_ / "no_bank";
  expect_error({"a cat", PaintMode::style_transfer, 0, *dir_ / "e.png"}, cfg, "style bank");
  expect_error({"a cat", PaintMode::style_transfer, 0, *dir_ / "e.png"}, cfg, "no_bank");
  EXPECT_NO_THROW(paint::paint({"a cat", PaintMode::finetuned, 0, *dir_ / "ok.png"}, cfg));

  cfg = *config_;
  cfg.finetuned_checkpoint = *dir_ / "runs/absent";
  expect_error({"a cat", PaintMode::finetuned, 0, *dir_ / "e.png"}, cfg, "fine-tuned checkpoint");
  cfg.photo_checkpoint.clear();
  expect_error({"a cat", PaintMode::style_transfer, 0, *dir_ / "e.png"}, cfg, "photo checkpoint");
  EXPECT_FALSE(fs::exists(*dir_ / "e.png"));
}

TEST(PaintMode, Parsing) {
  EXPECT_EQ(parse_paint_mode("style-transfer"), PaintMode::style_transfer);
  EXPECT_EQ(parse_paint_mode("finetuned"), PaintMode::finetuned);
  EXPECT_THROW(parse_paint_mode("oil"), Error);
  PaintConfig c{"a", "b", "c"};
  auto back = PaintConfig::from_json(c.to_json());
  EXPECT_EQ(back.photo_checkpoint, "a");
  EXPECT_EQ(back.style_bank, "b");
  EXPECT_EQ(back.finetuned_checkpoint, "c");
}
