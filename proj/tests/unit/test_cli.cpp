#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "atelier/image_io.hpp"
#include "toy_corpus.hpp"

namespace fs = std::filesystem;
using namespace atelier;
using nlohmann::json;

namespace {

struct Outcome {
  int status = -1;
  std::string out;
  std::string err;

  json stdout_json() const { return json::parse(out); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'') q += "'\\''";
    else q += c;
  }
  return q + "'";
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

/// Shared artifacts built through the binary itself: a photo run, a fine-tuned
/// run and a two-style bank, all at 32 px with tiny networks.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(toy::fresh_dir("cli"));
    const auto& dir = *dir_;
    auto photos = toy::make_toy_corpus(dir / "photos", 8, 32);
    auto paintings = toy::make_toy_corpus(dir / "paintings", 8, 32, 4, dataset::EpochTag::impressionism);

    std::ofstream(dir / "config.json") << json{
        {"train",
         {{"batch_size", 4},
          {"checkpoint_every", 1},
          {"runs_dir", (dir / "runs").string()},
          {"model",
           {{"embed_dim", 8},
            {"hidden", 4},
            {"noise_dim", 8},
            {"gen_channels", 2},
            {"disc_channels", 2},
            {"region_channels", 2},
            {"out_res", 32}}}}},
        {"style", {{"steps", 2}, {"image_size", 32}}}};

    auto photo = run({"--config", cfg(), "train", "--toy", "--manifest", photos.manifest_file.string(),
                      "--epochs", "1", "--run-name", "photo"});
    ASSERT_EQ(photo.status, 0) << photo.err;
    photo_ckpt_ = new std::string(photo.stdout_json().at("checkpoints").back().at("path"));

    auto ft = run({"--config", cfg(), "train", "--toy", "--manifest", paintings.manifest_file.string(),
                   "--epochs", "1", "--run-name", "finetuned", "--init-from", *photo_ckpt_});
    ASSERT_EQ(ft.status, 0) << ft.err;
    ft_ckpt_ = new std::string(ft.stdout_json().at("checkpoints").back().at("path"));

    fs::create_directories(dir / "styles");
    image::save_rgb(dir / "styles/amber.png", toy::solid(32, 220, 140, 30));
    image::save_rgb(dir / "styles/teal.png", toy::solid(32, 20, 140, 140));
    auto bank = run({"--config", cfg(), "style", "train-bank", "--toy", "--styles", (dir / "styles").string(),
                     "--content", photos.manifest_file.string(), "--out", (dir / "bank").string()});
    ASSERT_EQ(bank.status, 0) << bank.err;
    EXPECT_EQ(bank.stdout_json().at("styles"), (json{"amber", "teal"}));
  }

  static void TearDownTestSuite() {
    delete dir_;
    delete photo_ckpt_;
    delete ft_ckpt_;
  }

  static std::string cfg() { return (*dir_ / "config.json").string(); }

  static Outcome run(const std::vector<std::string>& args) {
    static int counter = 0;
    const auto stem = *dir_ / ("run" + std::to_string(counter++));
    std::string cmd = quote(ATELIER_BIN);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " >" + quote(stem.string() + ".out") + " 2>" + quote(stem.string() + ".err");
    Outcome r;
    const int raw = std::system(cmd.c_str());
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(stem.string() + ".out");
    r.err = slurp(stem.string() + ".err");
    return r;
  }

  static std::vector<std::string> artifacts() {
    return {"--photo-checkpoint", *photo_ckpt_, "--finetuned-checkpoint", *ft_ckpt_, "--bank",
            (*dir_ / "bank").string()};
  }

  static Outcome paint(std::vector<std::string> args) {
    args.insert(args.begin(), "paint");
    for (auto& a : artifacts()) args.push_back(a);
    return run(args);
  }

  static fs::path* dir_;
  static std::string* photo_ckpt_;
  static std::string* ft_ckpt_;
};

fs::path* CliTest::dir_ = nullptr;
std::string* CliTest::photo_ckpt_ = nullptr;
std::string* CliTest::ft_ckpt_ = nullptr;

}  // namespace

TEST_F(CliTest, SnowyLandscapeInBothModes) {
  for (std::string mode : {"style-transfer", "finetuned"}) {
    const auto out = *dir_ / ("snowy_" + mode + ".png");
    auto r = paint({"--prompt", "A snowy landscape", "--mode", mode, "--seed", "3", "--out", out.string()});
    ASSERT_EQ(r.status, 0) << r.err;
    ASSERT_TRUE(fs::exists(out));
    const auto img = image::load_rgb(out);
    EXPECT_EQ(img.cols, 32);
    EXPECT_EQ(img.rows, 32);

    const auto meta = json::parse(slurp(out.string() + ".json"));
    EXPECT_EQ(meta, r.stdout_json());
    EXPECT_EQ(meta.at("prompt"), "A snowy landscape");
    EXPECT_EQ(meta.at("normalized_prompt"), "a snowy landscape");
    EXPECT_EQ(meta.at("mode"), mode);
    EXPECT_EQ(meta.at("seed"), 3);
    EXPECT_FALSE(meta.at("checkpoint_hash").get<std::string>().empty());
    if (mode == "style-transfer") {
      EXPECT_EQ(meta.at("checkpoint"), *photo_ckpt_);
      EXPECT_TRUE(meta.at("style_id") == "amber" || meta.at("style_id") == "teal");
    } else {
      EXPECT_EQ(meta.at("checkpoint"), *ft_ckpt_);
      EXPECT_TRUE(meta.at("style_id").is_null());
    }

    const auto again = *dir_ / ("snowy_again_" + mode + ".png");
    ASSERT_EQ(paint({"--prompt", "A snowy landscape", "--mode", mode, "--seed", "3", "--out", again.string()})
                  .status,
              0);
    EXPECT_EQ(slurp(out), slurp(again));
  }
}

TEST_F(CliTest, EmptyPromptFails) {
  const auto out = *dir_ / "empty.png";
  auto r = paint({"--prompt", "  ", "--mode", "finetuned", "--out", out.string()});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("prompt is empty"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(out));
}

TEST_F(CliTest, MissingArtifactIsNamed) {
  const auto missing = (*dir_ / "runs/nowhere/ckpt_epoch_9").string();
  auto r = run({"paint", "--prompt", "a cow", "--mode", "finetuned", "--finetuned-checkpoint", missing,
                "--out", (*dir_ / "missing.png").string()});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find(missing), std::string::npos) << r.err;

  auto no_bank = run({"paint", "--prompt", "a cow", "--mode", "style-transfer", "--photo-checkpoint",
                      *photo_ckpt_, "--bank", (*dir_ / "no_bank").string(), "--out",
                      (*dir_ / "missing.png").string()});
  EXPECT_EQ(no_bank.status, 1);
  EXPECT_NE(no_bank.err.find("style bank"), std::string::npos) << no_bank.err;
}

TEST_F(CliTest, UnknownModeAndMissingOutputFail) {
  auto r = paint({"--prompt", "a cow", "--mode", "watercolor", "--out", (*dir_ / "x.png").string()});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("watercolor"), std::string::npos) << r.err;

  auto no_out = paint({"--prompt", "a cow", "--mode", "finetuned"});
  EXPECT_EQ(no_out.status, 1);
  EXPECT_NE(no_out.err.find("--out"), std::string::npos) << no_out.err;
}

TEST_F(CliTest, ConfigSuppliesDefaultsAndFlagsWin) {
  const auto config = *dir_ / "paint_config.json";
  std::ofstream(config) << json{{"paint",
                                 {{"mode", "finetuned"},
                                  {"seed", 5},
                                  {"finetuned_checkpoint", *ft_ckpt_},
                                  {"photo_checkpoint", *photo_ckpt_},
                                  {"style_bank", (*dir_ / "bank").string()}}}};

  const auto from_config = *dir_ / "from_config.png";
  auto a = run({"--config", config.string(), "paint", "--prompt", "a red circle", "--out",
                from_config.string()});
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_EQ(a.stdout_json().at("mode"), "finetuned");
  EXPECT_EQ(a.stdout_json().at("seed"), 5);

  auto b = run({"--config", config.string(), "paint", "--prompt", "a red circle", "--seed", "9", "--mode",
                "style-transfer", "--out", (*dir_ / "overridden.png").string()});
  ASSERT_EQ(b.status, 0) << b.err;
  EXPECT_EQ(b.stdout_json().at("mode"), "style-transfer");
  EXPECT_EQ(b.stdout_json().at("seed"), 9);
  EXPECT_EQ(b.stdout_json().at("checkpoint"), *photo_ckpt_);
}

TEST_F(CliTest, BatchPromptsWriteNumberedImagesAndManifest) {
  const auto prompts = *dir_ / "prompts.txt";
  std::ofstream(prompts) << "a red circle\n\n   \nA Blue Square\n";
  const auto out_dir = *dir_ / "batch";
  auto r = paint({"--prompts", prompts.string(), "--mode", "finetuned", "--seed", "20", "--out-dir",
                  out_dir.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.stdout_json().at("images"), 2);
  EXPECT_TRUE(fs::exists(out_dir / "0000.png"));
  EXPECT_TRUE(fs::exists(out_dir / "0001.png"));
  EXPECT_FALSE(fs::exists(out_dir / "0002.png"));
  EXPECT_EQ(json::parse(slurp(out_dir / "0000.png.json")).at("seed"), 20);
  EXPECT_EQ(json::parse(slurp(out_dir / "0001.png.json")).at("seed"), 21);
  EXPECT_EQ(line_count(out_dir / "manifest.jsonl"), 2u);

  // Prompt i with seed + i reproduces the batch entry.
  const auto single = *dir_ / "single_1.png";
  ASSERT_EQ(paint({"--prompt", "A Blue Square", "--mode", "finetuned", "--seed", "21", "--out",
                   single.string()})
                .status,
            0);
  EXPECT_EQ(slurp(single), slurp(out_dir / "0001.png"));
}

TEST_F(CliTest, ResumeAndInitFromAreExclusive) {
  auto r = run({"train", "--manifest", (*dir_ / "photos/manifest.jsonl").string(), "--epochs", "1",
                "--resume", *photo_ckpt_, "--init-from", *photo_ckpt_});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("mutually exclusive"), std::string::npos) << r.err;
}

TEST_F(CliTest, DatasetIngestCaptionSplit) {
  const auto root = *dir_ / "corpus";
  fs::create_directories(root / "baroque");
  fs::create_directories(root / "cubism");
  for (int i = 0; i < 5; ++i) {
    image::save_rgb(root / "baroque" / ("b" + std::to_string(i) + ".png"), toy::solid(16, 40 * i, 10, 10));
  }
  image::save_rgb(root / "cubism/c0.png", toy::solid(16, 1, 2, 3));
  std::ofstream(root / "baroque/broken.png") << "not an image";

  const auto raw = *dir_ / "raw.jsonl";
  auto ingest = run({"dataset", "ingest", "--root", root.string(), "--epochs", "baroque", "--out", raw.string()});
  ASSERT_EQ(ingest.status, 0) << ingest.err;
  EXPECT_EQ(line_count(raw), 5u);

  const auto captioned = *dir_ / "captioned.jsonl";
  auto cap = run({"dataset", "caption", "--manifest", raw.string(), "--stub-text", "a dark painting", "--out",
                  captioned.string()});
  ASSERT_EQ(cap.status, 0) << cap.err;
  std::ifstream in(captioned);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    EXPECT_NE(line.find("a dark painting"), std::string::npos) << line;
    ++n;
  }
  EXPECT_EQ(n, 5u);

  const auto split = *dir_ / "split.jsonl";
  auto sp = run({"dataset", "split", "--manifest", captioned.string(), "--val-fraction", "0.4", "--seed", "1",
                 "--out", split.string()});
  ASSERT_EQ(sp.status, 0) << sp.err;
  const auto text = slurp(split);
  EXPECT_NE(text.find("\"val\""), std::string::npos);
  EXPECT_NE(text.find("\"train\""), std::string::npos);

  auto bad = run({"dataset", "ingest", "--root", (*dir_ / "empty_root").string(), "--out",
                  (*dir_ / "none.jsonl").string()});
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.err.find("empty corpus"), std::string::npos) << bad.err;
}

TEST_F(CliTest, EvalFidAndSoa) {
  const auto photos = (*dir_ / "photos/manifest.jsonl").string();
  const auto paintings = (*dir_ / "paintings/manifest.jsonl").string();
  auto same = run({"eval", "fid", "--real", photos, "--fake", photos});
  ASSERT_EQ(same.status, 0) << same.err;
  EXPECT_NEAR(same.stdout_json().at("value").get<double>(), 0.0, 1e-6);
  EXPECT_EQ(same.stdout_json().at("n_real"), 8);

  auto diff = run({"eval", "fid", "--real", photos, "--fake", paintings});
  ASSERT_EQ(diff.status, 0) << diff.err;
  EXPECT_GE(diff.stdout_json().at("value").get<double>(), 0.0);

  // Shape captions name no COCO class.
  auto unmappable = run({"eval", "soa", "--manifest", photos, "--labels", ATELIER_LABEL_MAP});
  EXPECT_EQ(unmappable.status, 1);
  EXPECT_NE(unmappable.err.find("no record has a mappable target class"), std::string::npos)
      << unmappable.err;

  const auto cows = (*dir_ / "cows.jsonl").string();
  ASSERT_EQ(run({"dataset", "caption", "--manifest", photos, "--stub-text", "two cows beside a dog", "--out",
                 cows})
                .status,
            0);
  auto soa = run({"eval", "soa", "--manifest", cows, "--labels", ATELIER_LABEL_MAP});
  ASSERT_EQ(soa.status, 0) << soa.err;
  const auto report = soa.stdout_json();
  EXPECT_EQ(report.at("detector"), "stub-all");
  EXPECT_EQ(report.at("n_evaluated"), 8);
  EXPECT_DOUBLE_EQ(report.at("overall").get<double>(), 1.0);
  EXPECT_TRUE(report.at("per_class").contains("cow"));
  EXPECT_TRUE(report.at("per_class").contains("dog"));
}

TEST_F(CliTest, SurveyBuildPoolsAndReport) {
  const auto baseline = *dir_ / "baseline";
  fs::create_directories(baseline);
  for (int i = 0; i < 6; ++i) {
    image::save_rgb(baseline / ("g" + std::to_string(i) + ".png"), toy::solid(16, 9, 9, 9 * i));
  }
  const auto photos = (*dir_ / "photos/manifest.jsonl").string();
  const auto paintings = (*dir_ / "paintings/manifest.jsonl").string();
  const auto pools = *dir_ / "pools/pools.json";
  auto build = run({"survey", "build-pools", "--real", paintings, "--baseline-dir", baseline.string(),
                    "--baseline-captions", photos, "--finetuned", paintings, "--styletransfer", photos,
                    "--size", "5", "--seed", "4", "--out", pools.string()});
  ASSERT_EQ(build.status, 0) << build.err;
  EXPECT_TRUE(fs::exists(pools));

  auto too_small = run({"survey", "build-pools", "--real", paintings, "--baseline-dir", baseline.string(),
                        "--baseline-captions", photos, "--finetuned", paintings, "--styletransfer", photos,
                        "--size", "3", "--out", (*dir_ / "pools/small.json").string()});
  EXPECT_EQ(too_small.status, 1);
  EXPECT_NE(too_small.err.find("at least 5"), std::string::npos) << too_small.err;

  fs::create_directories(*dir_ / "survey_state");
  auto report = run({"survey", "report", "--state", (*dir_ / "survey_state").string()});
  ASSERT_EQ(report.status, 0) << report.err;
  EXPECT_TRUE(report.stdout_json().is_object());
}
