// atelier: command line entry point for dataset preparation, training, the
// style bank, evaluation, the survey backend and prompt-to-painting generation.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "atelier/captioner.hpp"
#include "atelier/color_histogram.hpp"
#include "atelier/dataset.hpp"
#include "atelier/detector.hpp"
#include "atelier/error.hpp"
#include "atelier/fid.hpp"
#include "atelier/image_features.hpp"
#include "atelier/image_io.hpp"
#include "atelier/paint.hpp"
#include "atelier/soa.hpp"
#include "atelier/style_bank.hpp"
#include "atelier/survey.hpp"
#include "atelier/survey_server.hpp"
#include "atelier/text.hpp"
#include "atelier/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace atelier;

namespace {

#ifndef ATELIER_DEFAULT_LABEL_MAP
#define ATELIER_DEFAULT_LABEL_MAP "coco_label_map.json"
#endif

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("malformed " + path.string() + ": " + e.what());
  }
}

struct Globals {
  std::string config_path;
  std::optional<json> config;

  /// Section of the global config file; empty object when absent.
  json section(const std::string& name) {
    if (!config) config = config_path.empty() ? json::object() : read_json_file(config_path);
    return config->contains(name) ? config->at(name) : json::object();
  }
};

void print_json(const json& j) { std::cout << j.dump(2) << std::endl; }

/// Value from the CLI when given, else from the config section, else `fallback`.
template <typename T>
T pick(const CLI::Option* opt, const T& cli_value, const json& section, const char* key,
       const T& fallback) {
  if (opt->count() > 0) return cli_value;
  if (section.contains(key)) return section.at(key).get<T>();
  return fallback;
}

std::set<dataset::EpochTag> parse_epochs(const std::string& list) {
  std::set<dataset::EpochTag> tags;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) tags.insert(dataset::parse_epoch_tag(item));
  }
  return tags;
}

std::vector<eval::SoaRecord> soa_records(const dataset::Manifest& m) {
  std::vector<eval::SoaRecord> out;
  for (const auto& r : m.records()) {
    out.push_back({m.resolve(r), r.captions.empty() ? std::string() : r.captions.front()});
  }
  return out;
}

std::vector<survey::PoolEntry> pool_entries(const dataset::Manifest& m, const fs::path& base) {
  std::vector<survey::PoolEntry> out;
  const auto root = fs::weakly_canonical(fs::absolute(base));
  for (const auto& r : m.records()) {
    if (r.captions.empty()) throw Error("record " + r.image_path + " has no caption");
    const auto abs = fs::weakly_canonical(fs::absolute(m.resolve(r)));
    out.push_back({abs.lexically_relative(root).generic_string(), r.captions.front(),
                   survey::CaptionSource::generated});
  }
  return out;
}

void add_dataset_commands(CLI::App& app, Globals& g) {
  auto* ds = app.add_subcommand("dataset", "Build captioned image manifests");
  ds->require_subcommand(1);

  auto* ingest = ds->add_subcommand("ingest", "Scan a corpus root into an uncaptioned manifest");
  static std::string root, epochs = "baroque,impressionism,post-impressionism", out;
  ingest->add_option("--root", root, "Corpus root holding <epoch>/ subdirectories")->required();
  auto* epochs_opt = ingest->add_option("--epochs", epochs, "Comma-separated epoch tags");
  ingest->add_option("--out", out, "Output manifest (.jsonl)")->required();
  ingest->callback([&g, epochs_opt] {
    const auto s = g.section("dataset");
    const auto tags = parse_epochs(pick(epochs_opt, epochs, s, "epochs", epochs));
    const auto m = dataset::ingest_corpus(root, tags);
    dataset::save_manifest(m, out);
    std::cerr << "wrote " << m.size() << " records to " << out << "\n";
  });

  auto* cap = ds->add_subcommand("caption", "Attach one generated caption per record");
  static std::string manifest, captioner = "stub", command, stub_text = "a painting", cap_out;
  static double max_drop = 0.10;
  cap->add_option("--manifest", manifest)->required();
  auto* cap_opt = cap->add_option("--captioner", captioner, "stub | external");
  auto* cmd_opt = cap->add_option("--captioner-cmd", command,
                                  "Command run as '<cmd> <image>' by the external captioner");
  auto* stub_opt = cap->add_option("--stub-text", stub_text, "Caption emitted by the stub");
  auto* drop_opt = cap->add_option("--max-drop-fraction", max_drop);
  cap->add_option("--out", cap_out)->required();
  cap->callback([&g, cap_opt, cmd_opt, stub_opt, drop_opt] {
    const auto s = g.section("dataset");
    const auto kind = pick(cap_opt, captioner, s, "captioner", captioner);
    std::unique_ptr<dataset::Captioner> c;
    if (kind == "stub") {
      c = std::make_unique<dataset::ConstantCaptioner>(pick(stub_opt, stub_text, s, "stub_text", stub_text));
    } else if (kind == "external") {
      const auto cmd = pick(cmd_opt, command, s, "captioner_cmd", command);
      if (cmd.empty()) throw Error("external captioner needs --captioner-cmd");
      c = std::make_unique<dataset::CommandCaptioner>(cmd);
    } else {
      throw Error("unknown captioner '" + kind + "' (expected stub|external)");
    }
    dataset::CaptionPolicy policy{pick(drop_opt, max_drop, s, "max_drop_fraction", max_drop)};
    const auto m = dataset::caption_corpus(dataset::load_manifest(manifest), *c, log_to_stderr, policy);
    dataset::save_manifest(m, cap_out);
    std::cerr << "wrote " << m.size() << " captioned records to " << cap_out << "\n";
  });

  auto* split = ds->add_subcommand("split", "Assign train/val splits");
  static std::string split_in, split_out;
  static double val_fraction = 0.1;
  static std::uint64_t split_seed = 0;
  split->add_option("--manifest", split_in)->required();
  split->add_option("--val-fraction", val_fraction);
  split->add_option("--seed", split_seed);
  split->add_option("--out", split_out)->required();
  split->callback([] {
    const auto m = dataset::split_manifest(dataset::load_manifest(split_in), val_fraction, split_seed);
    dataset::save_manifest(m, split_out);
  });
}

void add_train_command(CLI::App& app, Globals& g) {
  auto* train = app.add_subcommand("train", "Train or fine-tune the text-to-image GAN");
  static std::string manifest, resume_path, init_path, run_name, runs_dir;
  static std::int64_t epochs = 1;
  static bool toy = false;
  train->add_option("--manifest", manifest)->required();
  train->add_option("--epochs", epochs, "Epochs to train in this invocation")->required();
  train->add_option("--resume", resume_path, "Continue the run that wrote this checkpoint");
  train->add_option("--init-from", init_path,
                    "Fine-tune: start a new run from this checkpoint's weights");
  auto* name_opt = train->add_option("--run-name", run_name);
  auto* dir_opt = train->add_option("--runs-dir", runs_dir);
  train->add_flag("--toy", toy, "Use the desk-scale toy preset");
  train->callback([&g, name_opt, dir_opt] {
    if (!resume_path.empty() && !init_path.empty()) {
      throw Error("--resume and --init-from are mutually exclusive");
    }
    auto config = toy ? training::TrainConfig::toy() : training::TrainConfig{};
    config = training::TrainConfig::from_json(g.section("train"), config);
    if (name_opt->count()) config.run_name = run_name;
    if (dir_opt->count()) config.runs_dir = runs_dir;

    std::optional<training::Checkpoint> start;
    auto mode = training::StartMode::resume;
    if (!resume_path.empty()) start = training::resume(resume_path);
    if (!init_path.empty()) {
      start = training::resume(init_path);
      mode = training::StartMode::fine_tune;
    }
    const auto m = dataset::load_manifest(manifest);
    training::Trainer trainer(m, config, start, mode);
    trainer.on_step = [](const training::StepRecord& r) {
      if (r.step % 50 == 0) std::cerr << r.to_json().dump() << "\n";
    };
    json written = json::array();
    for (const auto& c : trainer.run(epochs)) {
      written.push_back({{"epoch", c.epoch}, {"path", c.directory.string()}, {"hash", c.hash}});
    }
    print_json({{"run_dir", config.run_dir().string()}, {"checkpoints", written}});
  });
}

void add_style_commands(CLI::App& app, Globals& g) {
  auto* st = app.add_subcommand("style", "Train and apply the style bank");
  st->require_subcommand(1);

  auto* bank = st->add_subcommand("train-bank", "Train one transform network per style painting");
  static std::string styles_dir, content, out;
  static bool toy = false;
  bank->add_option("--styles", styles_dir, "Directory of style paintings")->required();
  bank->add_option("--content", content, "Content manifest")->required();
  bank->add_option("--out", out, "Bank directory")->required();
  bank->add_flag("--toy", toy, "Use the desk-scale toy preset");
  bank->callback([&g] {
    auto config = toy ? style::StyleTrainConfig::toy() : style::StyleTrainConfig{};
    config = style::StyleTrainConfig::from_json(g.section("style"), config);
    std::vector<fs::path> images;
    for (const auto& e : fs::directory_iterator(styles_dir)) {
      if (e.is_regular_file() && image::has_image_extension(e.path())) images.push_back(e.path());
    }
    std::sort(images.begin(), images.end());
    const auto entries =
        style::build_style_bank(images, dataset::load_manifest(content), config, out);
    json ids = json::array();
    for (const auto& e : entries) ids.push_back(e.style_id);
    print_json({{"bank", out}, {"styles", ids}});
  });

  auto* apply = st->add_subcommand("apply", "Stylize one image");
  static std::string image_path, bank_dir, style_id, apply_out;
  apply->add_option("--image", image_path)->required();
  apply->add_option("--bank", bank_dir)->required();
  apply->add_option("--style-id", style_id, "Style to apply; default picks by color histogram");
  apply->add_option("--out", apply_out)->required();
  apply->callback([] {
    const auto entries = style::load_style_bank(bank_dir);
    const auto rgb = image::load_rgb(image_path);
    std::span<const style::StyleBankEntry> view(entries);
    const auto& chosen =
        style_id.empty() ? styleselect::select_style(rgb, view) : style::find_style(view, style_id);
    image::save_rgb(apply_out, style::stylize(rgb, *chosen.model));
    print_json({{"out", apply_out}, {"style_id", chosen.style_id}});
  });
}

void add_eval_commands(CLI::App& app, Globals& g) {
  auto* ev = app.add_subcommand("eval", "Evaluation metrics");
  ev->require_subcommand(1);

  auto* fid = ev->add_subcommand("fid", "Frechet distance between two image sets");
  static std::string real, fake, extractor = "color-stats";
  fid->add_option("--real", real, "Manifest of reference images")->required();
  fid->add_option("--fake", fake, "Manifest of generated images")->required();
  auto* ext_opt = fid->add_option("--extractor", extractor, "stub | color-stats | torchscript:<path>[@side]");
  fid->callback([&g, ext_opt] {
    const auto spec = pick(ext_opt, extractor, g.section("eval"), "extractor", extractor);
    auto ex = eval::make_feature_extractor(spec);
    const auto a = eval::extract_features(dataset::load_manifest(real), *ex);
    const auto b = eval::extract_features(dataset::load_manifest(fake), *ex);
    print_json({{"metric", "fid"},
                {"value", eval::fid(a, b)},
                {"extractor", ex->id()},
                {"n_real", a.count()},
                {"n_fake", b.count()}});
  });

  auto* soa = ev->add_subcommand("soa", "Semantic object accuracy of captioned images");
  static std::string manifest, detector = "stub-all", labels;
  static double threshold = eval::kDefaultDetectionThreshold;
  soa->add_option("--manifest", manifest)->required();
  auto* det_opt = soa->add_option("--detector", detector, "stub-all | fixture:<file> | external:<cmd>");
  auto* lab_opt = soa->add_option("--labels", labels, "Label map JSON");
  auto* thr_opt = soa->add_option("--threshold", threshold);
  soa->callback([&g, det_opt, lab_opt, thr_opt] {
    const auto s = g.section("eval");
    const auto label_map = eval::load_label_map(
        pick(lab_opt, labels, s, "labels", std::string(ATELIER_DEFAULT_LABEL_MAP)));
    auto det = eval::make_detector(pick(det_opt, detector, s, "detector", detector), label_map);
    const auto records = soa_records(dataset::load_manifest(manifest));
    auto report = eval::soa(records, *det, label_map, pick(thr_opt, threshold, s, "threshold", threshold));
    auto j = report.to_json();
    j["detector"] = det->id();
    print_json(j);
  });
}

void add_survey_commands(CLI::App& app, Globals& g) {
  auto* sv = app.add_subcommand("survey", "Human evaluation survey backend");
  sv->require_subcommand(1);

  auto* build = sv->add_subcommand("build-pools", "Assemble the four rating pools");
  static std::string real, baseline_dir, baseline_captions, finetuned, styletransfer, out;
  static std::size_t size = survey::kDefaultPoolSize;
  static std::uint64_t seed = 0;
  build->add_option("--real", real, "Captioned manifest of real paintings")->required();
  build->add_option("--baseline-dir", baseline_dir, "Directory of baseline images")->required();
  build->add_option("--baseline-captions", baseline_captions,
                    "Manifest whose captions are drawn at random for baseline images")
      ->required();
  build->add_option("--finetuned", finetuned, "Manifest of fine-tuned model outputs")->required();
  build->add_option("--styletransfer", styletransfer, "Manifest of style-transfer outputs")->required();
  auto* size_opt = build->add_option("--size", size, "Entries per pool");
  auto* seed_opt = build->add_option("--seed", seed);
  build->add_option("--out", out, "pools.json")->required();
  build->callback([&g, size_opt, seed_opt] {
    const auto s = g.section("survey");
    const fs::path out_path = out;
    const auto base = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    fs::create_directories(base);
    survey::PoolSources src;
    src.real = pool_entries(dataset::load_manifest(real), base);
    src.finetuned = pool_entries(dataset::load_manifest(finetuned), base);
    src.styletransfer = pool_entries(dataset::load_manifest(styletransfer), base);
    src.baseline_caption_pool = dataset::load_manifest(baseline_captions).all_captions();
    std::vector<fs::path> images;
    for (const auto& e : fs::recursive_directory_iterator(baseline_dir)) {
      if (e.is_regular_file() && image::has_image_extension(e.path())) images.push_back(e.path());
    }
    std::sort(images.begin(), images.end());
    const auto root = fs::weakly_canonical(fs::absolute(base));
    for (const auto& p : images) {
      src.baseline_images.push_back(
          fs::weakly_canonical(fs::absolute(p)).lexically_relative(root).generic_string());
    }
    const auto pools = survey::build_pools(src, pick(size_opt, size, s, "pool_size", size),
                                           pick(seed_opt, seed, s, "seed", seed), base);
    survey::save_pools(pools, out_path);
    std::cerr << "wrote pools of " << pools.pool_size() << " entries to " << out << "\n";
  });

  auto* serve = sv->add_subcommand("serve", "Serve the survey HTTP API");
  static std::string pools_file, state_dir, host = "127.0.0.1", admin_token, static_dir;
  static int port = 8080;
  serve->add_option("--pools", pools_file)->required();
  serve->add_option("--state", state_dir, "Directory for sessions and the event log")->required();
  auto* host_opt = serve->add_option("--host", host);
  auto* port_opt = serve->add_option("--port", port);
  auto* tok_opt = serve->add_option("--admin-token", admin_token);
  auto* static_opt = serve->add_option("--static", static_dir, "Static client bundle");
  serve->callback([&g, host_opt, port_opt, tok_opt, static_opt] {
    const auto s = g.section("survey");
    survey::ServerOptions opts;
    opts.host = pick(host_opt, host, s, "host", host);
    opts.port = pick(port_opt, port, s, "port", port);
    opts.admin_token = pick(tok_opt, admin_token, s, "admin_token", std::string());
    if (opts.admin_token.empty()) {
      if (const char* env = std::getenv("ATELIER_ADMIN_TOKEN")) opts.admin_token = env;
    }
    opts.static_dir = pick(static_opt, static_dir, s, "static_dir", std::string());
    survey::SurveyService service(survey::load_pools(pools_file), state_dir);
    survey::SurveyServer server(service, opts);
    std::cerr << "serving on " << opts.host << ":" << opts.port << "\n";
    server.serve();
  });

  auto* report = sv->add_subcommand("report", "Aggregate the event log");
  static std::string report_state;
  report->add_option("--state", report_state, "Survey state directory")->required();
  report->callback([] {
    survey::EventStore store(fs::path(report_state) / "events.jsonl");
    const auto events = store.events();
    print_json(survey::aggregate(events).to_json());
  });
}

void add_paint_command(CLI::App& app, Globals& g) {
  auto* p = app.add_subcommand("paint", "Turn a text prompt into a painting");
  static std::string prompt, prompts_file, mode = "style-transfer", out, out_dir;
  static std::string photo_ckpt, finetuned_ckpt, bank;
  static std::uint64_t seed = 0;
  p->add_option("--prompt", prompt);
  p->add_option("--prompts", prompts_file, "File with one prompt per line (batch mode)");
  auto* mode_opt = p->add_option("--mode", mode, "style-transfer | finetuned");
  auto* seed_opt = p->add_option("--seed", seed);
  p->add_option("--out", out, "Output PNG (single prompt)");
  p->add_option("--out-dir", out_dir, "Output directory (batch mode)");
  auto* photo_opt = p->add_option("--photo-checkpoint", photo_ckpt);
  auto* ft_opt = p->add_option("--finetuned-checkpoint", finetuned_ckpt);
  auto* bank_opt = p->add_option("--bank", bank);
  p->callback([&g, mode_opt, seed_opt, photo_opt, ft_opt, bank_opt] {
    const auto s = g.section("paint");
    auto config = paint::PaintConfig::from_json(s);
    if (photo_opt->count()) config.photo_checkpoint = photo_ckpt;
    if (ft_opt->count()) config.finetuned_checkpoint = finetuned_ckpt;
    if (bank_opt->count()) config.style_bank = bank;
    const auto m = paint::parse_paint_mode(pick(mode_opt, mode, s, "mode", mode));
    const auto base_seed = pick(seed_opt, seed, s, "seed", seed);

    if (prompts_file.empty()) {
      if (out.empty()) throw Error("--out is required");
      const auto r = paint::paint({prompt, m, base_seed, out}, config);
      print_json(r.metadata);
      return;
    }
    // Batch mode: prompt i uses seed + i and lands in <out-dir>/NNNN.png; a
    // manifest of the outputs (captioned with their prompts) is written alongside.
    if (out_dir.empty()) throw Error("--out-dir is required with --prompts");
    std::ifstream in(prompts_file);
    if (!in) throw Error("cannot read " + prompts_file);
    std::vector<dataset::CaptionedRecord> records;
    std::string line;
    std::uint64_t i = 0;
    while (std::getline(in, line)) {
      if (text::normalize(line).empty()) continue;
      char name[32];
      std::snprintf(name, sizeof name, "%04llu.png", static_cast<unsigned long long>(i));
      const fs::path file = fs::path(out_dir) / name;
      paint::paint({line, m, base_seed + i, file}, config);
      records.push_back({name, {text::normalize(line)}, dataset::EpochTag::other,
                         dataset::Source::generated, dataset::Split::none});
      ++i;
    }
    const auto manifest_file = fs::path(out_dir) / "manifest.jsonl";
    dataset::save_manifest(dataset::Manifest(records, out_dir), manifest_file);
    print_json({{"images", i}, {"manifest", manifest_file.string()}});
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"atelier: text prompt to painting toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file; sections override defaults");

  add_dataset_commands(app, g);
  add_train_command(app, g);
  add_style_commands(app, g);
  add_eval_commands(app, g);
  add_survey_commands(app, g);
  add_paint_command(app, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
