#include "atelier/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "atelier/captioner.hpp"
#include "atelier/error.hpp"
#include "atelier/hashing.hpp"
#include "atelier/image_io.hpp"
#include "atelier/text.hpp"

namespace atelier::dataset {
namespace fs = std::filesystem;

namespace {

constexpr std::pair<EpochTag, std::string_view> kEpochNames[] = {
    {EpochTag::baroque, "baroque"},
    {EpochTag::impressionism, "impressionism"},
    {EpochTag::post_impressionism, "post-impressionism"},
    {EpochTag::photo, "photo"},
    {EpochTag::other, "other"},
};
constexpr std::pair<Source, std::string_view> kSourceNames[] = {
    {Source::wikiart, "wikiart"},
    {Source::coco_like, "coco-like"},
    {Source::generated, "generated"},
};
constexpr std::pair<Split, std::string_view> kSplitNames[] = {
    {Split::train, "train"},
    {Split::val, "val"},
    {Split::none, "none"},
};

template <typename E, std::size_t N>
std::string_view name_of(const std::pair<E, std::string_view> (&table)[N], E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  throw Error("unknown enum value");
}

template <typename E, std::size_t N>
E parse_of(const std::pair<E, std::string_view> (&table)[N], std::string_view s,
           const char* what) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  throw Error(std::string("unknown ") + what + ": " + std::string(s));
}

Source source_for(EpochTag tag) {
  if (is_painting_epoch(tag)) return Source::wikiart;
  if (tag == EpochTag::photo) return Source::coco_like;
  return Source::generated;
}

void validate(const CaptionedRecord& r) {
  if (r.image_path.empty()) throw Error("record with empty image_path");
  if (r.source == Source::wikiart && !is_painting_epoch(r.epoch_tag)) {
    throw Error("wikiart record " + r.image_path + " must carry a painting epoch tag");
  }
  for (const auto& c : r.captions) {
    const auto n = text::tokenize(c, SIZE_MAX).size();
    if (n == 0 || n > text::kMaxCaptionLen) {
      throw Error("caption of " + r.image_path + " has " + std::to_string(n) + " tokens");
    }
  }
}

fs::path absolute_normal(const fs::path& p) {
  return fs::weakly_canonical(fs::absolute(p)).lexically_normal();
}

}  // namespace

std::string_view to_string(EpochTag tag) { return name_of(kEpochNames, tag); }
std::string_view to_string(Source source) { return name_of(kSourceNames, source); }
std::string_view to_string(Split split) { return name_of(kSplitNames, split); }
EpochTag parse_epoch_tag(std::string_view s) { return parse_of(kEpochNames, s, "epoch tag"); }
Source parse_source(std::string_view s) { return parse_of(kSourceNames, s, "source"); }
Split parse_split(std::string_view s) { return parse_of(kSplitNames, s, "split"); }

bool is_painting_epoch(EpochTag tag) {
  return tag == EpochTag::baroque || tag == EpochTag::impressionism ||
         tag == EpochTag::post_impressionism;
}

Manifest::Manifest(std::vector<CaptionedRecord> records, fs::path root, std::uint64_t seed,
                   std::string vocab_ref)
    : records_(std::move(records)),
      root_(std::move(root)),
      seed_(seed),
      vocab_ref_(std::move(vocab_ref)) {
  for (const auto& r : records_) {
    validate(r);
    ++counts_[r.epoch_tag];
  }
}

fs::path Manifest::resolve(const CaptionedRecord& record) const {
  return root_ / fs::path(record.image_path);
}

std::vector<CaptionedRecord> Manifest::with_split(Split split) const {
  std::vector<CaptionedRecord> out;
  std::copy_if(records_.begin(), records_.end(), std::back_inserter(out),
               [&](const auto& r) { return r.split == split; });
  return out;
}

std::vector<std::string> Manifest::all_captions() const {
  std::vector<std::string> out;
  for (const auto& r : records_) out.insert(out.end(), r.captions.begin(), r.captions.end());
  return out;
}

Manifest Manifest::with_vocab_ref(std::string ref) const {
  return Manifest(records_, root_, seed_, std::move(ref));
}

std::string serialize_manifest(const Manifest& manifest, const fs::path& manifest_dir) {
  const fs::path base = absolute_normal(manifest_dir);
  std::ostringstream out;
  for (const auto& r : manifest.records()) {
    const fs::path abs = absolute_normal(manifest.resolve(r));
    nlohmann::ordered_json j;
    j["image_path"] = abs.lexically_relative(base).generic_string();
    j["captions"] = r.captions;
    j["epoch_tag"] = to_string(r.epoch_tag);
    j["source"] = to_string(r.source);
    j["split"] = to_string(r.split);
    out << j.dump() << '\n';
  }
  return out.str();
}

void save_manifest(const Manifest& manifest, const fs::path& file) {
  const fs::path dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
  fs::create_directories(dir);
  const std::string body = serialize_manifest(manifest, dir);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write manifest " + file.string());
  out << body;
}

Manifest load_manifest(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open manifest " + file.string());
  std::vector<CaptionedRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CaptionedRecord r;
      r.image_path = j.at("image_path").get<std::string>();
      r.captions = j.at("captions").get<std::vector<std::string>>();
      r.epoch_tag = parse_epoch_tag(j.at("epoch_tag").get<std::string>());
      r.source = parse_source(j.at("source").get<std::string>());
      r.split = parse_split(j.at("split").get<std::string>());
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  const fs::path dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
  return Manifest(std::move(records), absolute_normal(dir));
}

Manifest ingest_corpus(const fs::path& root, const std::set<EpochTag>& epoch_filter,
                       const LogSink& log) {
  std::vector<CaptionedRecord> records;
  if (fs::is_directory(root)) {
    for (EpochTag tag : epoch_filter) {
      const fs::path dir = root / std::string(to_string(tag));
      if (!fs::is_directory(dir)) continue;
      for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file() || !image::has_image_extension(entry.path())) continue;
        const std::string rel = entry.path().lexically_relative(root).generic_string();
        if (!image::try_load_rgb(entry.path())) {
          log("skipping unreadable image " + rel);
          continue;
        }
        records.push_back({rel, {}, tag, source_for(tag), Split::none});
      }
    }
  }
  if (records.empty()) throw Error("empty corpus");
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.image_path < b.image_path; });
  return Manifest(std::move(records), absolute_normal(root));
}

Manifest caption_corpus(const Manifest& manifest, Captioner& captioner, const LogSink& log,
                        CaptionPolicy policy) {
  std::vector<CaptionedRecord> out;
  out.reserve(manifest.size());
  std::size_t dropped = 0;
  for (const auto& r : manifest.records()) {
    std::string caption;
    try {
      caption = text::normalize(captioner.caption(manifest.resolve(r)));
    } catch (const std::exception& e) {
      ++dropped;
      log("dropping " + r.image_path + ": " + e.what());
      continue;
    }
    if (caption.empty()) {
      ++dropped;
      log("dropping " + r.image_path + ": empty caption");
      continue;
    }
    CaptionedRecord next = r;
    next.captions = {std::move(caption)};
    out.push_back(std::move(next));
  }
  const double fraction =
      manifest.empty() ? 0.0 : static_cast<double>(dropped) / static_cast<double>(manifest.size());
  // A single failure in a tiny corpus is not evidence of an unhealthy captioner.
  if (fraction > policy.max_drop_fraction && (dropped > 1 || out.empty())) {
    throw Error("captioner unhealthy: dropped " + std::to_string(dropped) + " of " +
                std::to_string(manifest.size()) + " records");
  }
  return Manifest(std::move(out), manifest.root(), manifest.seed(), manifest.vocab_ref());
}

Manifest split_manifest(const Manifest& manifest, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw Error("val_fraction must lie in (0, 1)");
  }
  const auto& records = manifest.records();
  if (records.size() < 2) throw Error("split needs at least 2 records");
  const auto n_val =
      static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(records.size())));

  std::vector<std::pair<std::uint64_t, std::size_t>> ranked;
  ranked.reserve(records.size());
  const std::string key = std::to_string(seed) + ":";
  for (std::size_t i = 0; i < records.size(); ++i) {
    ranked.emplace_back(stable_hash64(key + records[i].image_path), i);
  }
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return records[a.second].image_path < records[b.second].image_path;
  });

  std::vector<CaptionedRecord> out = records;
  for (auto& r : out) r.split = Split::train;
  for (std::size_t k = 0; k < n_val; ++k) out[ranked[k].second].split = Split::val;
  return Manifest(std::move(out), manifest.root(), seed, manifest.vocab_ref());
}

}  // namespace atelier::dataset
