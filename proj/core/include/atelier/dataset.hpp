#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "atelier/logging.hpp"

namespace atelier::dataset {

enum class EpochTag { baroque, impressionism, post_impressionism, photo, other };
enum class Source { wikiart, coco_like, generated };
enum class Split { train, val, none };

std::string_view to_string(EpochTag tag);
std::string_view to_string(Source source);
std::string_view to_string(Split split);
EpochTag parse_epoch_tag(std::string_view s);
Source parse_source(std::string_view s);
Split parse_split(std::string_view s);
bool is_painting_epoch(EpochTag tag);

struct CaptionedRecord {
  std::string image_path;             // relative to the manifest root
  std::vector<std::string> captions;  // normalized, space-separated tokens
  EpochTag epoch_tag = EpochTag::other;
  Source source = Source::generated;
  Split split = Split::none;

  friend bool operator==(const CaptionedRecord&, const CaptionedRecord&) = default;
};

/// Immutable ordered collection of records. counts_by_epoch is derived in the
/// constructor, so it always equals a recount over the records.
class Manifest {
 public:
  Manifest() = default;
  Manifest(std::vector<CaptionedRecord> records, std::filesystem::path root,
           std::uint64_t seed = 0, std::string vocab_ref = {});

  const std::vector<CaptionedRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::filesystem::path& root() const { return root_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& vocab_ref() const { return vocab_ref_; }
  const std::map<EpochTag, std::size_t>& counts_by_epoch() const { return counts_; }

  std::filesystem::path resolve(const CaptionedRecord& record) const;
  std::vector<CaptionedRecord> with_split(Split split) const;
  std::vector<std::string> all_captions() const;

  Manifest with_vocab_ref(std::string ref) const;

 private:
  std::vector<CaptionedRecord> records_;
  std::filesystem::path root_;
  std::uint64_t seed_ = 0;
  std::string vocab_ref_;
  std::map<EpochTag, std::size_t> counts_;
};

/// JSON-lines serialization with fields {image_path, captions, epoch_tag,
/// source, split}; image paths are written relative to `manifest_dir`.
std::string serialize_manifest(const Manifest& manifest, const std::filesystem::path& manifest_dir);
void save_manifest(const Manifest& manifest, const std::filesystem::path& file);
Manifest load_manifest(const std::filesystem::path& file);

/// Scans `root/<epoch_tag>/**` for decodable images of the requested epochs.
/// Records come back uncaptioned and sorted by path.
Manifest ingest_corpus(const std::filesystem::path& root, const std::set<EpochTag>& epoch_filter,
                       const LogSink& log = log_to_stderr);

class Captioner;

struct CaptionPolicy {
  double max_drop_fraction = 0.10;
};

/// Returns a new manifest where every record carries exactly one normalized
/// caption from `captioner`. Records whose captioning fails are dropped and
/// logged; too many drops raise "captioner unhealthy".
Manifest caption_corpus(const Manifest& manifest, Captioner& captioner,
                        const LogSink& log = log_to_stderr, CaptionPolicy policy = {});

/// Assigns train/val. |val| = round(val_fraction * N); membership is decided by
/// ranking records on a keyed hash of (seed, image_path).
Manifest split_manifest(const Manifest& manifest, double val_fraction, std::uint64_t seed);

}  // namespace atelier::dataset
