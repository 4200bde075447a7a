#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "atelier/error.hpp"

namespace atelier::survey {

enum class Category { real, baseline, finetuned, styletransfer };
enum class CaptionSource { generated, random, model_input };

inline constexpr std::array<Category, 4> kCategories{Category::real, Category::baseline,
                                                     Category::finetuned, Category::styletransfer};
inline constexpr std::size_t kPerCategory = 5;
inline constexpr std::size_t kBatchSize = kPerCategory * kCategories.size();
inline constexpr std::size_t kDefaultPoolSize = 2400;

std::string_view to_string(Category c);
std::string_view to_string(CaptionSource s);
Category parse_category(std::string_view s);
CaptionSource parse_caption_source(std::string_view s);

/// Failure kinds map onto HTTP statuses 400 / 404 / 409 / 500.
class SurveyError : public Error {
 public:
  enum class Kind { validation, not_found, conflict, state };
  SurveyError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct PoolEntry {
  std::string image_path;  // relative to the pool root
  std::string caption;
  CaptionSource caption_source = CaptionSource::generated;
  friend bool operator==(const PoolEntry&, const PoolEntry&) = default;
};

struct SurveyPool {
  Category category = Category::real;
  std::vector<PoolEntry> entries;
};

/// The four rating pools. Every pool holds exactly `pool_size` entries; real
/// entries carry generated captions, baseline entries random captions, and the
/// two model categories the caption the model was conditioned on.
class PoolSet {
 public:
  PoolSet() = default;
  PoolSet(std::vector<SurveyPool> pools, std::size_t pool_size, std::filesystem::path root);

  const SurveyPool& pool(Category c) const;
  std::size_t pool_size() const { return pool_size_; }
  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path resolve(const PoolEntry& entry) const { return root_ / entry.image_path; }

  nlohmann::json to_json() const;
  /// `root` resolves the relative image paths.
  static PoolSet from_json(const nlohmann::json& j, std::filesystem::path root);

 private:
  std::map<Category, SurveyPool> pools_;
  std::size_t pool_size_ = 0;
  std::filesystem::path root_;
};

void save_pools(const PoolSet& pools, const std::filesystem::path& file);
PoolSet load_pools(const std::filesystem::path& file);

/// Candidate material for pool construction. Baseline images have no caption
/// of their own: each gets one drawn from `baseline_caption_pool` at build time.
struct PoolSources {
  std::vector<PoolEntry> real;
  std::vector<std::string> baseline_images;
  std::vector<std::string> baseline_caption_pool;
  std::vector<PoolEntry> finetuned;
  std::vector<PoolEntry> styletransfer;
};

/// Draws `pool_size` entries per category (seeded, without replacement).
/// Fails when a category has fewer candidates than `pool_size`.
PoolSet build_pools(const PoolSources& sources, std::size_t pool_size, std::uint64_t seed,
                    std::filesystem::path root);

struct RatingEvent {
  std::string session_id;
  std::string item_id;
  Category category = Category::real;
  bool perceived_real = false;
  int pretty = 0;
  int caption_accuracy = 0;
  std::int64_t ts = 0;  // milliseconds since the Unix epoch

  nlohmann::json to_json() const;
  static RatingEvent from_json(const nlohmann::json& j);
};

struct CategoryStats {
  double perceived_real_pct = 0.0;
  double avg_pretty = 0.0;
  double avg_caption_accuracy = 0.0;
  std::size_t n_ratings = 0;
};

/// Categories without ratings are absent from `per_category`.
struct SurveyReport {
  std::map<Category, CategoryStats> per_category;
  std::size_t total_events = 0;

  nlohmann::json to_json() const;
};

SurveyReport aggregate(std::span<const RatingEvent> events);

/// Append-only JSON-lines event log. One event per (session, item).
class EventStore {
 public:
  explicit EventStore(std::filesystem::path file);

  /// Throws SurveyError(conflict) on a duplicate (session, item).
  void append(const RatingEvent& event);
  std::vector<RatingEvent> events() const;
  std::size_t size() const;
  bool contains(const std::string& session_id, const std::string& item_id) const;
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
  mutable std::mutex mutex_;
  std::vector<RatingEvent> events_;
  std::set<std::pair<std::string, std::string>> seen_;
};

struct BatchItem {
  std::string item_id;
  std::string image_url;
  std::string caption;
};

struct ServedItem {
  Category category = Category::real;
  std::size_t entry = 0;  // index into the category's pool
};

struct RatingSubmission {
  std::string item_id;
  bool perceived_real = false;
  int pretty = 0;
  int caption_accuracy = 0;
};

/// Sessions, batch sampling and rating intake over a state directory holding
/// sessions.jsonl and events.jsonl. Sessions and events survive a restart.
class SurveyService {
 public:
  SurveyService(PoolSet pools, std::filesystem::path state_dir);

  /// New opaque session with a random seed.
  std::string create_session();
  std::string create_session(std::uint64_t seed);

  /// Twenty items, five per category, in shuffled order. The same session
  /// always gets the same batch.
  std::vector<BatchItem> batch(const std::string& session_id) const;
  /// Server-side decoding of an item id issued to `session_id`.
  ServedItem decode(const std::string& session_id, const std::string& item_id) const;
  const PoolEntry& entry(const ServedItem& item) const;

  RatingEvent submit(const std::string& session_id, const RatingSubmission& rating);

  SurveyReport report() const { return aggregate(store_.events()); }
  const EventStore& store() const { return store_; }
  const PoolSet& pools() const { return pools_; }

 private:
  struct Session {
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, ServedItem>> items;  // presentation order
  };
  const Session& session(const std::string& id) const;
  Session materialize(const std::string& id, std::uint64_t seed) const;

  PoolSet pools_;
  std::filesystem::path state_dir_;
  EventStore store_;
  mutable std::mutex mutex_;
  std::map<std::string, Session> sessions_;
};

}  // namespace atelier::survey
