#include "atelier/survey.hpp"

#include <chrono>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "atelier/hashing.hpp"

namespace atelier::survey {
namespace fs = std::filesystem;
using Kind = SurveyError::Kind;

std::string_view to_string(Category c) {
  switch (c) {
    case Category::real: return "real";
    case Category::baseline: return "baseline";
    case Category::finetuned: return "finetuned";
    case Category::styletransfer: return "styletransfer";
  }
  return "?";
}

std::string_view to_string(CaptionSource s) {
  switch (s) {
    case CaptionSource::generated: return "generated";
    case CaptionSource::random: return "random";
    case CaptionSource::model_input: return "model-input";
  }
  return "?";
}

Category parse_category(std::string_view s) {
  for (auto c : kCategories) {
    if (to_string(c) == s) return c;
  }
  throw SurveyError(Kind::validation, "unknown category: " + std::string(s));
}

CaptionSource parse_caption_source(std::string_view s) {
  for (auto c : {CaptionSource::generated, CaptionSource::random, CaptionSource::model_input}) {
    if (to_string(c) == s) return c;
  }
  throw SurveyError(Kind::validation, "unknown caption source: " + std::string(s));
}

namespace {

CaptionSource required_source(Category c) {
  switch (c) {
    case Category::real: return CaptionSource::generated;
    case Category::baseline: return CaptionSource::random;
    default: return CaptionSource::model_input;
  }
}

/// Uniform integer in [0, n) by rejection, so results do not depend on the
/// standard library's distribution implementation.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

/// First k positions of a Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> sample_without_replacement(std::mt19937_64& rng, std::size_t n,
                                                    std::size_t k) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + uniform_below(rng, n - i)]);
  }
  idx.resize(k);
  return idx;
}

template <typename T>
void shuffle(std::mt19937_64& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_below(rng, i)]);
}

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

nlohmann::json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read " + file.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed " + file.string() + ": " + e.what());
  }
}

template <typename F>
void for_each_json_line(const fs::path& file, F&& f) {
  std::ifstream in(file);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      f(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(file.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void append_line(const fs::path& file, const nlohmann::json& j) {
  std::ofstream out(file, std::ios::app);
  out << j.dump() << '\n';
  out.flush();
  if (!out) throw SurveyError(Kind::state, "cannot append to " + file.string());
}

}  // namespace

PoolSet::PoolSet(std::vector<SurveyPool> pools, std::size_t pool_size, fs::path root)
    : pool_size_(pool_size), root_(std::move(root)) {
  for (auto& p : pools) {
    if (p.entries.size() != pool_size) {
      throw Error("pool '" + std::string(to_string(p.category)) + "' has " +
                  std::to_string(p.entries.size()) + " entries, expected " +
                  std::to_string(pool_size));
    }
    for (const auto& e : p.entries) {
      if (e.caption_source != required_source(p.category)) {
        throw Error("pool '" + std::string(to_string(p.category)) + "' entry " + e.image_path +
                    " has caption source " + std::string(to_string(e.caption_source)));
      }
    }
    const auto c = p.category;
    if (!pools_.emplace(c, std::move(p)).second) {
      throw Error("duplicate pool '" + std::string(to_string(c)) + "'");
    }
  }
}

const SurveyPool& PoolSet::pool(Category c) const {
  auto it = pools_.find(c);
  if (it == pools_.end()) {
    throw SurveyError(Kind::state, "pool '" + std::string(to_string(c)) + "' is not built");
  }
  return it->second;
}

nlohmann::json PoolSet::to_json() const {
  nlohmann::ordered_json pools = nlohmann::ordered_json::object();
  for (const auto& [c, p] : pools_) {
    auto entries = nlohmann::ordered_json::array();
    for (const auto& e : p.entries) {
      entries.push_back({{"image_path", e.image_path},
                         {"caption", e.caption},
                         {"caption_source", to_string(e.caption_source)}});
    }
    pools[std::string(to_string(c))] = std::move(entries);
  }
  nlohmann::ordered_json j;
  j["pool_size"] = pool_size_;
  j["pools"] = std::move(pools);
  return j;
}

PoolSet PoolSet::from_json(const nlohmann::json& j, fs::path root) {
  std::vector<SurveyPool> pools;
  for (const auto& [name, entries] : j.at("pools").items()) {
    SurveyPool p{parse_category(name), {}};
    for (const auto& e : entries) {
      p.entries.push_back({e.at("image_path").get<std::string>(), e.at("caption").get<std::string>(),
                           parse_caption_source(e.at("caption_source").get<std::string>())});
    }
    pools.push_back(std::move(p));
  }
  return PoolSet(std::move(pools), j.at("pool_size").get<std::size_t>(), std::move(root));
}

void save_pools(const PoolSet& pools, const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << pools.to_json().dump(2) << '\n';
}

PoolSet load_pools(const fs::path& file) {
  return PoolSet::from_json(read_json(file), file.parent_path());
}

PoolSet build_pools(const PoolSources& sources, std::size_t pool_size, std::uint64_t seed,
                    fs::path root) {
  if (pool_size < kPerCategory) {
    throw Error("pool size must be at least " + std::to_string(kPerCategory));
  }
  std::mt19937_64 rng(seed);
  auto draw = [&](Category c, const std::vector<PoolEntry>& candidates) {
    if (candidates.size() < pool_size) {
      throw Error("pool '" + std::string(to_string(c)) + "' has " +
                  std::to_string(candidates.size()) + " candidates, needs " +
                  std::to_string(pool_size));
    }
    SurveyPool pool{c, {}};
    for (auto i : sample_without_replacement(rng, candidates.size(), pool_size)) {
      auto e = candidates[i];
      e.caption_source = required_source(c);
      pool.entries.push_back(std::move(e));
    }
    return pool;
  };

  if (sources.baseline_caption_pool.empty() && !sources.baseline_images.empty()) {
    throw Error("baseline pool needs a caption pool to draw random captions from");
  }
  std::vector<PoolEntry> baseline;
  for (const auto& image : sources.baseline_images) {
    const auto& caption =
        sources.baseline_caption_pool[uniform_below(rng, sources.baseline_caption_pool.size())];
    baseline.push_back({image, caption, CaptionSource::random});
  }

  std::vector<SurveyPool> pools;
  pools.push_back(draw(Category::real, sources.real));
  pools.push_back(draw(Category::baseline, baseline));
  pools.push_back(draw(Category::finetuned, sources.finetuned));
  pools.push_back(draw(Category::styletransfer, sources.styletransfer));
  return PoolSet(std::move(pools), pool_size, std::move(root));
}

nlohmann::json RatingEvent::to_json() const {
  nlohmann::ordered_json j;
  j["session_id"] = session_id;
  j["item_id"] = item_id;
  j["category"] = to_string(category);
  j["perceived_real"] = perceived_real;
  j["pretty"] = pretty;
  j["caption_accuracy"] = caption_accuracy;
  j["ts"] = ts;
  return j;
}

RatingEvent RatingEvent::from_json(const nlohmann::json& j) {
  RatingEvent e;
  e.session_id = j.at("session_id").get<std::string>();
  e.item_id = j.at("item_id").get<std::string>();
  e.category = parse_category(j.at("category").get<std::string>());
  e.perceived_real = j.at("perceived_real").get<bool>();
  e.pretty = j.at("pretty").get<int>();
  e.caption_accuracy = j.at("caption_accuracy").get<int>();
  e.ts = j.value("ts", std::int64_t{0});
  return e;
}

SurveyReport aggregate(std::span<const RatingEvent> events) {
  struct Sums {
    std::size_t n = 0, real = 0;
    double pretty = 0, accuracy = 0;
  };
  std::map<Category, Sums> sums;
  for (const auto& e : events) {
    auto& s = sums[e.category];
    ++s.n;
    s.real += e.perceived_real ? 1 : 0;
    s.pretty += e.pretty;
    s.accuracy += e.caption_accuracy;
  }
  SurveyReport report;
  report.total_events = events.size();
  for (const auto& [c, s] : sums) {
    const double n = static_cast<double>(s.n);
    report.per_category[c] = {100.0 * static_cast<double>(s.real) / n, s.pretty / n,
                              s.accuracy / n, s.n};
  }
  return report;
}

nlohmann::json SurveyReport::to_json() const {
  nlohmann::ordered_json categories = nlohmann::ordered_json::object();
  for (auto c : kCategories) {
    auto it = per_category.find(c);
    nlohmann::ordered_json j;
    if (it == per_category.end()) {
      j["absent"] = true;
      j["n_ratings"] = 0;
    } else {
      j["absent"] = false;
      j["perceived_real_pct"] = it->second.perceived_real_pct;
      j["avg_pretty"] = it->second.avg_pretty;
      j["avg_caption_accuracy"] = it->second.avg_caption_accuracy;
      j["n_ratings"] = it->second.n_ratings;
    }
    categories[std::string(to_string(c))] = std::move(j);
  }
  nlohmann::ordered_json j;
  j["total_events"] = total_events;
  j["categories"] = std::move(categories);
  return j;
}

EventStore::EventStore(fs::path file) : file_(std::move(file)) {
  if (!fs::exists(file_)) return;
  for_each_json_line(file_, [&](const nlohmann::json& j) {
    auto e = RatingEvent::from_json(j);
    if (seen_.emplace(e.session_id, e.item_id).second) events_.push_back(std::move(e));
  });
}

void EventStore::append(const RatingEvent& event) {
  std::lock_guard lock(mutex_);
  if (seen_.contains({event.session_id, event.item_id})) {
    throw SurveyError(Kind::conflict, "item " + event.item_id + " already rated in session " +
                                          event.session_id);
  }
  append_line(file_, event.to_json());
  seen_.emplace(event.session_id, event.item_id);
  events_.push_back(event);
}

std::vector<RatingEvent> EventStore::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

std::size_t EventStore::size() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

bool EventStore::contains(const std::string& session_id, const std::string& item_id) const {
  std::lock_guard lock(mutex_);
  return seen_.contains({session_id, item_id});
}

SurveyService::SurveyService(PoolSet pools, fs::path state_dir)
    : pools_(std::move(pools)),
      state_dir_(std::move(state_dir)),
      store_((fs::create_directories(state_dir_), state_dir_ / "events.jsonl")) {
  for (auto c : kCategories) pools_.pool(c);
  const auto sessions = state_dir_ / "sessions.jsonl";
  if (!fs::exists(sessions)) return;
  for_each_json_line(sessions, [&](const nlohmann::json& j) {
    const auto id = j.at("session_id").get<std::string>();
    sessions_.emplace(id, materialize(id, j.at("seed").get<std::uint64_t>()));
  });
}

SurveyService::Session SurveyService::materialize(const std::string& id, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  Session s{seed, {}};
  for (auto c : kCategories) {
    for (auto i : sample_without_replacement(rng, pools_.pool(c).entries.size(), kPerCategory)) {
      const auto item_id =
          sha256_hex(id + "|" + std::string(to_string(c)) + "|" + std::to_string(i)).substr(0, 16);
      s.items.emplace_back(item_id, ServedItem{c, i});
    }
  }
  shuffle(rng, s.items);
  return s;
}

std::string SurveyService::create_session() {
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  return create_session(seed);
}

std::string SurveyService::create_session(std::uint64_t seed) {
  std::random_device rd;
  std::lock_guard lock(mutex_);
  std::string id;
  do {
    id = sha256_hex(std::to_string(seed) + ":" + std::to_string(rd()) + ":" +
                    std::to_string(now_ms()) + ":" + std::to_string(sessions_.size()))
             .substr(0, 24);
  } while (sessions_.contains(id));
  append_line(state_dir_ / "sessions.jsonl", {{"session_id", id}, {"seed", seed}});
  sessions_.emplace(id, materialize(id, seed));
  return id;
}

const SurveyService::Session& SurveyService::session(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SurveyError(Kind::not_found, "unknown session: " + id);
  return it->second;
}

std::vector<BatchItem> SurveyService::batch(const std::string& session_id) const {
  std::vector<BatchItem> items;
  for (const auto& [item_id, served] : session(session_id).items) {
    items.push_back({item_id, "/api/session/" + session_id + "/image/" + item_id,
                     entry(served).caption});
  }
  return items;
}

ServedItem SurveyService::decode(const std::string& session_id, const std::string& item_id) const {
  for (const auto& [id, served] : session(session_id).items) {
    if (id == item_id) return served;
  }
  throw SurveyError(Kind::not_found, "item " + item_id + " was not served to session " + session_id);
}

const PoolEntry& SurveyService::entry(const ServedItem& item) const {
  return pools_.pool(item.category).entries.at(item.entry);
}

RatingEvent SurveyService::submit(const std::string& session_id, const RatingSubmission& rating) {
  auto in_range = [](int v) { return v >= 1 && v <= 6; };
  if (!in_range(rating.pretty) || !in_range(rating.caption_accuracy)) {
    throw SurveyError(Kind::validation, "pretty and caption_accuracy must be integers in 1..6");
  }
  const auto served = decode(session_id, rating.item_id);
  RatingEvent e{session_id,      rating.item_id,          served.category, rating.perceived_real,
                rating.pretty, rating.caption_accuracy, now_ms()};
  store_.append(e);
  return e;
}

}  // namespace atelier::survey
