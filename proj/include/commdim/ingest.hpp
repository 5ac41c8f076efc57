#pragma once

// Interaction-log ingestion: parsing, vocabulary construction, and the count
// tables everything downstream consumes. Tables are immutable after build and
// deterministic functions of the input bytes regardless of worker count.

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "commdim/common.hpp"
#include "commdim/io.hpp"

namespace commdim {

// One (user, community, timestamp, deleted) comment event.
struct InteractionRecord {
  std::string user;
  std::string community;
  std::int64_t timestamp = 0;
  bool deleted = false;
};

enum class LogFormat { Jsonl, Tsv };

inline LogFormat parse_log_format(std::string_view tag) {
  if (tag == "jsonl") return LogFormat::Jsonl;
  if (tag == "tsv") return LogFormat::Tsv;
  throw ConfigError("unknown log format tag: " + std::string(tag) +
                    " (expected jsonl or tsv)");
}

struct ParseStats {
  std::uint64_t lines = 0;
  std::uint64_t records = 0;
  std::uint64_t malformed = 0;
};

namespace detail {

inline bool finish_record(InteractionRecord& rec) {
  if (rec.deleted) rec.user = kDeletedUser;
  if (rec.user.empty() || rec.community.empty()) return false;
  if (rec.timestamp < kMinTimestamp) return false;
  return true;
}

inline bool parse_jsonl_line(std::string_view line, InteractionRecord& rec) {
  const auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return false;
  const auto author = j.find("author");
  const auto subreddit = j.find("subreddit");
  const auto created = j.find("created_utc");
  if (author == j.end() || subreddit == j.end() || created == j.end())
    return false;
  if (!author->is_string() || !subreddit->is_string()) return false;
  rec.user = author->get<std::string>();
  rec.community = subreddit->get<std::string>();
  if (created->is_number_integer()) {
    rec.timestamp = created->get<std::int64_t>();
  } else if (created->is_string()) {
    // Pushshift dumps carry created_utc as a quoted integer in some years.
    if (!parse_i64(created->get_ref<const std::string&>(), rec.timestamp))
      return false;
  } else {
    return false;
  }
  rec.deleted = rec.user == kDeletedUser;
  return finish_record(rec);
}

inline bool parse_tsv_line(std::string_view line, InteractionRecord& rec,
                           std::vector<std::string_view>& fields) {
  if (split_tsv(line, fields) != 4) return false;
  rec.user.assign(fields[0]);
  rec.community.assign(fields[1]);
  if (!parse_i64(fields[2], rec.timestamp)) return false;
  if (fields[3] == "0")
    rec.deleted = false;
  else if (fields[3] == "1")
    rec.deleted = true;
  else
    return false;
  if (!rec.deleted && rec.user == kDeletedUser) rec.deleted = true;
  return finish_record(rec);
}

inline void check_malformed_ratio(const ParseStats& stats) {
  if (stats.lines > 0 && stats.malformed * 2 > stats.lines)
    throw InputError("more than 50% of lines malformed (" +
                     std::to_string(stats.malformed) + " of " +
                     std::to_string(stats.lines) +
                     "); wrong --format tag?");
}

}  // namespace detail

// Streams records out of `src` in input order. Malformed lines are counted and
// skipped; a malformed majority is fatal (signals a wrong format tag).
template <typename Fn>
ParseStats for_each_interaction(LineSource& src, LogFormat format, Fn&& fn) {
  ParseStats stats;
  std::string line;
  InteractionRecord rec;
  std::vector<std::string_view> fields;
  while (src.next(line)) {
    ++stats.lines;
    const bool ok = format == LogFormat::Jsonl
                        ? detail::parse_jsonl_line(line, rec)
                        : detail::parse_tsv_line(line, rec, fields);
    if (!ok) {
      ++stats.malformed;
      continue;
    }
    ++stats.records;
    fn(rec);
  }
  detail::check_malformed_ratio(stats);
  return stats;
}

// Parses a whole in-memory buffer, sharding by byte ranges when workers > 1.
// Output order equals input order for any worker count.
inline std::vector<InteractionRecord> parse_interaction_buffer(
    std::string_view buf, LogFormat format, int workers, ParseStats* stats_out) {
  workers = std::max(1, workers);
  // Shard boundaries snapped forward to line starts.
  std::vector<std::size_t> bounds{0};
  for (int w = 1; w < workers; ++w) {
    std::size_t pos = buf.size() * static_cast<std::size_t>(w) / workers;
    const std::size_t nl = buf.find('\n', pos);
    bounds.push_back(nl == std::string_view::npos ? buf.size() : nl + 1);
  }
  bounds.push_back(buf.size());

  std::vector<std::vector<InteractionRecord>> shard_records(workers);
  std::vector<ParseStats> shard_stats(workers);
  auto run_shard = [&](int w) {
    std::string_view range = buf.substr(bounds[w], bounds[w + 1] - bounds[w]);
    ParseStats& st = shard_stats[w];
    std::vector<std::string_view> fields;
    InteractionRecord rec;
    std::size_t start = 0;
    while (start < range.size()) {
      std::size_t end = range.find('\n', start);
      if (end == std::string_view::npos) end = range.size();
      std::string_view line = range.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      start = end + 1;
      ++st.lines;
      const bool ok = format == LogFormat::Jsonl
                          ? detail::parse_jsonl_line(line, rec)
                          : detail::parse_tsv_line(line, rec, fields);
      if (!ok) {
        ++st.malformed;
        continue;
      }
      ++st.records;
      shard_records[w].push_back(rec);
    }
  };
  if (workers == 1) {
    run_shard(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_shard, w);
    for (auto& t : pool) t.join();
  }

  ParseStats total;
  std::size_t n = 0;
  for (const auto& st : shard_stats) {
    total.lines += st.lines;
    total.records += st.records;
    total.malformed += st.malformed;
  }
  for (const auto& v : shard_records) n += v.size();
  std::vector<InteractionRecord> records;
  records.reserve(n);
  for (auto& v : shard_records)
    records.insert(records.end(), std::make_move_iterator(v.begin()),
                   std::make_move_iterator(v.end()));
  detail::check_malformed_ratio(total);
  if (stats_out) *stats_out = total;
  return records;
}

// Reads a log file (gzip/zstd transparent) into records.
inline std::vector<InteractionRecord> read_interactions(
    const std::string& path, LogFormat format, int workers = 1,
    ParseStats* stats_out = nullptr) {
  const std::string buf = read_file_bytes(path);
  return parse_interaction_buffer(buf, format, workers, stats_out);
}

// Re-emits records in the TSV input format (user, community, epoch, deleted).
inline void save_interactions_tsv(std::span<const InteractionRecord> records,
                                  const std::string& path) {
  auto out = open_output(path);
  for (const auto& r : records) {
    out << (r.deleted ? std::string_view(kDeletedUser) : std::string_view(r.user))
        << '\t' << r.community << '\t' << r.timestamp << '\t'
        << (r.deleted ? '1' : '0') << '\n';
  }
  if (!out) throw InputError("write failure: " + path);
}

// ---- Vocabulary --------------------------------------------------------------

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const {
    return std::hash<std::string_view>{}(s);
  }
};
struct StringEq {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const {
    return a == b;
  }
};
template <typename V>
using StringMap = std::unordered_map<std::string, V, StringHash, StringEq>;
using StringSet = std::unordered_set<std::string, StringHash, StringEq>;

// Top-N communities by total comment count; dense ids 0..|V|-1.
// Order: count descending, ties by lexicographic id (deterministic under any
// input permutation).
struct Vocabulary {
  struct Entry {
    std::string id;
    std::uint64_t count = 0;
  };
  std::vector<Entry> entries;
  StringMap<std::int32_t> index;

  std::size_t size() const { return entries.size(); }

  std::int32_t dense_id(std::string_view id) const {
    const auto it = index.find(id);
    return it == index.end() ? -1 : it->second;
  }

  const std::string& id_of(std::int32_t dense) const {
    return entries[static_cast<std::size_t>(dense)].id;
  }

  // Order-sensitive hash over ids; persisted in sidecar metadata.
  std::uint64_t hash() const {
    std::uint64_t h = kFnvOffset;
    for (const auto& e : entries) {
      h = fnv1a64(e.id, h);
      h = fnv1a64("\n", h);
    }
    return h;
  }
};

struct VocabCoverage {
  double comments = 0.0;  // fraction of comments in retained communities
  double users = 0.0;     // fraction of users with >=1 retained comment
  std::uint64_t total_comments = 0;
  std::uint64_t total_users = 0;
};

inline Vocabulary build_vocab(std::span<const InteractionRecord> records,
                              std::size_t top_n,
                              VocabCoverage* coverage = nullptr) {
  if (top_n < 1) throw ConfigError("top_n must be >= 1");
  if (records.empty())
    throw InputError("cannot build a vocabulary from zero records");
  StringMap<std::uint64_t> counts;
  for (const auto& r : records) ++counts[r.community];

  std::vector<Vocabulary::Entry> entries;
  entries.reserve(counts.size());
  for (auto& [id, c] : counts) entries.push_back({id, c});
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.id < b.id;
  });
  if (entries.size() > top_n) entries.resize(top_n);

  Vocabulary vocab;
  vocab.entries = std::move(entries);
  vocab.index.reserve(vocab.entries.size());
  for (std::size_t i = 0; i < vocab.entries.size(); ++i)
    vocab.index.emplace(vocab.entries[i].id, static_cast<std::int32_t>(i));

  if (coverage) {
    std::uint64_t kept_comments = 0;
    std::unordered_set<std::string_view> kept_users, all_users;
    for (const auto& r : records) {
      const bool in_vocab = vocab.index.find(r.community) != vocab.index.end();
      if (in_vocab) kept_comments += 1;
      if (!r.deleted) {
        all_users.insert(r.user);
        if (in_vocab) kept_users.insert(r.user);
      }
    }
    coverage->total_comments = records.size();
    coverage->total_users = all_users.size();
    coverage->comments =
        static_cast<double>(kept_comments) / static_cast<double>(records.size());
    coverage->users = all_users.empty()
                          ? 0.0
                          : static_cast<double>(kept_users.size()) /
                                static_cast<double>(all_users.size());
  }
  return vocab;
}

// ---- User index ---------------------------------------------------------------

// Dense ids for non-deleted authors, sorted lexicographically so the mapping
// is independent of record order and worker count.
struct UserIndex {
  std::vector<std::string> ids;
  StringMap<std::int32_t> index;

  std::size_t size() const { return ids.size(); }
  std::int32_t dense_id(std::string_view id) const {
    const auto it = index.find(id);
    return it == index.end() ? -1 : it->second;
  }
};

inline std::shared_ptr<const UserIndex> build_user_index(
    std::span<const InteractionRecord> records) {
  std::unordered_set<std::string_view> seen;
  for (const auto& r : records)
    if (!r.deleted) seen.insert(r.user);
  auto idx = std::make_shared<UserIndex>();
  idx->ids.reserve(seen.size());
  for (const auto& s : seen) idx->ids.emplace_back(s);
  std::sort(idx->ids.begin(), idx->ids.end());
  idx->index.reserve(idx->ids.size());
  for (std::size_t i = 0; i < idx->ids.size(); ++i)
    idx->index.emplace(idx->ids[i], static_cast<std::int32_t>(i));
  return idx;
}

// ---- Pair counts ----------------------------------------------------------------

// Aggregated (user, community) comment counts over non-deleted, in-vocab
// records. Keys are unique; marginals are exact sums of the triples.
struct PairCountTable {
  struct Triple {
    std::int32_t user;
    std::int32_t community;
    std::uint32_t count;
  };
  std::shared_ptr<const UserIndex> users;
  std::vector<Triple> triples;  // sorted by (user, community)
  std::vector<std::uint64_t> user_totals;
  std::vector<std::uint64_t> community_totals;
  std::uint64_t total = 0;
  std::uint64_t dropped_deleted = 0;
  std::uint64_t dropped_out_of_vocab = 0;
};

inline PairCountTable count_pairs(std::span<const InteractionRecord> records,
                                  const Vocabulary& vocab,
                                  std::shared_ptr<const UserIndex> users = {}) {
  if (!users) users = build_user_index(records);
  PairCountTable table;
  table.users = users;
  std::unordered_map<std::uint64_t, std::uint32_t> counts;
  counts.reserve(records.size() / 4 + 1);
  for (const auto& r : records) {
    if (r.deleted) {
      ++table.dropped_deleted;
      continue;
    }
    const std::int32_t c = vocab.dense_id(r.community);
    if (c < 0) {
      ++table.dropped_out_of_vocab;
      continue;
    }
    const std::int32_t u = users->dense_id(r.user);
    const std::uint64_t key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
        static_cast<std::uint32_t>(c);
    ++counts[key];
  }
  table.triples.reserve(counts.size());
  for (const auto& [key, n] : counts)
    table.triples.push_back({static_cast<std::int32_t>(key >> 32),
                             static_cast<std::int32_t>(key & 0xffffffffu), n});
  std::sort(table.triples.begin(), table.triples.end(),
            [](const auto& a, const auto& b) {
              if (a.user != b.user) return a.user < b.user;
              return a.community < b.community;
            });
  table.user_totals.assign(users->size(), 0);
  table.community_totals.assign(vocab.size(), 0);
  for (const auto& t : table.triples) {
    table.user_totals[static_cast<std::size_t>(t.user)] += t.count;
    table.community_totals[static_cast<std::size_t>(t.community)] += t.count;
    table.total += t.count;
  }
  return table;
}

// ---- Monthly activity ------------------------------------------------------------

// Per (UTC calendar month, community, user) counts. Deleted records are
// retained under a sentinel user id of -1 so distribution comparisons stay
// possible downstream.
struct MonthlyActivityTable {
  static constexpr std::int32_t kDeletedSentinel = -1;
  struct Row {
    std::int32_t month;      // month index (year*12 + month-1)
    std::int32_t community;  // vocab dense id
    std::int32_t user;       // user dense id, or kDeletedSentinel
    std::uint32_t count;
  };
  std::shared_ptr<const UserIndex> users;
  std::vector<Row> rows;  // sorted by (month, community, user)
  std::uint64_t total = 0;  // sum of counts == retained record count
  std::uint64_t dropped_out_of_vocab = 0;
};

inline MonthlyActivityTable monthly_activity(
    std::span<const InteractionRecord> records, const Vocabulary& vocab,
    std::shared_ptr<const UserIndex> users = {}) {
  if (!users) users = build_user_index(records);
  MonthlyActivityTable table;
  table.users = users;
  struct KeyHash {
    std::size_t operator()(const std::array<std::int32_t, 3>& k) const {
      std::uint64_t h = kFnvOffset;
      h = fnv1a64(k.data(), sizeof(std::int32_t) * 3, h);
      return static_cast<std::size_t>(h);
    }
  };
  std::unordered_map<std::array<std::int32_t, 3>, std::uint32_t, KeyHash> counts;
  for (const auto& r : records) {
    const std::int32_t c = vocab.dense_id(r.community);
    if (c < 0) {
      ++table.dropped_out_of_vocab;
      continue;
    }
    const std::int32_t u = r.deleted ? MonthlyActivityTable::kDeletedSentinel
                                     : users->dense_id(r.user);
    ++counts[{month_index_of(r.timestamp), c, u}];
  }
  table.rows.reserve(counts.size());
  for (const auto& [k, n] : counts) {
    table.rows.push_back({k[0], k[1], k[2], n});
    table.total += n;
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const auto& a, const auto& b) {
              if (a.month != b.month) return a.month < b.month;
              if (a.community != b.community) return a.community < b.community;
              return a.user < b.user;
            });
  return table;
}

// ---- Persistence -----------------------------------------------------------------

// PairCountTable as TSV: user_id <TAB> community_id <TAB> count.
inline void save_pair_table(const PairCountTable& table, const Vocabulary& vocab,
                            const std::string& path) {
  auto out = open_output(path);
  for (const auto& t : table.triples) {
    out << table.users->ids[static_cast<std::size_t>(t.user)] << '\t'
        << vocab.id_of(t.community) << '\t' << t.count << '\n';
  }
  if (!out) throw InputError("write failure: " + path);
}

// Sidecar metadata: coverage stats, drop ledger, vocab hash, and the full
// ordered vocabulary so training can be reproduced from the pair of files.
inline void save_pair_table_meta(const PairCountTable& table,
                                 const Vocabulary& vocab,
                                 const VocabCoverage& coverage,
                                 const ParseStats& stats,
                                 const std::string& path) {
  nlohmann::json meta;
  meta["format"] = "commdim-pairs";
  meta["version"] = 1;
  meta["vocab_hash"] = hex64(vocab.hash());
  meta["coverage"] = {{"comments", coverage.comments},
                      {"users", coverage.users},
                      {"total_comments", coverage.total_comments},
                      {"total_users", coverage.total_users}};
  meta["drops"] = {{"deleted", table.dropped_deleted},
                   {"out_of_vocab", table.dropped_out_of_vocab},
                   {"malformed", stats.malformed}};
  meta["pair_total"] = table.total;
  auto& v = meta["vocab"] = nlohmann::json::array();
  for (const auto& e : vocab.entries)
    v.push_back({{"id", e.id}, {"count", e.count}});
  auto out = open_output(path);
  out << meta.dump(2) << '\n';
}

inline Vocabulary load_vocab_from_meta(const std::string& meta_path) {
  std::ifstream in(meta_path);
  if (!in) throw InputError("cannot open metadata file: " + meta_path);
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad metadata JSON in " + meta_path + ": " + e.what());
  }
  if (!meta.contains("vocab") || !meta["vocab"].is_array())
    throw InputError("metadata file lacks a vocab block: " + meta_path);
  Vocabulary vocab;
  for (const auto& e : meta["vocab"]) {
    vocab.entries.push_back(
        {e.at("id").get<std::string>(), e.at("count").get<std::uint64_t>()});
  }
  for (std::size_t i = 0; i < vocab.entries.size(); ++i)
    vocab.index.emplace(vocab.entries[i].id, static_cast<std::int32_t>(i));
  return vocab;
}

// Loads a persisted pair table against a known vocabulary.
inline PairCountTable load_pair_table(const std::string& tsv_path,
                                      const Vocabulary& vocab) {
  auto src = open_lines(tsv_path);
  std::string line;
  std::vector<std::string_view> fields;
  struct RawTriple {
    std::string user;
    std::int32_t community;
    std::uint32_t count;
  };
  std::vector<RawTriple> raw;
  while (src->next(line)) {
    if (line.empty()) continue;
    if (split_tsv(line, fields) != 3)
      throw InputError("bad pair-table row in " + tsv_path + ": " + line);
    std::int64_t n = 0;
    if (!parse_i64(fields[2], n) || n <= 0)
      throw InputError("bad pair count in " + tsv_path + ": " + line);
    const std::int32_t c = vocab.dense_id(fields[1]);
    if (c < 0)
      throw InputError("pair-table community not in vocabulary: " +
                       std::string(fields[1]));
    raw.push_back({std::string(fields[0]), c, static_cast<std::uint32_t>(n)});
  }
  auto users = std::make_shared<UserIndex>();
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& t : raw) seen.insert(t.user);
    users->ids.assign(seen.begin(), seen.end());
    std::sort(users->ids.begin(), users->ids.end());
    for (std::size_t i = 0; i < users->ids.size(); ++i)
      users->index.emplace(users->ids[i], static_cast<std::int32_t>(i));
  }
  PairCountTable table;
  table.users = users;
  table.triples.reserve(raw.size());
  for (const auto& t : raw)
    table.triples.push_back({users->dense_id(t.user), t.community, t.count});
  std::sort(table.triples.begin(), table.triples.end(),
            [](const auto& a, const auto& b) {
              if (a.user != b.user) return a.user < b.user;
              return a.community < b.community;
            });
  for (std::size_t i = 1; i < table.triples.size(); ++i) {
    if (table.triples[i].user == table.triples[i - 1].user &&
        table.triples[i].community == table.triples[i - 1].community)
      throw InputError("duplicate (user, community) key in " + tsv_path);
  }
  table.user_totals.assign(users->size(), 0);
  table.community_totals.assign(vocab.size(), 0);
  for (const auto& t : table.triples) {
    table.user_totals[static_cast<std::size_t>(t.user)] += t.count;
    table.community_totals[static_cast<std::size_t>(t.community)] += t.count;
    table.total += t.count;
  }
  return table;
}

// Monthly table as TSV: month <TAB> community <TAB> user(or sentinel) <TAB> count.
inline void save_monthly_table(const MonthlyActivityTable& table,
                               const Vocabulary& vocab,
                               const std::string& path) {
  auto out = open_output(path);
  out << "month\tcommunity_id\tuser_id\tcount\n";
  for (const auto& r : table.rows) {
    out << month_label(r.month) << '\t' << vocab.id_of(r.community) << '\t'
        << (r.user == MonthlyActivityTable::kDeletedSentinel
                ? kDeletedUser
                : table.users->ids[static_cast<std::size_t>(r.user)])
        << '\t' << r.count << '\n';
  }
  if (!out) throw InputError("write failure: " + path);
}

}  // namespace commdim
