#include <catch2/catch_amalgamated.hpp>

#include <commdim/ingest.hpp>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "helpers.hpp"

using namespace commdim;
using testutil::rec;
using testutil::TempDir;
using testutil::ts_of;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<InteractionRecord> parse_text(const std::string& text,
                                          LogFormat format, int workers = 1,
                                          ParseStats* stats = nullptr) {
  return parse_interaction_buffer(text, format, workers, stats);
}

}  // namespace

TEST_CASE("jsonl lines map directly onto records", "[ingest][parse]") {
  const std::string line =
      R"({"author":"a1","subreddit":"s1","created_utc":1500000000})";
  const auto recs = parse_text(line + "\n", LogFormat::Jsonl);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].user == "a1");
  CHECK(recs[0].community == "s1");
  CHECK(recs[0].timestamp == 1500000000);
  CHECK_FALSE(recs[0].deleted);
}

TEST_CASE("deleted authors carry the sentinel", "[ingest][parse]") {
  const std::string line =
      R"({"author":"[deleted]","subreddit":"s1","created_utc":1500000000})";
  const auto recs = parse_text(line + "\n", LogFormat::Jsonl);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].deleted);
  CHECK(recs[0].user == kDeletedUser);
}

TEST_CASE("empty stream parses to nothing with zero errors", "[ingest][parse]") {
  ParseStats stats;
  const auto recs = parse_text("", LogFormat::Jsonl, 1, &stats);
  CHECK(recs.empty());
  CHECK(stats.lines == 0);
  CHECK(stats.malformed == 0);
}

TEST_CASE("created_utc may arrive as a numeric string", "[ingest][parse]") {
  const std::string line =
      R"({"author":"a","subreddit":"s","created_utc":"1500000000"})";
  const auto recs = parse_text(line + "\n", LogFormat::Jsonl);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].timestamp == 1500000000);
}

TEST_CASE("malformed lines are counted and skipped", "[ingest][parse]") {
  const std::string text =
      R"({"author":"a","subreddit":"s","created_utc":1500000000})"
      "\nnot json\n"
      R"({"author":"b","subreddit":"s","created_utc":1500000001})"
      "\n";
  ParseStats stats;
  const auto recs = parse_text(text, LogFormat::Jsonl, 1, &stats);
  CHECK(recs.size() == 2);
  CHECK(stats.lines == 3);
  CHECK(stats.records == 2);
  CHECK(stats.malformed == 1);
}

TEST_CASE("mostly-garbage input trips the format guard", "[ingest][parse]") {
  CHECK_THROWS_AS(parse_text("x\ny\nz\n", LogFormat::Jsonl), InputError);
  // a tsv log parsed as jsonl is all-malformed and must fail loudly
  CHECK_THROWS_AS(parse_text("a\tc\t1500000000\t0\n", LogFormat::Jsonl),
                  InputError);
}

TEST_CASE("pre-2005 timestamps are malformed", "[ingest][parse]") {
  const std::string text =
      R"({"author":"a","subreddit":"s","created_utc":1000000000})"
      "\n"
      R"({"author":"b","subreddit":"s","created_utc":1500000000})"
      "\n";
  ParseStats stats;
  const auto recs = parse_text(text, LogFormat::Jsonl, 1, &stats);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].user == "b");
  CHECK(stats.malformed == 1);
}

TEST_CASE("tsv format round-trips including the deleted flag", "[ingest][parse]") {
  const std::string text =
      "alice\tpics\t1500000000\t0\n"
      "[deleted]\tpics\t1500000100\t1\n";
  const auto recs = parse_text(text, LogFormat::Tsv);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].user == "alice");
  CHECK_FALSE(recs[0].deleted);
  CHECK(recs[1].deleted);

  const auto echoed = testutil::to_tsv(recs);
  CHECK(echoed == text);
}

TEST_CASE("a [deleted] author in tsv forces the flag", "[ingest][parse]") {
  const auto recs = parse_text("[deleted]\tpics\t1500000000\t0\n", LogFormat::Tsv);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].deleted);
}

TEST_CASE("parsing is worker-count independent", "[ingest][parallel]") {
  std::string text;
  SplitMix64 rng(11);
  for (int i = 0; i < 997; ++i) {
    text += "u" + std::to_string(rng.next_below(50)) + "\tc" +
            std::to_string(rng.next_below(20)) + "\t" +
            std::to_string(1400000000 + i) + "\t0\n";
  }
  const auto base = parse_text(text, LogFormat::Tsv, 1);
  for (int workers : {2, 3, 7}) {
    const auto recs = parse_text(text, LogFormat::Tsv, workers);
    REQUIRE(recs.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(recs[i].user == base[i].user);
      CHECK(recs[i].community == base[i].community);
      CHECK(recs[i].timestamp == base[i].timestamp);
    }
  }
}

TEST_CASE("vocabulary keeps the top_n by count", "[ingest][vocab]") {
  std::vector<InteractionRecord> records;
  for (int i = 0; i < 5; ++i) records.push_back(rec("u1", "c_five", ts_of(2016, 1)));
  for (int i = 0; i < 3; ++i) records.push_back(rec("u2", "c_three", ts_of(2016, 1)));
  records.push_back(rec("u3", "c_one", ts_of(2016, 1)));

  VocabCoverage cov;
  const auto vocab = build_vocab(records, 2, &cov);
  REQUIRE(vocab.size() == 2);
  CHECK(vocab.entries[0].id == "c_five");
  CHECK(vocab.entries[0].count == 5);
  CHECK(vocab.entries[1].id == "c_three");
  CHECK_THAT(cov.comments, WithinAbs(8.0 / 9.0, 1e-12));
  CHECK(cov.total_comments == 9);
}

TEST_CASE("oversized top_n keeps everything", "[ingest][vocab]") {
  std::vector<InteractionRecord> records{rec("u", "a", ts_of(2016, 1)),
                                         rec("u", "b", ts_of(2016, 1))};
  VocabCoverage cov;
  const auto vocab = build_vocab(records, 100, &cov);
  CHECK(vocab.size() == 2);
  CHECK_THAT(cov.comments, WithinAbs(1.0, 1e-15));
  CHECK_THAT(cov.users, WithinAbs(1.0, 1e-15));
}

TEST_CASE("vocabulary ties break lexicographically and order-independently",
          "[ingest][vocab]") {
  std::vector<InteractionRecord> records{
      rec("u1", "zeta", ts_of(2016, 1)), rec("u2", "alpha", ts_of(2016, 1)),
      rec("u3", "mid", ts_of(2016, 2))};
  const auto v1 = build_vocab(records, 2);
  REQUIRE(v1.size() == 2);
  CHECK(v1.entries[0].id == "alpha");
  CHECK(v1.entries[1].id == "mid");

  std::reverse(records.begin(), records.end());
  const auto v2 = build_vocab(records, 2);
  CHECK(v2.hash() == v1.hash());
  CHECK(v2.entries[0].id == v1.entries[0].id);
}

TEST_CASE("empty input cannot build a vocabulary", "[ingest][vocab]") {
  CHECK_THROWS_AS(build_vocab({}, 5), InputError);
  std::vector<InteractionRecord> one{rec("u", "c", ts_of(2016, 1))};
  CHECK_THROWS_AS(build_vocab(one, 0), ConfigError);
}

TEST_CASE("pair counts aggregate per user-community", "[ingest][pairs]") {
  std::vector<InteractionRecord> records;
  for (int i = 0; i < 10; ++i) records.push_back(rec("u", "c", ts_of(2016, 1)));
  const auto vocab = build_vocab(records, 10);
  const auto table = count_pairs(records, vocab);
  REQUIRE(table.triples.size() == 1);
  CHECK(table.triples[0].count == 10);
  CHECK(table.total == 10);
}

TEST_CASE("out-of-vocab communities are dropped and counted", "[ingest][pairs]") {
  std::vector<InteractionRecord> records;
  for (int i = 0; i < 3; ++i) records.push_back(rec("u", "big", ts_of(2016, 1)));
  records.push_back(rec("v", "small", ts_of(2016, 1)));
  const auto vocab = build_vocab(records, 1);
  const auto table = count_pairs(records, vocab);
  REQUIRE(table.triples.size() == 1);
  CHECK(vocab.id_of(table.triples[0].community) == "big");
  CHECK(table.dropped_out_of_vocab == 1);
  // user "v" only ever commented out of vocab: no row for it
  for (const auto& t : table.triples)
    CHECK(table.users->ids[static_cast<std::size_t>(t.user)] != "v");
}

TEST_CASE("disjoint users have independent marginals", "[ingest][pairs]") {
  std::vector<InteractionRecord> records{
      rec("a", "c1", ts_of(2016, 1)), rec("a", "c1", ts_of(2016, 2)),
      rec("b", "c2", ts_of(2016, 1))};
  const auto vocab = build_vocab(records, 10);
  const auto table = count_pairs(records, vocab);
  std::map<std::string, std::uint64_t> user_totals;
  for (std::size_t u = 0; u < table.user_totals.size(); ++u)
    user_totals[table.users->ids[u]] = table.user_totals[u];
  CHECK(user_totals["a"] == 2);
  CHECK(user_totals["b"] == 1);
  std::map<std::string, std::uint64_t> comm_totals;
  for (std::size_t c = 0; c < table.community_totals.size(); ++c)
    comm_totals[vocab.id_of(static_cast<std::int32_t>(c))] =
        table.community_totals[c];
  CHECK(comm_totals["c1"] == 2);
  CHECK(comm_totals["c2"] == 1);
}

TEST_CASE("deleted comments never enter the pair table", "[ingest][pairs]") {
  std::vector<InteractionRecord> records{
      rec("a", "c", ts_of(2016, 1)),
      rec("", "c", ts_of(2016, 1), /*deleted=*/true)};
  const auto vocab = build_vocab(records, 10);
  const auto table = count_pairs(records, vocab);
  CHECK(table.total == 1);
  CHECK(table.dropped_deleted == 1);
}

TEST_CASE("conservation: counts plus drops equals record count",
          "[ingest][invariant]") {
  SplitMix64 rng(5);
  std::string text;
  std::size_t lines = 0;
  for (int i = 0; i < 500; ++i, ++lines) {
    if (rng.next_below(10) == 0) {
      text += "garbage line\n";
      continue;
    }
    const bool deleted = rng.next_below(8) == 0;
    text += (deleted ? std::string("[deleted]")
                     : "u" + std::to_string(rng.next_below(40)));
    text += "\tc" + std::to_string(rng.next_below(30)) + "\t" +
            std::to_string(1400000000 + i) + "\t" + (deleted ? "1" : "0") + "\n";
  }
  ParseStats stats;
  const auto records = parse_text(text, LogFormat::Tsv, 1, &stats);
  CHECK(stats.lines == lines);
  CHECK(stats.records + stats.malformed == stats.lines);

  const auto vocab = build_vocab(records, 12);
  const auto table = count_pairs(records, vocab);
  std::uint64_t counted = 0;
  for (const auto& t : table.triples) counted += t.count;
  CHECK(counted == table.total);
  CHECK(table.total + table.dropped_out_of_vocab + table.dropped_deleted ==
        records.size());

  std::uint64_t user_sum = 0, comm_sum = 0;
  for (auto v : table.user_totals) user_sum += v;
  for (auto v : table.community_totals) comm_sum += v;
  CHECK(user_sum == table.total);
  CHECK(comm_sum == table.total);
}

TEST_CASE("monthly activity groups by UTC month", "[ingest][monthly]") {
  std::vector<InteractionRecord> records{
      rec("u", "c", 1456704000),  // 2016-02-29
      rec("u", "c", ts_of(2016, 2, 1)),
      rec("u", "c", ts_of(2016, 2, 10)),
      rec("u", "c", ts_of(2016, 3, 1))};
  const auto vocab = build_vocab(records, 10);
  const auto table = monthly_activity(records, vocab);
  REQUIRE(table.rows.size() == 2);
  CHECK(month_label(table.rows[0].month) == "2016-02");
  CHECK(table.rows[0].count == 3);
  CHECK(month_label(table.rows[1].month) == "2016-03");
}

TEST_CASE("monthly activity retains deleted rows under the sentinel",
          "[ingest][monthly]") {
  std::vector<InteractionRecord> records{
      rec("u", "c", ts_of(2016, 1)),
      rec("", "c", ts_of(2016, 1), /*deleted=*/true),
      rec("", "c", ts_of(2016, 1), /*deleted=*/true)};
  const auto vocab = build_vocab(records, 10);
  const auto table = monthly_activity(records, vocab);
  std::uint64_t total = 0;
  bool saw_sentinel = false;
  for (const auto& r : table.rows) {
    total += r.count;
    if (r.user == MonthlyActivityTable::kDeletedSentinel) {
      saw_sentinel = true;
      CHECK(r.count == 2);
    }
  }
  CHECK(total == records.size());
  CHECK(saw_sentinel);
}

TEST_CASE("user index is lexicographic", "[ingest][users]") {
  std::vector<InteractionRecord> records{rec("zoe", "c", ts_of(2016, 1)),
                                         rec("abe", "c", ts_of(2016, 1)),
                                         rec("mia", "c", ts_of(2016, 1))};
  const auto users = build_user_index(records);
  REQUIRE(users->ids.size() == 3);
  CHECK(users->ids[0] == "abe");
  CHECK(users->ids[1] == "mia");
  CHECK(users->ids[2] == "zoe");
}

TEST_CASE("pair tables persist and reload faithfully", "[ingest][roundtrip]") {
  TempDir dir;
  SplitMix64 rng(9);
  std::vector<InteractionRecord> records;
  for (int i = 0; i < 300; ++i)
    records.push_back(rec("u" + std::to_string(rng.next_below(20)),
                          "c" + std::to_string(rng.next_below(8)),
                          ts_of(2016, 1 + static_cast<int>(rng.next_below(12)))));
  VocabCoverage cov;
  const auto vocab = build_vocab(records, 8, &cov);
  const auto table = count_pairs(records, vocab);

  ParseStats stats;
  stats.lines = stats.records = records.size();
  save_pair_table(table, vocab, dir.file("pairs.tsv"));
  save_pair_table_meta(table, vocab, cov, stats, dir.file("pairs.meta.json"));

  const auto vocab2 = load_vocab_from_meta(dir.file("pairs.meta.json"));
  CHECK(vocab2.hash() == vocab.hash());
  const auto table2 = load_pair_table(dir.file("pairs.tsv"), vocab2);
  CHECK(table2.total == table.total);
  REQUIRE(table2.triples.size() == table.triples.size());
  for (std::size_t i = 0; i < table.triples.size(); ++i) {
    CHECK(table2.users->ids[static_cast<std::size_t>(table2.triples[i].user)] ==
          table.users->ids[static_cast<std::size_t>(table.triples[i].user)]);
    CHECK(table2.triples[i].community == table.triples[i].community);
    CHECK(table2.triples[i].count == table.triples[i].count);
  }
  CHECK(table2.community_totals == table.community_totals);
}

TEST_CASE("pair table loader rejects corrupt rows", "[ingest][roundtrip]") {
  TempDir dir;
  const auto vocab = testutil::vocab_of_ids({"c"});

  testutil::write_file(dir.file("dup.tsv"), "u\tc\t1\nu\tc\t2\n");
  CHECK_THROWS_AS(load_pair_table(dir.file("dup.tsv"), vocab), InputError);

  testutil::write_file(dir.file("zero.tsv"), "u\tc\t0\n");
  CHECK_THROWS_AS(load_pair_table(dir.file("zero.tsv"), vocab), InputError);

  testutil::write_file(dir.file("oov.tsv"), "u\tnot_in_vocab\t1\n");
  CHECK_THROWS_AS(load_pair_table(dir.file("oov.tsv"), vocab), InputError);
}

TEST_CASE("tables are identical across ingest worker counts",
          "[ingest][invariant]") {
  TempDir dir;
  SplitMix64 rng(13);
  std::string text;
  for (int i = 0; i < 2000; ++i)
    text += "u" + std::to_string(rng.next_below(100)) + "\tc" +
            std::to_string(rng.next_below(25)) + "\t" +
            std::to_string(1400000000 + 9000 * i) + "\t0\n";

  std::string previous;
  for (int workers : {1, 4}) {
    const auto records = parse_text(text, LogFormat::Tsv, workers);
    const auto vocab = build_vocab(records, 25);
    const auto table = count_pairs(records, vocab);
    const auto path = dir.file("pairs_" + std::to_string(workers) + ".tsv");
    save_pair_table(table, vocab, path);
    const auto bytes = testutil::slurp(path);
    if (!previous.empty()) CHECK(bytes == previous);
    previous = bytes;
  }
}

TEST_CASE("gz end-to-end ingest", "[ingest][gzip]") {
  TempDir dir;
  const auto path = dir.file("log.tsv.gz");
  const std::string payload =
      "a\tc1\t1500000000\t0\n"
      "b\tc1\t1500000001\t0\n";
  gzFile gz = gzopen(path.c_str(), "wb");
  REQUIRE(gz != nullptr);
  REQUIRE(gzwrite(gz, payload.data(), static_cast<unsigned>(payload.size())) ==
          static_cast<int>(payload.size()));
  gzclose(gz);

  const auto records = read_interactions(path, LogFormat::Tsv);
  REQUIRE(records.size() == 2);
  CHECK(records[0].user == "a");
  CHECK(records[1].user == "b");
}
