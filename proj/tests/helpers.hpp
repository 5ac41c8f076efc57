#pragma once

// Shared fixtures for the test suite: temp dirs, tiny corpora, hand-built
// embeddings and comment tables, and exact orthogonal transforms.

#include <commdim/commdim.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace testutil {

namespace fs = std::filesystem;
using namespace commdim;

class TempDir {
 public:
  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    SplitMix64 rng(static_cast<std::uint64_t>(
        std::chrono::steady_clock::now().time_since_epoch().count()));
    path_ = fs::temp_directory_path() /
            ("commdim_test_" + hex64(rng.next()) + "_" +
             std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  fs::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string slurp(const std::string& path) {
  return read_file_bytes(path);
}

// ---- Calendar ------------------------------------------------------------

// Inverse of civil_from_days (Howard Hinnant's days_from_civil).
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline std::int64_t ts_of(int year, unsigned month, unsigned day = 15) {
  return days_from_civil(year, month, day) * 86400;
}

// ---- Records -------------------------------------------------------------

inline InteractionRecord rec(std::string user, std::string community,
                             std::int64_t ts, bool deleted = false) {
  InteractionRecord r;
  r.user = deleted ? std::string(kDeletedUser) : std::move(user);
  r.community = std::move(community);
  r.timestamp = ts;
  r.deleted = deleted;
  return r;
}

inline std::string to_tsv(std::span<const InteractionRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += r.deleted ? kDeletedUser : r.user;
    out += '\t';
    out += r.community;
    out += '\t';
    out += std::to_string(r.timestamp);
    out += '\t';
    out += r.deleted ? '1' : '0';
    out += '\n';
  }
  return out;
}

// ---- Embeddings ----------------------------------------------------------

inline Vocabulary vocab_of_ids(const std::vector<std::string>& ids) {
  Vocabulary v;
  for (const auto& id : ids) {
    v.index.emplace(id, static_cast<std::int32_t>(v.entries.size()));
    v.entries.push_back({id, 0});
  }
  return v;
}

inline Embedding make_embedding(const std::vector<std::string>& ids,
                                const std::vector<std::vector<double>>& rows) {
  Embedding emb;
  emb.vocab = vocab_of_ids(ids);
  emb.dim = static_cast<int>(rows.at(0).size());
  emb.word_vectors.reserve(ids.size() * rows[0].size());
  for (const auto& row : rows) {
    if (row.size() != rows[0].size()) throw std::logic_error("ragged rows");
    for (double v : row) emb.word_vectors.push_back(static_cast<float>(v));
  }
  if (rows.size() != ids.size()) throw std::logic_error("row/id mismatch");
  return emb;
}

inline Embedding random_embedding(const std::vector<std::string>& ids, int dim,
                                  std::uint64_t seed, double scale = 1.0) {
  SplitMix64 rng(seed);
  std::vector<std::vector<double>> rows(ids.size(), std::vector<double>(dim));
  for (auto& row : rows)
    for (auto& v : row) v = (rng.next_double() * 2.0 - 1.0) * scale;
  return make_embedding(ids, rows);
}

// Exact orthogonal transform: a signed permutation of coordinates composed
// with quarter-turn plane rotations. Every operation is exact in floating
// point, so scores must match to the last bit.
inline void apply_exact_rotation(Embedding& emb, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const int dim = emb.dim;
  std::vector<int> perm(dim);
  for (int i = 0; i < dim; ++i) perm[i] = i;
  for (int i = dim - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[i], perm[j]);
  }
  std::vector<int> sign(dim);
  for (auto& s : sign) s = (rng.next() & 1) ? -1 : 1;
  std::vector<std::pair<int, int>> turns;
  for (int t = 0; t < dim; ++t) {
    const auto i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(dim)));
    const auto j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(dim)));
    if (i != j) turns.emplace_back(i, j);
  }
  std::vector<float> tmp(dim);
  for (std::size_t r = 0; r < emb.size(); ++r) {
    float* row = emb.word_vectors.data() + r * static_cast<std::size_t>(dim);
    for (int i = 0; i < dim; ++i) tmp[i] = static_cast<float>(sign[i]) * row[perm[i]];
    for (const auto& [i, j] : turns) {
      const float x = tmp[i], y = tmp[j];
      tmp[i] = -y;  // quarter turn in the (i, j) plane
      tmp[j] = x;
    }
    std::copy(tmp.begin(), tmp.end(), row);
  }
}

// Inexact but properly random rotation: a product of seeded Givens rotations
// applied in double precision. Good to ~1e-6 on unit-scale data.
inline void apply_givens_rotation(Embedding& emb, std::uint64_t seed,
                                  int sweeps = 4) {
  SplitMix64 rng(seed);
  const int dim = emb.dim;
  struct Givens {
    int i, j;
    double c, s;
  };
  std::vector<Givens> rots;
  for (int t = 0; t < sweeps * dim; ++t) {
    const auto i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(dim)));
    auto j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(dim)));
    if (i == j) j = (j + 1) % dim;
    const double theta = rng.next_double() * 6.283185307179586;
    rots.push_back({i, j, std::cos(theta), std::sin(theta)});
  }
  std::vector<double> tmp(dim);
  for (std::size_t r = 0; r < emb.size(); ++r) {
    float* row = emb.word_vectors.data() + r * static_cast<std::size_t>(dim);
    for (int i = 0; i < dim; ++i) tmp[i] = row[i];
    for (const auto& g : rots) {
      const double x = tmp[g.i], y = tmp[g.j];
      tmp[g.i] = g.c * x - g.s * y;
      tmp[g.j] = g.s * x + g.c * y;
    }
    for (int i = 0; i < dim; ++i) row[i] = static_cast<float>(tmp[i]);
  }
}

// ---- Score tables ----------------------------------------------------------

inline ScoreTable make_scores(const std::vector<std::string>& ids,
                              const std::vector<double>& raw,
                              const std::string& name = "test") {
  ScoreTable t;
  t.dimension = name;
  t.ids = ids;
  t.raw = raw;
  t.mu = mean(raw);
  t.sigma = stdev_population(raw);
  t.z = zscores(raw);
  const auto ranks = average_ranks(raw);
  t.percentile.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    t.percentile[i] = 100.0 * ranks[i] / static_cast<double>(raw.size());
  return t;
}

// z values set directly; raw mirrors z. For ops that read .z only.
inline ScoreTable make_scores_z(const std::vector<std::string>& ids,
                                const std::vector<double>& z,
                                const std::string& name = "test") {
  ScoreTable t;
  t.dimension = name;
  t.ids = ids;
  t.raw = z;
  t.z = z;
  t.mu = mean(z);
  t.sigma = stdev_population(z);
  const auto ranks = average_ranks(z);
  t.percentile.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    t.percentile[i] = 100.0 * ranks[i] / static_cast<double>(z.size());
  return t;
}

inline PoliticalSubset subset_of(const std::vector<std::string>& ids) {
  PoliticalSubset s;
  s.communities = ids;
  std::sort(s.communities.begin(), s.communities.end());
  for (const auto& id : s.communities) s.members.insert(id);
  s.vocab_size = ids.size();
  s.coverage = 1.0;
  return s;
}

// ---- Political comment tables -----------------------------------------------

// Mirrors political_comments' construction: dense ids over sorted names,
// rows sorted by (month, user, community), deleted rows keep their z.
class CommentsBuilder {
 public:
  CommentsBuilder& add(const std::string& user, const std::string& community,
                       std::int32_t month, double z, bool deleted = false) {
    rows_.push_back({user, community, month, z, deleted});
    return *this;
  }

  PoliticalComments build() const {
    PoliticalComments out;
    std::set<std::string> users, comms;
    for (const auto& r : rows_) {
      if (!r.deleted) users.insert(r.user);
      comms.insert(r.community);
    }
    out.users.assign(users.begin(), users.end());
    out.communities.assign(comms.begin(), comms.end());
    auto user_id = [&](const std::string& u) {
      return static_cast<std::int32_t>(
          std::lower_bound(out.users.begin(), out.users.end(), u) -
          out.users.begin());
    };
    auto comm_id = [&](const std::string& c) {
      return static_cast<std::int32_t>(
          std::lower_bound(out.communities.begin(), out.communities.end(), c) -
          out.communities.begin());
    };
    for (const auto& r : rows_) {
      PoliticalComments::Row row;
      row.user = r.deleted ? PoliticalComments::kDeletedUserId : user_id(r.user);
      row.community = comm_id(r.community);
      row.month = r.month;
      row.z = r.z;
      row.bin = static_cast<std::int8_t>(bin_from_z(r.z));
      out.rows.push_back(row);
    }
    std::sort(out.rows.begin(), out.rows.end(), [](const auto& a, const auto& b) {
      return std::tie(a.month, a.user, a.community) <
             std::tie(b.month, b.user, b.community);
    });
    return out;
  }

 private:
  struct Raw {
    std::string user, community;
    std::int32_t month;
    double z;
    bool deleted;
  };
  std::vector<Raw> rows_;
};

// Random comment stream over a handful of communities with fixed z-scores;
// used by the additivity and row-stochasticity property tests.
inline PoliticalComments random_comments(std::uint64_t seed,
                                         std::size_t n_rows = 400,
                                         int n_users = 12,
                                         int n_communities = 6,
                                         int n_months = 30) {
  SplitMix64 rng(seed);
  std::vector<double> zs(n_communities);
  for (auto& z : zs) z = rng.next_double() * 6.0 - 3.0;
  const std::int32_t base = month_index_of(ts_of(2014, 1));
  CommentsBuilder b;
  for (std::size_t i = 0; i < n_rows; ++i) {
    const auto u = rng.next_below(static_cast<std::uint64_t>(n_users));
    const auto c = rng.next_below(static_cast<std::uint64_t>(n_communities));
    const auto m = rng.next_below(static_cast<std::uint64_t>(n_months));
    const bool deleted = rng.next_double() < 0.05;
    b.add("u" + std::to_string(u), "c" + std::to_string(c),
          base + static_cast<std::int32_t>(m), zs[c], deleted);
  }
  return b.build();
}

}  // namespace testutil
