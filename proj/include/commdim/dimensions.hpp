#pragma once

// Social dimensions: a seed community pair is augmented with nearest-neighbor
// pairs pointing the same way, averaged into a difference direction (and the
// paired "-ness" sum direction), then every community is scored along it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "commdim/common.hpp"
#include "commdim/embed.hpp"
#include "commdim/geometry.hpp"
#include "commdim/io.hpp"
#include "commdim/stats.hpp"

namespace commdim {

// Positive scores lean toward `right`.
struct SeedPair {
  std::string left;
  std::string right;
};

inline constexpr double kDegenerateNorm = 1e-8;

struct CandidatePair {
  std::int32_t c1;  // plays the left role
  std::int32_t c2;  // plays the right role
};

// All ordered pairs (c1, c2) with c2 among the nn_k nearest neighbors of c1:
// exactly |V| * nn_k pairs.
inline std::vector<CandidatePair> candidate_pairs(const Embedding& emb,
                                                  const UnitMatrix& units,
                                                  std::size_t nn_k = 10) {
  if (nn_k + 1 > emb.size())
    throw ConfigError("nn_k must be smaller than the vocabulary size");
  std::vector<CandidatePair> out;
  out.reserve(emb.size() * nn_k);
  for (std::size_t c = 0; c < emb.size(); ++c) {
    const auto ns =
        nearest_neighbors(emb, units, static_cast<std::int32_t>(c), nn_k);
    for (const auto& n : ns)
      out.push_back({static_cast<std::int32_t>(c), n.community});
  }
  return out;
}

inline std::vector<CandidatePair> candidate_pairs(const Embedding& emb,
                                                  std::size_t nn_k = 10) {
  const auto units = unit_rows(emb);
  return candidate_pairs(emb, units, nn_k);
}

// Greedy augmentation: candidates ranked by cosine between their member
// difference and the seed difference (unit-normalized members); the best pair
// disjoint from everything already chosen is taken until k pairs total exist.
inline std::vector<SeedPair> augment_seed(const Embedding& emb,
                                          const UnitMatrix& units,
                                          const SeedPair& seed,
                                          std::span<const CandidatePair> candidates,
                                          std::size_t k = 10) {
  if (k < 1) throw ConfigError("k must be >= 1");
  if (seed.left == seed.right)
    throw ConfigError("seed pair must name two distinct communities");
  const std::int32_t s1 = emb.vocab.dense_id(seed.left);
  const std::int32_t s2 = emb.vocab.dense_id(seed.right);
  if (s1 < 0) throw InputError("seed community not in vocabulary: " + seed.left);
  if (s2 < 0) throw InputError("seed community not in vocabulary: " + seed.right);

  const int dim = units.dim;
  std::vector<double> seed_diff(static_cast<std::size_t>(dim));
  {
    const auto a = units.row(static_cast<std::size_t>(s1));
    const auto b = units.row(static_cast<std::size_t>(s2));
    for (int i = 0; i < dim; ++i) {
      const auto s = static_cast<std::size_t>(i);
      seed_diff[s] = static_cast<double>(b[s]) - a[s];
    }
  }
  double sn = 0.0;
  for (double x : seed_diff) sn += x * x;
  sn = std::sqrt(sn);
  if (!(sn > kDegenerateNorm))
    throw NumericError("seed pair vectors coincide; direction undefined");

  struct Ranked {
    double score;
    std::int32_t c1, c2;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(candidates.size());
  for (const auto& cand : candidates) {
    const auto a = units.row(static_cast<std::size_t>(cand.c1));
    const auto b = units.row(static_cast<std::size_t>(cand.c2));
    double d = 0.0, nn = 0.0;
    for (int i = 0; i < dim; ++i) {
      const auto s = static_cast<std::size_t>(i);
      const double diff = static_cast<double>(b[s]) - a[s];
      d += diff * seed_diff[s];
      nn += diff * diff;
    }
    if (!(nn > 0.0)) continue;  // coincident members carry no direction
    ranked.push_back({d / (std::sqrt(nn) * sn), cand.c1, cand.c2});
  }
  std::sort(ranked.begin(), ranked.end(), [&](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    const auto& a1 = emb.vocab.id_of(a.c1);
    const auto& b1 = emb.vocab.id_of(b.c1);
    if (a1 != b1) return a1 < b1;
    return emb.vocab.id_of(a.c2) < emb.vocab.id_of(b.c2);
  });

  std::vector<SeedPair> out{seed};
  std::unordered_set<std::int32_t> used{s1, s2};
  for (const auto& r : ranked) {
    if (out.size() == k) break;
    if (used.count(r.c1) || used.count(r.c2)) continue;
    out.push_back({emb.vocab.id_of(r.c1), emb.vocab.id_of(r.c2)});
    used.insert(r.c1);
    used.insert(r.c2);
  }
  if (out.size() < k)
    throw InputError("seed augmentation exhausted: found " +
                     std::to_string(out.size() - 1) + " disjoint pairs, needed " +
                     std::to_string(k - 1));
  return out;
}

inline std::vector<SeedPair> augment_seed(const Embedding& emb,
                                          const SeedPair& seed,
                                          std::size_t k = 10,
                                          std::size_t nn_k = 10) {
  const auto units = unit_rows(emb);
  const auto candidates = candidate_pairs(emb, units, nn_k);
  return augment_seed(emb, units, seed, candidates, k);
}

struct SocialDimension {
  std::string name;
  std::vector<SeedPair> pairs;       // first entry is the user seed
  std::vector<double> diff_vector;   // mean of unit(right) - unit(left)
  std::vector<double> ness_vector;   // mean of unit(right) + unit(left)
  bool degenerate = false;           // ||diff|| <= kDegenerateNorm
  std::vector<double> pair_cosines;  // each pair's diff vs the mean diff
  std::string embedding_hash;

  std::size_t k() const { return pairs.size(); }
};

inline SocialDimension build_dimension(const Embedding& emb,
                                       const UnitMatrix& units,
                                       std::span<const SeedPair> pairs,
                                       const std::string& name) {
  if (pairs.empty()) throw ConfigError("a dimension needs at least one pair");
  std::unordered_set<std::string> used;
  for (const auto& p : pairs) {
    if (!used.insert(p.left).second)
      throw InputError("community appears in more than one pair: " + p.left);
    if (!used.insert(p.right).second)
      throw InputError("community appears in more than one pair: " + p.right);
  }
  const int dim = units.dim;
  SocialDimension out;
  out.name = name;
  out.pairs.assign(pairs.begin(), pairs.end());
  out.diff_vector.assign(static_cast<std::size_t>(dim), 0.0);
  out.ness_vector.assign(static_cast<std::size_t>(dim), 0.0);
  out.embedding_hash = hex64(emb.vocab.hash());
  std::vector<std::vector<double>> pair_diffs;
  pair_diffs.reserve(pairs.size());
  for (const auto& p : pairs) {
    const std::int32_t l = emb.vocab.dense_id(p.left);
    const std::int32_t r = emb.vocab.dense_id(p.right);
    if (l < 0) throw InputError("pair community not in vocabulary: " + p.left);
    if (r < 0) throw InputError("pair community not in vocabulary: " + p.right);
    const auto a = units.row(static_cast<std::size_t>(l));
    const auto b = units.row(static_cast<std::size_t>(r));
    std::vector<double> d(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
      const auto s = static_cast<std::size_t>(i);
      d[s] = static_cast<double>(b[s]) - a[s];
      out.diff_vector[s] += d[s];
      out.ness_vector[s] += static_cast<double>(b[s]) + a[s];
    }
    pair_diffs.push_back(std::move(d));
  }
  const double inv_k = 1.0 / static_cast<double>(pairs.size());
  for (auto& x : out.diff_vector) x *= inv_k;
  for (auto& x : out.ness_vector) x *= inv_k;
  double dn = 0.0;
  for (double x : out.diff_vector) dn += x * x;
  dn = std::sqrt(dn);
  out.degenerate = !(dn > kDegenerateNorm);
  if (!out.degenerate) {
    for (const auto& d : pair_diffs) {
      double num = 0.0, pn = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        num += d[i] * out.diff_vector[i];
        pn += d[i] * d[i];
      }
      out.pair_cosines.push_back(pn > 0.0 ? num / (std::sqrt(pn) * dn) : 0.0);
    }
  }
  return out;
}

inline SocialDimension build_dimension(const Embedding& emb,
                                       std::span<const SeedPair> pairs,
                                       const std::string& name) {
  const auto units = unit_rows(emb);
  return build_dimension(emb, units, pairs, name);
}

// ---- Scoring -------------------------------------------------------------------

struct ScoreTable {
  std::string dimension;
  std::vector<std::string> ids;  // vocab order at scoring time
  std::vector<double> raw;
  std::vector<double> z;
  std::vector<double> percentile;  // (0, 100], average-rank convention
  double mu = 0.0;
  double sigma = 0.0;

  std::size_t size() const { return ids.size(); }
};

// Scores a vector set along `axis`: raw = unit(c) . axis, z against the full
// population (population SD), percentile = 100 * average rank / |V|.
inline ScoreTable score_along(const Embedding& emb, const UnitMatrix& units,
                              std::span<const double> axis,
                              const std::string& name) {
  if (axis.size() != static_cast<std::size_t>(units.dim))
    throw NumericError("axis dimension mismatch");
  double an = 0.0;
  for (double x : axis) an += x * x;
  if (!(std::sqrt(an) > kDegenerateNorm))
    throw NumericError("degenerate dimension: near-zero direction vector");
  ScoreTable t;
  t.dimension = name;
  t.ids.reserve(emb.size());
  t.raw.resize(emb.size());
  for (std::size_t v = 0; v < emb.size(); ++v) {
    t.ids.push_back(emb.vocab.entries[v].id);
    const auto row = units.row(v);
    double s = 0.0;
    for (int i = 0; i < units.dim; ++i)
      s += axis[static_cast<std::size_t>(i)] * row[static_cast<std::size_t>(i)];
    t.raw[v] = s;
  }
  t.mu = mean(t.raw);
  t.sigma = stdev_population(t.raw);
  if (!(t.sigma > 0.0))
    throw NumericError("all communities score identically; z undefined");
  t.z.resize(t.raw.size());
  for (std::size_t v = 0; v < t.raw.size(); ++v)
    t.z[v] = (t.raw[v] - t.mu) / t.sigma;
  const auto ranks = average_ranks(t.raw);
  t.percentile.resize(ranks.size());
  const double n = static_cast<double>(ranks.size());
  for (std::size_t v = 0; v < ranks.size(); ++v)
    t.percentile[v] = 100.0 * ranks[v] / n;
  return t;
}

inline ScoreTable score_communities(const Embedding& emb,
                                    const UnitMatrix& units,
                                    const SocialDimension& dim) {
  if (dim.degenerate)
    throw NumericError("dimension '" + dim.name + "' is degenerate");
  return score_along(emb, units, dim.diff_vector, dim.name);
}

inline ScoreTable score_communities(const Embedding& emb,
                                    const SocialDimension& dim) {
  const auto units = unit_rows(emb);
  return score_communities(emb, units, dim);
}

// The paired "-ness" scores along the sum direction.
inline ScoreTable score_ness(const Embedding& emb, const UnitMatrix& units,
                             const SocialDimension& dim) {
  return score_along(emb, units, dim.ness_vector, dim.name + "-ness");
}

inline ScoreTable score_ness(const Embedding& emb, const SocialDimension& dim) {
  const auto units = unit_rows(emb);
  return score_ness(emb, units, dim);
}

inline Correlation compare_dimensions(const ScoreTable& a, const ScoreTable& b) {
  if (a.ids != b.ids)
    throw InputError("score tables cover different vocabularies");
  Correlation c = pearson_test(a.raw, b.raw);
  return c;
}

// ---- Persistence ------------------------------------------------------------------

inline void save_dimension(const SocialDimension& dim, const std::string& path) {
  nlohmann::json j;
  j["format"] = "commdim-dimension";
  j["version"] = 1;
  j["name"] = dim.name;
  j["k"] = dim.pairs.size();
  auto& pairs = j["pairs"] = nlohmann::json::array();
  for (const auto& p : dim.pairs)
    pairs.push_back({{"left", p.left}, {"right", p.right}});
  j["diff"] = dim.diff_vector;
  j["ness"] = dim.ness_vector;
  j["degenerate"] = dim.degenerate;
  j["pair_cosines"] = dim.pair_cosines;
  j["embedding_hash"] = dim.embedding_hash;
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

inline SocialDimension load_dimension(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dimension file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("bad dimension JSON in " + path + ": " + e.what());
  }
  SocialDimension dim;
  try {
    dim.name = j.at("name").get<std::string>();
    for (const auto& p : j.at("pairs"))
      dim.pairs.push_back({p.at("left").get<std::string>(),
                           p.at("right").get<std::string>()});
    dim.diff_vector = j.at("diff").get<std::vector<double>>();
    dim.ness_vector = j.at("ness").get<std::vector<double>>();
    dim.degenerate = j.value("degenerate", false);
    if (j.contains("pair_cosines"))
      dim.pair_cosines = j["pair_cosines"].get<std::vector<double>>();
    dim.embedding_hash = j.value("embedding_hash", "");
  } catch (const nlohmann::json::exception& e) {
    throw InputError("incomplete dimension JSON in " + path + ": " + e.what());
  }
  if (dim.diff_vector.size() != dim.ness_vector.size())
    throw InputError("dimension vectors disagree on length in " + path);
  if (dim.pairs.empty()) throw InputError("dimension has no pairs: " + path);
  return dim;
}

inline void save_score_table(const ScoreTable& t, const std::string& path) {
  auto out = open_output(path);
  out << "community_id\traw\tz\tpercentile\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << t.ids[i] << '\t' << fmt_g(t.raw[i], 12) << '\t' << fmt_g(t.z[i], 12)
        << '\t' << fmt_g(t.percentile[i], 12) << '\n';
  }
  if (!out) throw InputError("write failure: " + path);
}

inline ScoreTable load_score_table(const std::string& path) {
  auto src = open_lines(path);
  std::string line;
  if (!src->next(line)) throw InputError("empty score table: " + path);
  ScoreTable t;
  t.dimension = path;
  std::vector<std::string_view> fields;
  while (src->next(line)) {
    if (line.empty()) continue;
    if (split_tsv(line, fields) != 4)
      throw InputError("bad score table row in " + path + ": " + line);
    t.ids.emplace_back(fields[0]);
    char* end = nullptr;
    const std::string raw(fields[1]), z(fields[2]), pct(fields[3]);
    t.raw.push_back(std::strtod(raw.c_str(), &end));
    t.z.push_back(std::strtod(z.c_str(), &end));
    t.percentile.push_back(std::strtod(pct.c_str(), &end));
  }
  if (t.ids.empty()) throw InputError("score table has no rows: " + path);
  t.mu = mean(t.raw);
  t.sigma = stdev_population(t.raw);
  return t;
}

// ---- Word scores -----------------------------------------------------------------

struct WordUsageTable {
  std::uint32_t cap = 100;
  struct Row {
    std::string word;
    std::string community;
    double weight;  // capped contribution summed over commenters
  };
  std::vector<Row> rows;  // sorted by (word, community)
};

inline WordUsageTable load_word_usage(const std::string& path,
                                      std::uint32_t cap = 100) {
  if (cap < 1) throw ConfigError("usage cap must be >= 1");
  auto src = open_lines(path);
  std::string line;
  std::vector<std::string_view> fields;
  // (word, community, commenter) -> raw count; capped when flattened.
  StringMap<std::uint64_t> counts;
  bool first = true;
  while (src->next(line)) {
    if (line.empty() || line[0] == '#') continue;
    if (split_tsv(line, fields) != 4)
      throw InputError("word usage rows need 4 tab-separated fields: " + line);
    if (first && fields[0] == "word") {
      first = false;
      continue;  // optional header
    }
    first = false;
    std::int64_t n = 0;
    if (!parse_i64(fields[3], n) || n < 0)
      throw InputError("bad usage count: " + line);
    std::string key;
    key.reserve(fields[0].size() + fields[1].size() + fields[2].size() + 2);
    key.append(fields[0]);
    key.push_back('\t');
    key.append(fields[1]);
    key.push_back('\t');
    key.append(fields[2]);
    counts[key] += static_cast<std::uint64_t>(n);
  }
  StringMap<double> weights;  // word \t community -> capped sum
  for (const auto& [key, n] : counts) {
    const auto cut = key.rfind('\t');
    const std::string pair_key = key.substr(0, cut);
    weights[pair_key] +=
        static_cast<double>(std::min<std::uint64_t>(n, cap));
  }
  WordUsageTable table;
  table.cap = cap;
  table.rows.reserve(weights.size());
  for (const auto& [key, w] : weights) {
    const auto cut = key.find('\t');
    table.rows.push_back({key.substr(0, cut), key.substr(cut + 1), w});
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const auto& a, const auto& b) {
              if (a.word != b.word) return a.word < b.word;
              return a.community < b.community;
            });
  return table;
}

struct WordScore {
  std::string word;
  double score;
  double total_weight;
};

// score(w) = sum_c weight(w,c) * z(c) / sum_c weight(w,c).
inline std::vector<WordScore> word_scores(const WordUsageTable& usage,
                                          const ScoreTable& scores) {
  StringMap<double> z_by_id;
  for (std::size_t i = 0; i < scores.size(); ++i)
    z_by_id.emplace(scores.ids[i], scores.z[i]);
  std::vector<WordScore> out;
  std::size_t i = 0;
  while (i < usage.rows.size()) {
    std::size_t j = i;
    double num = 0.0, den = 0.0;
    while (j < usage.rows.size() && usage.rows[j].word == usage.rows[i].word) {
      const auto it = z_by_id.find(usage.rows[j].community);
      if (it == z_by_id.end())
        throw InputError("word usage references unscored community: " +
                         usage.rows[j].community);
      num += usage.rows[j].weight * it->second;
      den += usage.rows[j].weight;
      ++j;
    }
    if (!(den > 0.0))
      throw InputError("word has zero total usage weight: " +
                       usage.rows[i].word);
    out.push_back({usage.rows[i].word, num / den, den});
    i = j;
  }
  return out;
}

inline void save_word_scores(std::span<const WordScore> scores,
                             const std::string& path) {
  auto out = open_output(path);
  out << "word\tscore\ttotal_weight\n";
  for (const auto& w : scores)
    out << w.word << '\t' << fmt_g(w.score, 12) << '\t'
        << fmt_g(w.total_weight, 12) << '\n';
  if (!out) throw InputError("write failure: " + path);
}

}  // namespace commdim
