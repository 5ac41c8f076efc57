#pragma once

// Political-activity measurements: subset selection by -ness cutoff, partisan
// bins, self-selection distributions, time series, cohorts, the new/existing
// decomposition, wing subsets, implicit/explicit first-activity timing, and
// the deleted-comment distribution comparison.
//
// Every operation here is a pure aggregation over an immutable comment table;
// all outputs are emitted in sorted key order.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "commdim/common.hpp"
#include "commdim/dimensions.hpp"
#include "commdim/geometry.hpp"
#include "commdim/ingest.hpp"
#include "commdim/io.hpp"
#include "commdim/stats.hpp"

namespace commdim {

// ---- Bins and wings -----------------------------------------------------------

// Bin boundaries are closed toward the center: z = -2 lands in -1's bin,
// z = 1 lands in the center bin.
inline int bin_from_z(double z) {
  if (z < -2.0) return -2;
  if (z < -1.0) return -1;
  if (z <= 1.0) return 0;
  if (z <= 2.0) return 1;
  return 2;
}

inline std::size_t bin_index(int bin) {
  return static_cast<std::size_t>(bin + 2);
}
inline int bin_value(std::size_t index) { return static_cast<int>(index) - 2; }

enum class Wing { Left, Center, Right };

inline Wing wing_of(double z) {
  if (z <= -1.0) return Wing::Left;
  if (z >= 1.0) return Wing::Right;
  return Wing::Center;
}

inline Wing parse_wing(std::string_view tag) {
  if (tag == "left") return Wing::Left;
  if (tag == "center") return Wing::Center;
  if (tag == "right") return Wing::Right;
  throw ConfigError("unknown wing tag: " + std::string(tag) +
                    " (expected left, center, or right)");
}

inline std::string wing_tag(Wing w) {
  switch (w) {
    case Wing::Left: return "left";
    case Wing::Center: return "center";
    case Wing::Right: return "right";
  }
  return "center";
}

// ---- Political subset -----------------------------------------------------------

struct PoliticalSubset {
  std::vector<std::string> communities;  // sorted lexicographically
  double ness_cutoff = 0.0;              // on the -ness z scale
  double coverage = 0.0;
  std::int32_t politics_cluster = -1;
  std::size_t vocab_size = 0;
  StringSet members;

  bool contains(std::string_view id) const {
    return members.find(id) != members.end();
  }
  std::size_t size() const { return communities.size(); }
};

// Cutoff = the highest -ness value that still keeps `coverage` of the
// Politics cluster at or above it; the subset is every community anywhere
// scoring at or above that cutoff.
inline PoliticalSubset select_political(const ScoreTable& ness,
                                        const Clustering& clustering,
                                        std::int32_t politics_cluster,
                                        double coverage = 0.8) {
  if (!(coverage > 0.0 && coverage <= 1.0))
    throw ConfigError("coverage must be in (0, 1]");
  if (clustering.assignment.size() != ness.size())
    throw InputError("clustering does not cover the scored vocabulary");
  std::vector<double> cluster_scores;
  for (std::size_t v = 0; v < ness.size(); ++v)
    if (clustering.assignment[v] == politics_cluster)
      cluster_scores.push_back(ness.z[v]);
  if (cluster_scores.empty())
    throw InputError("politics cluster " + std::to_string(politics_cluster) +
                     " is empty");
  std::sort(cluster_scores.begin(), cluster_scores.end(), std::greater<>());
  const std::size_t need = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(coverage * static_cast<double>(cluster_scores.size()))));
  const double cutoff = cluster_scores[std::min(need, cluster_scores.size()) - 1];

  PoliticalSubset subset;
  subset.ness_cutoff = cutoff;
  subset.coverage = coverage;
  subset.politics_cluster = politics_cluster;
  subset.vocab_size = ness.size();
  for (std::size_t v = 0; v < ness.size(); ++v) {
    if (ness.z[v] >= cutoff) subset.communities.push_back(ness.ids[v]);
  }
  std::sort(subset.communities.begin(), subset.communities.end());
  for (const auto& id : subset.communities) subset.members.insert(id);
  return subset;
}

inline void save_political_subset(const PoliticalSubset& subset,
                                  const ScoreTable& ness,
                                  const std::string& path) {
  StringMap<double> z_of;
  for (std::size_t i = 0; i < ness.size(); ++i)
    z_of.emplace(ness.ids[i], ness.z[i]);
  auto out = open_output(path);
  out << "# ness_cutoff=" << fmt_g(subset.ness_cutoff, 12)
      << "\n# coverage=" << fmt_g(subset.coverage, 12)
      << "\n# politics_cluster=" << subset.politics_cluster
      << "\n# subset_fraction="
      << fmt_g(static_cast<double>(subset.size()) /
                   static_cast<double>(subset.vocab_size),
               12)
      << '\n';
  out << "community_id\tness_z\n";
  for (const auto& id : subset.communities)
    out << id << '\t' << fmt_g(z_of.at(id), 12) << '\n';
  if (!out) throw InputError("write failure: " + path);
}

// ---- Comment table ----------------------------------------------------------------

// One row per comment in a political community. Deleted comments keep their
// row (user = kDeletedUserId) so distribution comparisons stay possible; all
// author-attributed analyses skip them.
struct PoliticalComments {
  static constexpr std::int32_t kDeletedUserId = -1;
  struct Row {
    std::int32_t user;
    std::int32_t community;  // index into communities
    std::int32_t month;
    double z;
    std::int8_t bin;
  };
  std::vector<std::string> users;        // sorted; dense ids for authors
  std::vector<std::string> communities;  // sorted; political communities seen
  std::vector<Row> rows;                 // sorted by (month, user, community)
};

inline PoliticalComments political_comments(
    std::span<const InteractionRecord> records, const PoliticalSubset& subset,
    const ScoreTable& partisan) {
  StringMap<double> z_of;
  for (std::size_t i = 0; i < partisan.size(); ++i)
    z_of.emplace(partisan.ids[i], partisan.z[i]);

  PoliticalComments out;
  {
    StringSet users, comms;
    for (const auto& r : records) {
      if (!subset.contains(r.community)) continue;
      comms.insert(r.community);
      if (!r.deleted) users.insert(r.user);
    }
    out.users.assign(users.begin(), users.end());
    std::sort(out.users.begin(), out.users.end());
    out.communities.assign(comms.begin(), comms.end());
    std::sort(out.communities.begin(), out.communities.end());
  }
  StringMap<std::int32_t> user_id, comm_id;
  for (std::size_t i = 0; i < out.users.size(); ++i)
    user_id.emplace(out.users[i], static_cast<std::int32_t>(i));
  for (std::size_t i = 0; i < out.communities.size(); ++i)
    comm_id.emplace(out.communities[i], static_cast<std::int32_t>(i));

  out.rows.reserve(records.size() / 4 + 1);
  for (const auto& r : records) {
    if (!subset.contains(r.community)) continue;
    const auto zit = z_of.find(r.community);
    if (zit == z_of.end())
      throw InputError("political community missing from score table: " +
                       r.community);
    PoliticalComments::Row row;
    row.user = r.deleted ? PoliticalComments::kDeletedUserId
                         : user_id.find(r.user)->second;
    row.community = comm_id.find(r.community)->second;
    row.month = month_index_of(r.timestamp);
    row.z = zit->second;
    row.bin = static_cast<std::int8_t>(bin_from_z(row.z));
    out.rows.push_back(row);
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const auto& a, const auto& b) {
              if (a.month != b.month) return a.month < b.month;
              if (a.user != b.user) return a.user < b.user;
              return a.community < b.community;
            });
  return out;
}

// Same dense user/community ids, rows restricted to one wing.
inline PoliticalComments wing_filter(const PoliticalComments& comments,
                                     Wing wing) {
  PoliticalComments out;
  out.users = comments.users;
  out.communities = comments.communities;
  for (const auto& r : comments.rows)
    if (wing_of(r.z) == wing) out.rows.push_back(r);
  return out;
}

// ---- Bin distributions -------------------------------------------------------------

struct BinShares {
  std::array<double, 5> p{};
  std::uint64_t n = 0;
};

inline BinShares overall_bin_shares(const PoliticalComments& comments) {
  BinShares s;
  std::array<std::uint64_t, 5> counts{};
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    ++counts[bin_index(r.bin)];
    ++s.n;
  }
  if (s.n == 0) throw InputError("no non-deleted political comments");
  for (std::size_t b = 0; b < 5; ++b)
    s.p[b] = static_cast<double>(counts[b]) / static_cast<double>(s.n);
  return s;
}

struct MonthlyBinShares {
  std::int32_t month;
  BinShares shares;
};

inline std::vector<MonthlyBinShares> monthly_bin_shares(
    const PoliticalComments& comments) {
  std::map<std::int32_t, std::array<std::uint64_t, 5>> by_month;
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    ++by_month[r.month][bin_index(r.bin)];
  }
  std::vector<MonthlyBinShares> out;
  out.reserve(by_month.size());
  for (const auto& [month, counts] : by_month) {
    MonthlyBinShares m;
    m.month = month;
    for (std::size_t b = 0; b < 5; ++b) m.shares.n += counts[b];
    for (std::size_t b = 0; b < 5; ++b)
      m.shares.p[b] =
          static_cast<double>(counts[b]) / static_cast<double>(m.shares.n);
    out.push_back(m);
  }
  return out;
}

// ---- Self-selection -----------------------------------------------------------------

// f(b1, b2): comment-weighted average share of b1 authors' activity in b2.
struct SelectionMatrix {
  std::array<std::array<double, 5>, 5> f{};  // [b1][b2]
  std::array<bool, 5> defined{};             // b1 rows with any author mass
  std::array<std::uint64_t, 5> bin_comments{};
};

namespace detail {

struct AuthorBins {
  std::vector<std::array<std::uint64_t, 5>> counts;  // per user
  std::vector<std::uint64_t> totals;
};

inline AuthorBins author_bin_counts(const PoliticalComments& comments) {
  AuthorBins ab;
  ab.counts.assign(comments.users.size(), {});
  ab.totals.assign(comments.users.size(), 0);
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    ++ab.counts[static_cast<std::size_t>(r.user)][bin_index(r.bin)];
    ++ab.totals[static_cast<std::size_t>(r.user)];
  }
  return ab;
}

}  // namespace detail

inline SelectionMatrix selection_matrix(const PoliticalComments& comments) {
  const auto ab = detail::author_bin_counts(comments);
  SelectionMatrix m;
  std::array<double, 5> denom{};
  for (std::size_t u = 0; u < ab.counts.size(); ++u) {
    if (ab.totals[u] == 0) continue;
    const double inv_total = 1.0 / static_cast<double>(ab.totals[u]);
    for (std::size_t b1 = 0; b1 < 5; ++b1) {
      const double w = static_cast<double>(ab.counts[u][b1]);
      if (w == 0.0) continue;
      denom[b1] += w;
      m.bin_comments[b1] += ab.counts[u][b1];
      for (std::size_t b2 = 0; b2 < 5; ++b2)
        m.f[b1][b2] += w * static_cast<double>(ab.counts[u][b2]) * inv_total;
    }
  }
  for (std::size_t b1 = 0; b1 < 5; ++b1) {
    m.defined[b1] = denom[b1] > 0.0;
    if (m.defined[b1])
      for (std::size_t b2 = 0; b2 < 5; ++b2) m.f[b1][b2] /= denom[b1];
  }
  return m;
}

inline std::array<double, 5> selection_distribution(
    const PoliticalComments& comments, int b1) {
  if (b1 < -2 || b1 > 2) throw ConfigError("bin must be in {-2..2}");
  const auto m = selection_matrix(comments);
  if (!m.defined[bin_index(b1)])
    throw InputError("no authors with activity in bin " + std::to_string(b1));
  return m.f[bin_index(b1)];
}

// Community-level variant: average activity distribution of a community's
// authors, weighted by their comment counts in that community.
struct CommunitySelection {
  std::int32_t community;
  std::array<double, 5> f{};
  std::uint64_t comments = 0;
};

inline std::vector<CommunitySelection> community_selection(
    const PoliticalComments& comments) {
  const auto ab = detail::author_bin_counts(comments);
  std::unordered_map<std::uint64_t, std::uint64_t> per_user_comm;
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    const std::uint64_t key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r.user)) << 32) |
        static_cast<std::uint32_t>(r.community);
    ++per_user_comm[key];
  }
  std::vector<CommunitySelection> out(comments.communities.size());
  std::vector<double> denom(comments.communities.size(), 0.0);
  for (std::size_t c = 0; c < out.size(); ++c)
    out[c].community = static_cast<std::int32_t>(c);
  for (const auto& [key, n] : per_user_comm) {
    const auto u = static_cast<std::size_t>(key >> 32);
    const auto c = static_cast<std::size_t>(key & 0xffffffffu);
    const double w = static_cast<double>(n);
    const double inv_total = 1.0 / static_cast<double>(ab.totals[u]);
    denom[c] += w;
    out[c].comments += n;
    for (std::size_t b2 = 0; b2 < 5; ++b2)
      out[c].f[b2] += w * static_cast<double>(ab.counts[u][b2]) * inv_total;
  }
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (denom[c] > 0.0)
      for (std::size_t b2 = 0; b2 < 5; ++b2) out[c].f[b2] /= denom[c];
  }
  std::erase_if(out, [](const CommunitySelection& s) { return s.comments == 0; });
  return out;
}

// ---- Time series -------------------------------------------------------------------

struct MonthlyMean {
  std::int32_t month;
  double mean_abs_z;
  std::uint64_t n;
};

inline std::vector<MonthlyMean> monthly_polarization(
    const PoliticalComments& comments) {
  std::map<std::int32_t, std::pair<double, std::uint64_t>> acc;
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    auto& [s, n] = acc[r.month];
    s += std::fabs(r.z);
    ++n;
  }
  std::vector<MonthlyMean> out;
  out.reserve(acc.size());
  for (const auto& [month, sn] : acc)
    out.push_back({month, sn.first / static_cast<double>(sn.second), sn.second});
  return out;
}

struct ExtremeShare {
  std::int32_t month;
  double left;   // fraction with z < -threshold
  double right;  // fraction with z > +threshold
  double total;
  std::uint64_t n;
};

inline std::vector<ExtremeShare> extreme_share(const PoliticalComments& comments,
                                               double threshold = 3.0) {
  if (!(threshold > 0.0)) throw ConfigError("extreme threshold must be > 0");
  struct Acc {
    std::uint64_t left = 0, right = 0, n = 0;
  };
  std::map<std::int32_t, Acc> acc;
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    auto& a = acc[r.month];
    ++a.n;
    if (r.z < -threshold) ++a.left;
    if (r.z > threshold) ++a.right;
  }
  std::vector<ExtremeShare> out;
  out.reserve(acc.size());
  for (const auto& [month, a] : acc) {
    const double n = static_cast<double>(a.n);
    out.push_back({month, a.left / n, a.right / n,
                   (a.left + a.right) / n, a.n});
  }
  return out;
}

// ---- Cohorts ----------------------------------------------------------------------

// First (non-deleted) political month per user; the cohort label is its year.
struct FirstActivity {
  std::vector<std::int32_t> first_month;  // by user dense id
  std::int32_t cohort_year(std::int32_t user) const {
    return year_of_month(first_month[static_cast<std::size_t>(user)]);
  }
};

inline FirstActivity first_activity(const PoliticalComments& comments) {
  FirstActivity fa;
  fa.first_month.assign(comments.users.size(),
                        std::numeric_limits<std::int32_t>::max());
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    auto& m = fa.first_month[static_cast<std::size_t>(r.user)];
    m = std::min(m, r.month);
  }
  return fa;
}

struct CohortCell {
  std::int32_t cohort_year;
  std::int32_t month;
  double mean_abs_z;
  std::uint64_t n;
};

inline std::vector<CohortCell> cohort_series(const PoliticalComments& comments,
                                             const FirstActivity& fa) {
  std::map<std::pair<std::int32_t, std::int32_t>,
           std::pair<double, std::uint64_t>>
      acc;
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    auto& [s, n] = acc[{fa.cohort_year(r.user), r.month}];
    s += std::fabs(r.z);
    ++n;
  }
  std::vector<CohortCell> out;
  out.reserve(acc.size());
  for (const auto& [key, sn] : acc)
    out.push_back({key.first, key.second,
                   sn.first / static_cast<double>(sn.second), sn.second});
  return out;
}

struct AgeCell {
  std::int32_t key;  // account age in months, or active-month count
  double mean_abs_z;
  std::uint64_t n;
};

// Keyed by months since the user's first political month (0 at the first).
inline std::vector<AgeCell> account_age_series(const PoliticalComments& comments,
                                               const FirstActivity& fa) {
  std::map<std::int32_t, std::pair<double, std::uint64_t>> acc;
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    const std::int32_t age =
        r.month - fa.first_month[static_cast<std::size_t>(r.user)];
    auto& [s, n] = acc[age];
    s += std::fabs(r.z);
    ++n;
  }
  std::vector<AgeCell> out;
  out.reserve(acc.size());
  for (const auto& [key, sn] : acc)
    out.push_back({key, sn.first / static_cast<double>(sn.second), sn.second});
  return out;
}

// Keyed by the count of the author's distinct active months so far,
// inclusive: the first active month has key 1.
inline std::vector<AgeCell> active_months_series(
    const PoliticalComments& comments) {
  std::unordered_map<std::int32_t, std::vector<std::int32_t>> months_of;
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    months_of[r.user].push_back(r.month);
  }
  std::unordered_map<std::int32_t, std::unordered_map<std::int32_t, std::int32_t>>
      rank_of;
  for (auto& [u, ms] : months_of) {
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    auto& ranks = rank_of[u];
    for (std::size_t i = 0; i < ms.size(); ++i)
      ranks.emplace(ms[i], static_cast<std::int32_t>(i + 1));
  }
  std::map<std::int32_t, std::pair<double, std::uint64_t>> acc;
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    auto& [s, n] = acc[rank_of[r.user][r.month]];
    s += std::fabs(r.z);
    ++n;
  }
  std::vector<AgeCell> out;
  out.reserve(acc.size());
  for (const auto& [key, sn] : acc)
    out.push_back({key, sn.first / static_cast<double>(sn.second), sn.second});
  return out;
}

// ---- Within-user dynamics ------------------------------------------------------------

struct UserMonthScore {
  std::int32_t user;
  std::int32_t month;
  double mean_z;
  std::uint64_t n;
};

inline std::vector<UserMonthScore> user_month_scores(
    const PoliticalComments& comments, std::uint64_t min_comments = 10) {
  if (min_comments < 1) throw ConfigError("min_comments must be >= 1");
  std::map<std::pair<std::int32_t, std::int32_t>,
           std::pair<double, std::uint64_t>>
      acc;
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    auto& [s, n] = acc[{r.user, r.month}];
    s += r.z;
    ++n;
  }
  std::vector<UserMonthScore> out;
  for (const auto& [key, sn] : acc) {
    if (sn.second < min_comments) continue;
    out.push_back({key.first, key.second,
                   sn.first / static_cast<double>(sn.second), sn.second});
  }
  return out;
}

struct MonthPairCell {
  std::int32_t m1;
  std::int32_t m2;
  std::uint64_t n;          // users scored in both months
  double fraction;          // |mean z| rose by >= delta * SD
  double pearson_r;         // NaN when undefined (n < 2 or zero variance)
};

// The delta threshold is in units of the population SD of |mean z| over all
// user-months in the table.
inline std::vector<MonthPairCell> polarization_matrix(
    std::span<const UserMonthScore> scores, double delta = 1.0) {
  if (scores.empty()) throw InputError("no user-month scores");
  std::vector<double> all_q;
  all_q.reserve(scores.size());
  for (const auto& s : scores) all_q.push_back(std::fabs(s.mean_z));
  const double sd = stdev_population(all_q);

  std::map<std::int32_t, std::unordered_map<std::int32_t, double>> by_month;
  for (const auto& s : scores)
    by_month[s.month].emplace(s.user, std::fabs(s.mean_z));

  std::vector<MonthPairCell> out;
  for (auto it1 = by_month.begin(); it1 != by_month.end(); ++it1) {
    for (auto it2 = std::next(it1); it2 != by_month.end(); ++it2) {
      std::vector<double> q1, q2;
      for (const auto& [u, q] : it1->second) {
        const auto f = it2->second.find(u);
        if (f == it2->second.end()) continue;
        q1.push_back(q);
        q2.push_back(f->second);
      }
      if (q1.empty()) continue;  // undefined cell: omitted, not zero
      std::uint64_t rose = 0;
      for (std::size_t i = 0; i < q1.size(); ++i)
        if (q2[i] - q1[i] >= delta * sd) ++rose;
      double r = std::numeric_limits<double>::quiet_NaN();
      if (q1.size() >= 2) {
        try {
          r = pearson(q1, q2);
        } catch (const NumericError&) {
        }
      }
      out.push_back({it1->first, it2->first, q1.size(),
                     static_cast<double>(rose) / static_cast<double>(q1.size()),
                     r});
    }
  }
  return out;
}

inline std::optional<MonthPairCell> polarization_fraction(
    std::span<const UserMonthScore> scores, std::int32_t t1, std::int32_t t2,
    double delta = 1.0) {
  for (const auto& cell : polarization_matrix(scores, delta))
    if (cell.m1 == t1 && cell.m2 == t2) return cell;
  return std::nullopt;
}

// ---- New/existing decomposition --------------------------------------------------------

enum class Period { Year, Month };

inline Period parse_period(std::string_view tag) {
  if (tag == "year") return Period::Year;
  if (tag == "month") return Period::Month;
  throw ConfigError("unknown period tag: " + std::string(tag) +
                    " (expected year or month)");
}

struct DecompositionRow {
  std::int32_t period;  // calendar year, or month index
  std::uint64_t n_new = 0;
  std::uint64_t n_existing = 0;
  std::uint64_t n_total = 0;
  double z_new = 0.0;  // mean |z|; NaN when the group is empty
  double z_existing = 0.0;
  double z_total = 0.0;
  double z_prev = 0.0;
  double delta_n = 0.0;
  double delta_e = 0.0;
};

// A comment is "new" when its author's first political comment is less than
// `lag` months before it: month(c) - first_month(author) < lag.
inline std::vector<DecompositionRow> decompose_change(
    const PoliticalComments& comments, const FirstActivity& fa,
    Period period = Period::Year, int lag_months = 12) {
  if (lag_months < 1) throw ConfigError("lag must be >= 1 month");
  struct Acc {
    std::uint64_t n_new = 0, n_exist = 0;
    double s_new = 0.0, s_exist = 0.0;
  };
  std::map<std::int32_t, Acc> acc;
  for (const auto& r : comments.rows) {
    if (r.user == PoliticalComments::kDeletedUserId) continue;
    const std::int32_t key =
        period == Period::Year ? year_of_month(r.month) : r.month;
    const bool is_new =
        r.month - fa.first_month[static_cast<std::size_t>(r.user)] < lag_months;
    auto& a = acc[key];
    const double az = std::fabs(r.z);
    if (is_new) {
      ++a.n_new;
      a.s_new += az;
    } else {
      ++a.n_exist;
      a.s_exist += az;
    }
  }
  if (acc.size() < 2)
    throw InputError("decomposition needs at least two periods with comments");
  const std::int32_t lo = acc.begin()->first;
  const std::int32_t hi = acc.rbegin()->first;
  for (std::int32_t p = lo; p <= hi; ++p)
    if (acc.find(p) == acc.end())
      throw InputError("period " + std::to_string(p) +
                       " has no political comments");
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  std::vector<DecompositionRow> out;
  double z_prev = kNan;
  bool have_prev = false;
  for (const auto& [p, a] : acc) {
    const std::uint64_t n_total = a.n_new + a.n_exist;
    const double z_total =
        (a.s_new + a.s_exist) / static_cast<double>(n_total);
    if (have_prev) {
      DecompositionRow row;
      row.period = p;
      row.n_new = a.n_new;
      row.n_existing = a.n_exist;
      row.n_total = n_total;
      row.z_new = a.n_new ? a.s_new / static_cast<double>(a.n_new) : kNan;
      row.z_existing =
          a.n_exist ? a.s_exist / static_cast<double>(a.n_exist) : kNan;
      row.z_total = z_total;
      row.z_prev = z_prev;
      row.delta_n = a.n_new == 0
                        ? 0.0
                        : (static_cast<double>(a.n_new) /
                           static_cast<double>(n_total)) *
                              (row.z_new - z_prev);
      row.delta_e = a.n_exist == 0
                        ? 0.0
                        : (static_cast<double>(a.n_exist) /
                           static_cast<double>(n_total)) *
                              (row.z_existing - z_prev);
      out.push_back(row);
    }
    z_prev = z_total;
    have_prev = true;
  }
  return out;
}

// ---- Implicit vs explicit first activity ------------------------------------------------

struct ImplicitExplicitResult {
  Wing wing = Wing::Left;
  double z_threshold = 2.0;
  std::size_t n_explicit_communities = 0;
  std::size_t n_implicit_communities = 0;
  struct Cell {
    std::int32_t m_explicit;
    std::int32_t m_implicit;
    std::uint64_t users;
  };
  std::vector<Cell> matrix;  // sorted by (m_explicit, m_implicit)
  struct SeriesPoint {
    std::int32_t m_explicit;
    std::uint64_t users;        // users whose first explicit month is this
    std::uint64_t prior_users;  // of those, m_implicit < m_explicit
    double fraction;
  };
  std::vector<SeriesPoint> series;
};

// Implicit: below the -ness cutoff but at least z_threshold out on the wing's
// side. Explicit: political-subset members of the same wing.
inline ImplicitExplicitResult implicit_explicit(
    std::span<const InteractionRecord> records, const ScoreTable& partisan,
    const ScoreTable& ness, const PoliticalSubset& subset, Wing wing,
    double z_threshold = 2.0) {
  if (wing == Wing::Center)
    throw ConfigError("implicit/explicit analysis is per wing: left or right");
  if (!(z_threshold > 0.0)) throw ConfigError("z threshold must be > 0");
  if (partisan.ids != ness.ids)
    throw InputError("partisan and -ness tables cover different vocabularies");
  enum class Kind : std::uint8_t { None, Implicit, Explicit };
  StringMap<Kind> kind_of;
  ImplicitExplicitResult out;
  out.wing = wing;
  out.z_threshold = z_threshold;
  for (std::size_t i = 0; i < partisan.size(); ++i) {
    const double z = partisan.z[i];
    const bool on_wing_side =
        wing == Wing::Left ? z <= -z_threshold : z >= z_threshold;
    if (subset.contains(partisan.ids[i])) {
      if (wing_of(z) == wing) {
        kind_of.emplace(partisan.ids[i], Kind::Explicit);
        ++out.n_explicit_communities;
      }
    } else if (on_wing_side) {
      kind_of.emplace(partisan.ids[i], Kind::Implicit);
      ++out.n_implicit_communities;
    }
  }
  constexpr std::int32_t kNone = std::numeric_limits<std::int32_t>::max();
  StringMap<std::pair<std::int32_t, std::int32_t>> firsts;  // (m_E, m_I)
  for (const auto& r : records) {
    if (r.deleted) continue;
    const auto it = kind_of.find(r.community);
    if (it == kind_of.end()) continue;
    auto& [me, mi] = firsts.try_emplace(r.user, kNone, kNone).first->second;
    const std::int32_t m = month_index_of(r.timestamp);
    if (it->second == Kind::Explicit)
      me = std::min(me, m);
    else
      mi = std::min(mi, m);
  }
  std::map<std::pair<std::int32_t, std::int32_t>, std::uint64_t> cells;
  std::map<std::int32_t, std::pair<std::uint64_t, std::uint64_t>> series;
  for (const auto& [user, fm] : firsts) {
    const auto [me, mi] = fm;
    if (me == kNone) continue;  // never explicitly active
    auto& [total, prior] = series[me];
    ++total;
    if (mi != kNone) {
      ++cells[{me, mi}];
      if (mi < me) ++prior;  // same-month first activity is not prior
    }
  }
  for (const auto& [key, n] : cells)
    out.matrix.push_back({key.first, key.second, n});
  for (const auto& [me, tp] : series)
    out.series.push_back({me, tp.first, tp.second,
                          static_cast<double>(tp.second) /
                              static_cast<double>(tp.first)});
  return out;
}

// ---- Deleted-comment comparison ----------------------------------------------------------

struct DeletedComparison {
  double mean_kept = 0.0;
  double mean_deleted = 0.0;
  double diff_means = 0.0;  // kept minus deleted
  double kl_bits = 0.0;     // D_KL(kept || deleted)
  std::uint64_t n_kept = 0;
  std::uint64_t n_deleted = 0;
  double bin_width = 0.25;
  double epsilon = 1e-9;
};

// Histogram over fixed-width z bins; zero-mass Q bins are floored at epsilon
// (no renormalization) so the divergence stays finite.
inline DeletedComparison compare_deleted(const PoliticalComments& comments,
                                         double bin_width = 0.25,
                                         double epsilon = 1e-9) {
  if (!(bin_width > 0.0)) throw ConfigError("bin width must be > 0");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  std::vector<double> kept, deleted;
  for (const auto& r : comments.rows) {
    (r.user == PoliticalComments::kDeletedUserId ? deleted : kept)
        .push_back(r.z);
  }
  if (kept.empty()) throw InputError("no non-deleted political comments");
  if (deleted.empty()) throw InputError("no deleted political comments");
  DeletedComparison out;
  out.bin_width = bin_width;
  out.epsilon = epsilon;
  out.n_kept = kept.size();
  out.n_deleted = deleted.size();
  out.mean_kept = mean(kept);
  out.mean_deleted = mean(deleted);
  out.diff_means = out.mean_kept - out.mean_deleted;

  auto bin_of = [bin_width](double z) {
    return static_cast<std::int64_t>(std::floor(z / bin_width));
  };
  std::map<std::int64_t, std::pair<std::uint64_t, std::uint64_t>> hist;
  for (double z : kept) ++hist[bin_of(z)].first;
  for (double z : deleted) ++hist[bin_of(z)].second;
  double kl = 0.0;
  for (const auto& [bin, pq] : hist) {
    if (pq.first == 0) continue;
    const double p = static_cast<double>(pq.first) /
                     static_cast<double>(out.n_kept);
    double q = static_cast<double>(pq.second) /
               static_cast<double>(out.n_deleted);
    if (q == 0.0) q = epsilon;
    kl += p * std::log2(p / q);
  }
  out.kl_bits = kl;
  return out;
}

// ---- Table writers -----------------------------------------------------------------

using Provenance = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::ofstream open_table(const std::string& path,
                                const Provenance& provenance) {
  auto out = open_output(path);
  for (const auto& [k, v] : provenance) out << "# " << k << '=' << v << '\n';
  return out;
}

}  // namespace detail

inline void save_bin_shares(const BinShares& overall,
                            std::span<const MonthlyBinShares> monthly,
                            const std::string& path,
                            const Provenance& provenance) {
  auto out = detail::open_table(path, provenance);
  out << "month\tbin_-2\tbin_-1\tbin_0\tbin_+1\tbin_+2\tcomments\n";
  auto row = [&](const std::string& label, const BinShares& s) {
    out << label;
    for (std::size_t b = 0; b < 5; ++b) out << '\t' << fmt_g(s.p[b], 12);
    out << '\t' << s.n << '\n';
  };
  row("overall", overall);
  for (const auto& m : monthly) row(month_label(m.month), m.shares);
  if (!out) throw InputError("write failure: " + path);
}

inline void save_selection_matrix(const SelectionMatrix& m,
                                  const std::string& path,
                                  const Provenance& provenance) {
  auto out = detail::open_table(path, provenance);
  out << "b1\tf_-2\tf_-1\tf_0\tf_+1\tf_+2\tcomments\n";
  for (std::size_t b1 = 0; b1 < 5; ++b1) {
    if (!m.defined[b1]) continue;
    out << bin_value(b1);
    for (std::size_t b2 = 0; b2 < 5; ++b2) out << '\t' << fmt_g(m.f[b1][b2], 12);
    out << '\t' << m.bin_comments[b1] << '\n';
  }
  if (!out) throw InputError("write failure: " + path);
}

inline void save_community_selection(std::span<const CommunitySelection> rows,
                                     const PoliticalComments& comments,
                                     const std::string& path,
                                     const Provenance& provenance) {
  auto out = detail::open_table(path, provenance);
  out << "community_id\tf_-2\tf_-1\tf_0\tf_+1\tf_+2\tcomments\n";
  for (const auto& r : rows) {
    out << comments.communities[static_cast<std::size_t>(r.community)];
    for (std::size_t b = 0; b < 5; ++b) out << '\t' << fmt_g(r.f[b], 12);
    out << '\t' << r.comments << '\n';
  }
  if (!out) throw InputError("write failure: " + path);
}

inline void save_monthly_polarization(std::span<const MonthlyMean> rows,
                                      const std::string& path,
                                      const Provenance& provenance) {
  auto out = detail::open_table(path, provenance);
  out << "month\tmean_abs_z\tcomments\n";
  for (const auto& r : rows)
    out << month_label(r.month) << '\t' << fmt_g(r.mean_abs_z, 12) << '\t'
        << r.n << '\n';
  if (!out) throw InputError("write failure: " + path);
}

inline void save_extreme_share(std::span<const ExtremeShare> rows,
                               const std::string& path,
                               const Provenance& provenance) {
  auto out = detail::open_table(path, provenance);
  out << "month\tleft\tright\ttotal\tcomments\n";
  for (const auto& r : rows)
    out << month_label(r.month) << '\t' << fmt_g(r.left, 12) << '\t'
        << fmt_g(r.right, 12) << '\t' << fmt_g(r.total, 12) << '\t' << r.n
        << '\n';
  if (!out) throw InputError("write failure: " + path);
}

inline void save_cohort_series(std::span<const CohortCell> rows,
                               const std::string& path,
                               const Provenance& provenance) {
  auto out = detail::open_table(path, provenance);
  out << "cohort_year\tmonth\tmean_abs_z\tcomments\n";
  for (const auto& r : rows)
    out << r.cohort_year << '\t' << month_label(r.month) << '\t'
        << fmt_g(r.mean_abs_z, 12) << '\t' << r.n << '\n';
  if (!out) throw InputError("write failure: " + path);
}

inline void save_age_series(std::span<const AgeCell> rows,
                            const std::string& key_name,
                            const std::string& path,
                            const Provenance& provenance) {
  auto out = detail::open_table(path, provenance);
  out << key_name << "\tmean_abs_z\tcomments\n";
  for (const auto& r : rows)
    out << r.key << '\t' << fmt_g(r.mean_abs_z, 12) << '\t' << r.n << '\n';
  if (!out) throw InputError("write failure: " + path);
}

inline void save_user_month_scores(std::span<const UserMonthScore> rows,
                                   const PoliticalComments& comments,
                                   const std::string& path,
                                   const Provenance& provenance) {
  auto out = detail::open_table(path, provenance);
  out << "user_id\tmonth\tmean_z\tcomments\n";
  for (const auto& r : rows)
    out << comments.users[static_cast<std::size_t>(r.user)] << '\t'
        << month_label(r.month) << '\t' << fmt_g(r.mean_z, 12) << '\t' << r.n
        << '\n';
  if (!out) throw InputError("write failure: " + path);
}

inline void save_polarization_matrix(std::span<const MonthPairCell> rows,
                                     const std::string& path,
                                     const Provenance& provenance) {
  auto out = detail::open_table(path, provenance);
  out << "month_1\tmonth_2\tusers\tfraction\tpearson_r\n";
  for (const auto& r : rows) {
    out << month_label(r.m1) << '\t' << month_label(r.m2) << '\t' << r.n
        << '\t' << fmt_g(r.fraction, 12) << '\t';
    if (std::isnan(r.pearson_r))
      out << "nan";
    else
      out << fmt_g(r.pearson_r, 12);
    out << '\n';
  }
  if (!out) throw InputError("write failure: " + path);
}

inline void save_decomposition(std::span<const DecompositionRow> rows,
                               Period period, const std::string& path,
                               const Provenance& provenance) {
  auto out = detail::open_table(path, provenance);
  out << "period\tn_new\tn_existing\tn_total\tz_new\tz_existing\tz_total\t"
         "z_prev\tdelta_n\tdelta_e\n";
  auto num = [](double v) {
    return std::isnan(v) ? std::string("nan") : fmt_g(v, 17);
  };
  for (const auto& r : rows) {
    out << (period == Period::Year ? std::to_string(r.period)
                                   : month_label(r.period))
        << '\t' << r.n_new << '\t' << r.n_existing << '\t' << r.n_total << '\t'
        << num(r.z_new) << '\t' << num(r.z_existing) << '\t' << num(r.z_total)
        << '\t' << num(r.z_prev) << '\t' << num(r.delta_n) << '\t'
        << num(r.delta_e) << '\n';
  }
  if (!out) throw InputError("write failure: " + path);
}

inline void save_implicit_explicit(const ImplicitExplicitResult& res,
                                   const std::string& matrix_path,
                                   const std::string& series_path,
                                   const Provenance& provenance) {
  {
    auto out = detail::open_table(matrix_path, provenance);
    out << "m_explicit\tm_implicit\tusers\n";
    for (const auto& c : res.matrix)
      out << month_label(c.m_explicit) << '\t' << month_label(c.m_implicit)
          << '\t' << c.users << '\n';
    if (!out) throw InputError("write failure: " + matrix_path);
  }
  {
    auto out = detail::open_table(series_path, provenance);
    out << "m_explicit\tusers\tprior_users\tfraction\n";
    for (const auto& p : res.series)
      out << month_label(p.m_explicit) << '\t' << p.users << '\t'
          << p.prior_users << '\t' << fmt_g(p.fraction, 12) << '\n';
    if (!out) throw InputError("write failure: " + series_path);
  }
}

inline void save_deleted_comparison(const DeletedComparison& d,
                                    const std::string& path,
                                    const Provenance& provenance) {
  auto out = detail::open_table(path, provenance);
  out << "mean_kept\tmean_deleted\tdiff_means\tkl_bits\tn_kept\tn_deleted\n";
  out << fmt_g(d.mean_kept, 12) << '\t' << fmt_g(d.mean_deleted, 12) << '\t'
      << fmt_g(d.diff_means, 12) << '\t' << fmt_g(d.kl_bits, 12) << '\t'
      << d.n_kept << '\t' << d.n_deleted << '\n';
  if (!out) throw InputError("write failure: " + path);
}

// Community counts per bin over the political subset; the null model matches
// these sizes.
inline std::array<std::size_t, 5> bin_community_counts(
    const PoliticalSubset& subset, const ScoreTable& partisan) {
  std::array<std::size_t, 5> counts{};
  StringMap<double> z_of;
  for (std::size_t i = 0; i < partisan.size(); ++i)
    z_of.emplace(partisan.ids[i], partisan.z[i]);
  for (const auto& id : subset.communities) {
    const auto it = z_of.find(id);
    if (it == z_of.end())
      throw InputError("political community missing from score table: " + id);
    ++counts[bin_index(bin_from_z(it->second))];
  }
  return counts;
}

}  // namespace commdim
