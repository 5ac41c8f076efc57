#pragma once

// Author-shuffle null model: permute the author column over non-deleted
// comment slots (both degree sequences preserved exactly), retrain with the
// identical pipeline, then rebuild a political subset and bins whose sizes
// match the real run.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "commdim/common.hpp"
#include "commdim/dimensions.hpp"
#include "commdim/ingest.hpp"
#include "commdim/polarization.hpp"

namespace commdim {

struct ShuffleConfig {
  std::uint64_t seed = 1;
};

// Fisher-Yates permutation of the author column across non-deleted slots.
// Per-community comment counts and per-author totals are both unchanged.
inline std::vector<InteractionRecord> shuffle_authors(
    std::span<const InteractionRecord> records, const ShuffleConfig& config) {
  std::vector<InteractionRecord> out(records.begin(), records.end());
  std::vector<std::size_t> slots;
  slots.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!out[i].deleted) slots.push_back(i);
  SplitMix64 rng(config.seed);
  for (std::size_t i = slots.size(); i > 1; --i) {
    const std::size_t j = rng.next_below(i);
    std::swap(out[slots[i - 1]].user, out[slots[j]].user);
  }
  return out;
}

struct NullBins {
  PoliticalSubset subset;
  StringMap<int> bin_of;  // community -> matched bin in {-2..2}
  std::array<std::size_t, 5> sizes{};
  bool tie_split = false;  // boundary ties broken by community id
};

// Matches the real run's shape on the null embedding: the n_political
// communities with the highest null -ness scores form the subset, and bin
// boundaries on the null partisan axis are placed so each bin's community
// count equals the real run's.
inline NullBins null_political_bins(const ScoreTable& null_partisan,
                                    const ScoreTable& null_ness,
                                    std::size_t n_political,
                                    const std::array<std::size_t, 5>& bin_sizes) {
  if (null_partisan.ids != null_ness.ids)
    throw InputError("null partisan and -ness tables cover different vocabularies");
  if (n_political < 1 || n_political > null_ness.size())
    throw ConfigError("n_political must be in [1, |V|]");
  if (std::accumulate(bin_sizes.begin(), bin_sizes.end(), std::size_t{0}) !=
      n_political)
    throw ConfigError("bin sizes must sum to n_political");

  std::vector<std::size_t> order(null_ness.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (null_ness.z[a] != null_ness.z[b]) return null_ness.z[a] > null_ness.z[b];
    return null_ness.ids[a] < null_ness.ids[b];
  });

  NullBins out;
  out.sizes = bin_sizes;
  out.tie_split =
      n_political < order.size() &&
      null_ness.z[order[n_political - 1]] == null_ness.z[order[n_political]];
  out.subset.coverage = 0.0;
  out.subset.politics_cluster = -1;
  out.subset.vocab_size = null_ness.size();
  out.subset.ness_cutoff = null_ness.z[order[n_political - 1]];
  for (std::size_t i = 0; i < n_political; ++i)
    out.subset.communities.push_back(null_ness.ids[order[i]]);
  std::sort(out.subset.communities.begin(), out.subset.communities.end());
  for (const auto& id : out.subset.communities) out.subset.members.insert(id);

  // Ascending null partisan z; slice into the matched bin sizes.
  std::vector<std::size_t> members(order.begin(), order.begin() + n_political);
  std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
    if (null_partisan.z[a] != null_partisan.z[b])
      return null_partisan.z[a] < null_partisan.z[b];
    return null_partisan.ids[a] < null_partisan.ids[b];
  });
  std::size_t pos = 0;
  for (std::size_t b = 0; b < 5; ++b) {
    for (std::size_t i = 0; i < bin_sizes[b]; ++i, ++pos)
      out.bin_of.emplace(null_partisan.ids[members[pos]], bin_value(b));
  }
  return out;
}

// PoliticalComments over the null subset with the count-matched bins in place
// of the z-derived ones.
inline PoliticalComments null_political_comments(
    std::span<const InteractionRecord> records, const NullBins& bins,
    const ScoreTable& null_partisan) {
  PoliticalComments comments =
      political_comments(records, bins.subset, null_partisan);
  for (auto& row : comments.rows) {
    const auto it = bins.bin_of.find(
        comments.communities[static_cast<std::size_t>(row.community)]);
    row.bin = static_cast<std::int8_t>(it->second);
  }
  return comments;
}

}  // namespace commdim
