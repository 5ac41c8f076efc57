#pragma once

// External-data validation: correlate dimension scores with survey/election
// values and measure labelled-group separation.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include "commdim/common.hpp"
#include "commdim/dimensions.hpp"
#include "commdim/ingest.hpp"
#include "commdim/io.hpp"
#include "commdim/stats.hpp"

namespace commdim {

struct ExternalMeasure {
  struct Row {
    std::string community;
    double value;
    std::string label;
  };
  std::vector<Row> rows;        // unique community ids, sorted
  std::uint64_t merged = 0;     // input rows folded into an existing id
};

namespace detail {

inline std::size_t split_csv(std::string_view line,
                             std::vector<std::string_view>& fields) {
  fields.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields.size();
}

}  // namespace detail

// CSV with required header `community_id,value[,label]`. Repeated community
// ids are averaged at load (many-to-one mappings pre-average); the first
// non-empty label wins.
inline ExternalMeasure load_external_measure(const std::string& path) {
  auto src = open_lines(path);
  std::string line;
  if (!src->next(line))
    throw InputError("empty external measure file: " + path);
  std::vector<std::string_view> fields;
  const std::size_t n_cols = detail::split_csv(line, fields);
  if (n_cols < 2 || fields[0] != "community_id" || fields[1] != "value" ||
      (n_cols == 3 && fields[2] != "label") || n_cols > 3)
    throw InputError("external measure needs a community_id,value[,label] "
                     "header: " + path);
  struct Acc {
    double sum = 0.0;
    std::uint64_t n = 0;
    std::string label;
  };
  StringMap<Acc> acc;
  std::vector<std::string> order;
  std::uint64_t merged = 0;
  while (src->next(line)) {
    if (line.empty() || line[0] == '#') continue;
    if (detail::split_csv(line, fields) != n_cols)
      throw InputError("bad external measure row in " + path + ": " + line);
    if (fields[0].empty())
      throw InputError("empty community id in " + path + ": " + line);
    const std::string value_str(fields[1]);
    char* end = nullptr;
    const double value = std::strtod(value_str.c_str(), &end);
    if (end == value_str.c_str() || *end != '\0')
      throw InputError("bad value in " + path + ": " + line);
    auto [it, inserted] = acc.try_emplace(std::string(fields[0]));
    if (inserted)
      order.emplace_back(fields[0]);
    else
      ++merged;
    it->second.sum += value;
    ++it->second.n;
    if (n_cols == 3 && it->second.label.empty())
      it->second.label.assign(fields[2]);
  }
  if (order.empty())
    throw InputError("external measure has no data rows: " + path);
  ExternalMeasure out;
  out.merged = merged;
  std::sort(order.begin(), order.end());
  out.rows.reserve(order.size());
  for (const auto& id : order) {
    const Acc& a = acc.find(id)->second;
    out.rows.push_back({id, a.sum / static_cast<double>(a.n), a.label});
  }
  return out;
}

struct MatchReport {
  std::size_t matched = 0;
  std::size_t unmatched = 0;  // measure rows with no scored community
};

inline Correlation correlate(const ScoreTable& scores,
                             const ExternalMeasure& measure,
                             MatchReport* report = nullptr) {
  StringMap<double> z_of;
  for (std::size_t i = 0; i < scores.size(); ++i)
    z_of.emplace(scores.ids[i], scores.z[i]);
  std::vector<double> xs, ys;
  MatchReport rep;
  for (const auto& row : measure.rows) {
    const auto it = z_of.find(row.community);
    if (it == z_of.end()) {
      ++rep.unmatched;
      continue;
    }
    ++rep.matched;
    xs.push_back(it->second);
    ys.push_back(row.value);
  }
  if (report) *report = rep;
  if (rep.matched < 3)
    throw InputError("correlate needs at least 3 matched communities, got " +
                     std::to_string(rep.matched));
  return pearson_test(xs, ys);
}

namespace detail {

inline std::vector<double> resolve_scores(const ScoreTable& scores,
                                          std::span<const std::string> ids,
                                          std::size_t* unresolved) {
  StringMap<double> z_of;
  for (std::size_t i = 0; i < scores.size(); ++i)
    z_of.emplace(scores.ids[i], scores.z[i]);
  std::vector<double> out;
  for (const auto& id : ids) {
    const auto it = z_of.find(id);
    if (it == z_of.end()) {
      if (unresolved) ++(*unresolved);
      continue;
    }
    out.push_back(it->second);
  }
  return out;
}

}  // namespace detail

inline double cohens_d_groups(const ScoreTable& scores,
                              std::span<const std::string> group_a,
                              std::span<const std::string> group_b,
                              std::size_t* unresolved = nullptr) {
  const auto a = detail::resolve_scores(scores, group_a, unresolved);
  const auto b = detail::resolve_scores(scores, group_b, unresolved);
  return cohens_d(a, b);
}

// Pearson r between a 0/1 group label and the score (group_1 coded 1).
inline double point_biserial_groups(const ScoreTable& scores,
                                    std::span<const std::string> group_1,
                                    std::span<const std::string> group_0,
                                    std::size_t* unresolved = nullptr) {
  const auto a = detail::resolve_scores(scores, group_1, unresolved);
  const auto b = detail::resolve_scores(scores, group_0, unresolved);
  if (a.empty() || b.empty())
    throw InputError("point-biserial needs members in both classes");
  return point_biserial(a, b);
}

struct GroupSeparation {
  std::string label_1;  // lexicographically first label, coded 1
  std::string label_0;
  std::size_t n_1 = 0;
  std::size_t n_0 = 0;
  double cohens_d = 0.0;
  double point_biserial = 0.0;
};

// Separation between the two labelled groups of an external measure.
inline GroupSeparation group_separation(const ScoreTable& scores,
                                        const ExternalMeasure& measure,
                                        MatchReport* report = nullptr) {
  std::vector<std::string> labels;
  for (const auto& row : measure.rows)
    if (!row.label.empty()) labels.push_back(row.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  if (labels.size() != 2)
    throw InputError("group separation needs exactly 2 labels, found " +
                     std::to_string(labels.size()));
  std::vector<std::string> g1, g0;
  for (const auto& row : measure.rows) {
    if (row.label == labels[0]) g1.push_back(row.community);
    else if (row.label == labels[1]) g0.push_back(row.community);
  }
  std::size_t unresolved = 0;
  GroupSeparation out;
  out.label_1 = labels[0];
  out.label_0 = labels[1];
  const auto a = detail::resolve_scores(scores, g1, &unresolved);
  const auto b = detail::resolve_scores(scores, g0, &unresolved);
  out.n_1 = a.size();
  out.n_0 = b.size();
  out.cohens_d = cohens_d(a, b);
  if (a.empty() || b.empty())
    throw InputError("group separation needs members in both classes");
  out.point_biserial = point_biserial(a, b);
  if (report) {
    report->matched = a.size() + b.size();
    report->unmatched = unresolved;
  }
  return out;
}

}  // namespace commdim
