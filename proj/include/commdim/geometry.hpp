#pragma once

// Read-only geometry over a trained embedding: cosine queries, analogy
// solving and scoring, and agglomerative clustering (Lance-Williams update).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "commdim/common.hpp"
#include "commdim/embed.hpp"
#include "commdim/io.hpp"

namespace commdim {

inline double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += static_cast<double>(a[i]) * b[i];
  return s;
}

inline double norm(std::span<const float> a) { return std::sqrt(dot(a, a)); }

inline double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw NumericError("cosine: dimension mismatch");
  const double na = norm(a), nb = norm(b);
  if (!(na > 0.0) || !(nb > 0.0))
    throw NumericError("cosine undefined for a zero vector");
  return dot(a, b) / (na * nb);
}

// Unit-normalized copies of all word vectors; raw vectors stay untouched.
struct UnitMatrix {
  std::size_t n = 0;
  int dim = 0;
  std::vector<float> data;

  std::span<const float> row(std::size_t i) const {
    return {data.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

inline UnitMatrix unit_rows(const Embedding& emb) {
  UnitMatrix m;
  m.n = emb.size();
  m.dim = emb.dim;
  m.data.resize(emb.word_vectors.size());
  for (std::size_t v = 0; v < m.n; ++v) {
    const auto row = emb.word(static_cast<std::int32_t>(v));
    const double r = norm(row);
    if (!(r > 0.0))
      throw NumericError("zero vector for community " +
                         emb.vocab.entries[v].id);
    float* out = m.data.data() + v * static_cast<std::size_t>(m.dim);
    for (int i = 0; i < m.dim; ++i)
      out[i] = static_cast<float>(row[static_cast<std::size_t>(i)] / r);
  }
  return m;
}

struct Neighbor {
  std::int32_t community;
  double similarity;
};

namespace detail {

// Descending similarity; exact ties resolve by ascending community id.
inline void sort_neighbors(std::vector<Neighbor>& ns, const Vocabulary& vocab) {
  std::sort(ns.begin(), ns.end(), [&](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return vocab.id_of(a.community) < vocab.id_of(b.community);
  });
}

}  // namespace detail

inline std::vector<Neighbor> nearest_neighbors(const Embedding& emb,
                                               const UnitMatrix& units,
                                               std::int32_t c, std::size_t k) {
  if (c < 0 || static_cast<std::size_t>(c) >= emb.size())
    throw InputError("unknown community dense id");
  if (k + 1 > emb.size())
    throw ConfigError("k must be smaller than the vocabulary size");
  const auto q = units.row(static_cast<std::size_t>(c));
  std::vector<Neighbor> all;
  all.reserve(emb.size() - 1);
  for (std::size_t v = 0; v < emb.size(); ++v) {
    if (static_cast<std::int32_t>(v) == c) continue;
    all.push_back({static_cast<std::int32_t>(v), dot(q, units.row(v))});
  }
  detail::sort_neighbors(all, emb.vocab);
  all.resize(k);
  return all;
}

inline std::vector<Neighbor> nearest_neighbors(const Embedding& emb,
                                               const std::string& community,
                                               std::size_t k) {
  const std::int32_t c = emb.vocab.dense_id(community);
  if (c < 0) throw InputError("unknown community id: " + community);
  const auto units = unit_rows(emb);
  return nearest_neighbors(emb, units, c, k);
}

// Candidates for "a : b :: c : ?", ranked by cosine to (b - a + c) over
// unit-normalized vectors; the three query communities are excluded.
inline std::vector<Neighbor> solve_analogy(const Embedding& emb,
                                           const UnitMatrix& units,
                                           std::int32_t a, std::int32_t b,
                                           std::int32_t c, std::size_t top_k) {
  for (std::int32_t x : {a, b, c})
    if (x < 0 || static_cast<std::size_t>(x) >= emb.size())
      throw InputError("unknown community dense id in analogy query");
  const int dim = units.dim;
  std::vector<double> target(static_cast<std::size_t>(dim));
  {
    const auto va = units.row(static_cast<std::size_t>(a));
    const auto vb = units.row(static_cast<std::size_t>(b));
    const auto vc = units.row(static_cast<std::size_t>(c));
    for (int i = 0; i < dim; ++i) {
      const auto s = static_cast<std::size_t>(i);
      target[s] = static_cast<double>(vb[s]) - va[s] + vc[s];
    }
  }
  double tn = 0.0;
  for (double x : target) tn += x * x;
  tn = std::sqrt(tn);
  if (!(tn > 0.0))
    throw NumericError("degenerate analogy query: zero target vector");
  std::vector<Neighbor> out;
  out.reserve(emb.size());
  for (std::size_t v = 0; v < emb.size(); ++v) {
    const auto iv = static_cast<std::int32_t>(v);
    if (iv == a || iv == b || iv == c) continue;
    const auto row = units.row(v);
    double s = 0.0;
    for (int i = 0; i < dim; ++i)
      s += target[static_cast<std::size_t>(i)] * row[static_cast<std::size_t>(i)];
    out.push_back({iv, s / tn});
  }
  detail::sort_neighbors(out, emb.vocab);
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

inline std::vector<Neighbor> solve_analogy(const Embedding& emb,
                                           const std::string& a,
                                           const std::string& b,
                                           const std::string& c,
                                           std::size_t top_k = 10) {
  const std::int32_t ia = emb.vocab.dense_id(a);
  const std::int32_t ib = emb.vocab.dense_id(b);
  const std::int32_t ic = emb.vocab.dense_id(c);
  if (ia < 0 || ib < 0 || ic < 0)
    throw InputError("analogy query contains unknown community ids");
  const auto units = unit_rows(emb);
  return solve_analogy(emb, units, ia, ib, ic, top_k);
}

// ---- Analogy sets ---------------------------------------------------------------

struct AnalogySet {
  std::string name;
  struct Quad {
    std::string a, b, c, d;
  };
  std::vector<Quad> quads;
};

inline AnalogySet load_analogy_set(const std::string& path) {
  AnalogySet set;
  set.name = path;
  auto src = open_lines(path);
  std::string line;
  std::vector<std::string_view> fields;
  while (src->next(line)) {
    if (line.empty() || line[0] == '#') continue;
    if (split_tsv(line, fields) != 4)
      throw InputError("analogy rows need 4 tab-separated ids: " + line);
    AnalogySet::Quad q{std::string(fields[0]), std::string(fields[1]),
                       std::string(fields[2]), std::string(fields[3])};
    if (q.a == q.b || q.c == q.d)
      throw InputError("degenerate analogy quadruple: " + line);
    set.quads.push_back(std::move(q));
  }
  return set;
}

inline void save_analogy_set(const AnalogySet& set, const std::string& path) {
  auto out = open_output(path);
  for (const auto& q : set.quads)
    out << q.a << '\t' << q.b << '\t' << q.c << '\t' << q.d << '\n';
  if (!out) throw InputError("write failure: " + path);
}

struct AnalogyReport {
  double top1 = 0.0;
  double top5 = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // quadruples with out-of-vocabulary members
};

inline AnalogyReport evaluate_analogies(const Embedding& emb,
                                        const AnalogySet& set) {
  if (set.quads.empty()) throw InputError("empty analogy set");
  const auto units = unit_rows(emb);
  AnalogyReport rep;
  std::size_t hit1 = 0, hit5 = 0;
  for (const auto& q : set.quads) {
    const std::int32_t a = emb.vocab.dense_id(q.a);
    const std::int32_t b = emb.vocab.dense_id(q.b);
    const std::int32_t c = emb.vocab.dense_id(q.c);
    const std::int32_t d = emb.vocab.dense_id(q.d);
    if (a < 0 || b < 0 || c < 0 || d < 0) {
      ++rep.skipped;
      continue;
    }
    const auto ranked = solve_analogy(emb, units, a, b, c, 5);
    ++rep.evaluated;
    for (std::size_t r = 0; r < ranked.size(); ++r) {
      if (ranked[r].community == d) {
        if (r == 0) ++hit1;
        ++hit5;
        break;
      }
    }
  }
  if (rep.evaluated == 0)
    throw InputError(
        "no evaluable analogy quadruples (all members out of vocabulary)");
  rep.top1 = static_cast<double>(hit1) / static_cast<double>(rep.evaluated);
  rep.top5 = static_cast<double>(hit5) / static_cast<double>(rep.evaluated);
  return rep;
}

// ---- Agglomerative clustering ------------------------------------------------------

enum class Linkage { Ward, Average, Complete };

inline Linkage parse_linkage(std::string_view tag) {
  if (tag == "ward") return Linkage::Ward;
  if (tag == "average") return Linkage::Average;
  if (tag == "complete") return Linkage::Complete;
  throw ConfigError("unknown linkage tag: " + std::string(tag) +
                    " (expected ward, average, or complete)");
}

inline std::string linkage_tag(Linkage l) {
  switch (l) {
    case Linkage::Ward: return "ward";
    case Linkage::Average: return "average";
    case Linkage::Complete: return "complete";
  }
  return "ward";
}

struct Merge {
  std::int32_t a;  // surviving slot (a < b); slot index = lowest member id
  std::int32_t b;
  double distance;   // linkage value at merge time (Ward: squared Euclidean)
  std::int32_t size; // members in the merged cluster
};

// Full merge sequence (n-1 merges) under the chosen linkage over Euclidean
// distance. Equal distances merge the lowest (a, b) slot pair first.
inline std::vector<Merge> agglomerate(const Embedding& emb, Linkage linkage) {
  const std::size_t n = emb.size();
  if (n == 0) throw InputError("cannot cluster an empty vocabulary");
  if (n == 1) return {};
  // Upper-triangle distance matrix; Ward works on squared Euclidean.
  std::vector<double> dist(n * n, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return dist[i * n + j];
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = emb.word(static_cast<std::int32_t>(i));
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto rj = emb.word(static_cast<std::int32_t>(j));
      double d2 = 0.0;
      for (int k = 0; k < emb.dim; ++k) {
        const auto s = static_cast<std::size_t>(k);
        const double diff = static_cast<double>(ri[s]) - rj[s];
        d2 += diff * diff;
      }
      at(i, j) = linkage == Linkage::Ward ? d2 : std::sqrt(d2);
    }
  }
  std::vector<bool> active(n, true);
  std::vector<std::int32_t> sizes(n, 1);
  std::vector<Merge> merges;
  merges.reserve(n - 1);
  for (std::size_t step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        const double d = at(i, j);
        if (!found || d < best) {
          best = d;
          bi = i;
          bj = j;
          found = true;
        }
      }
    }
    const double na = sizes[bi], nb = sizes[bj];
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double dik = at(std::min(bi, k), std::max(bi, k));
      const double djk = at(std::min(bj, k), std::max(bj, k));
      double d;
      switch (linkage) {
        case Linkage::Ward: {
          const double nk = sizes[k];
          d = ((na + nk) * dik + (nb + nk) * djk - nk * at(bi, bj)) /
              (na + nb + nk);
          break;
        }
        case Linkage::Average:
          d = (na * dik + nb * djk) / (na + nb);
          break;
        case Linkage::Complete:
          d = std::max(dik, djk);
          break;
      }
      at(std::min(bi, k), std::max(bi, k)) = d;
    }
    merges.push_back({static_cast<std::int32_t>(bi),
                      static_cast<std::int32_t>(bj), best,
                      sizes[bi] + sizes[bj]});
    sizes[bi] += sizes[bj];
    active[bj] = false;
  }
  return merges;
}

struct Clustering {
  std::vector<std::int32_t> assignment;  // community dense id -> cluster id
  std::int32_t k = 0;
  std::string linkage;
  std::vector<std::string> labels;  // per cluster, optional (may be empty)
};

// Replays the first n-k merges; cluster ids are assigned contiguously in
// order of each cluster's lowest member dense id.
inline Clustering cut_clusters(std::span<const Merge> merges, std::size_t n,
                               std::size_t k, Linkage linkage) {
  if (k < 1 || k > n)
    throw ConfigError("cluster count k must be in [1, |V|]");
  std::vector<std::int32_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::int32_t>(i);
  auto find = [&](std::int32_t x) -> std::int32_t {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  const std::size_t to_apply = n - k;
  if (to_apply > merges.size())
    throw ConfigError("not enough merges recorded for requested k");
  for (std::size_t m = 0; m < to_apply; ++m) {
    const auto ra = find(merges[m].a);
    const auto rb = find(merges[m].b);
    // Root at the lower slot so each root stays the lowest member id.
    parent[static_cast<std::size_t>(std::max(ra, rb))] = std::min(ra, rb);
  }
  Clustering out;
  out.k = static_cast<std::int32_t>(k);
  out.linkage = linkage_tag(linkage);
  out.assignment.assign(n, -1);
  std::vector<std::int32_t> root_to_cluster(n, -1);
  std::int32_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(find(static_cast<std::int32_t>(i)));
    if (root_to_cluster[r] < 0) root_to_cluster[r] = next++;
    out.assignment[i] = root_to_cluster[r];
  }
  return out;
}

inline Clustering cluster(const Embedding& emb, std::size_t k,
                          Linkage linkage = Linkage::Ward) {
  const auto merges = agglomerate(emb, linkage);
  return cut_clusters(merges, emb.size(), k, linkage);
}

inline void save_clustering(const Clustering& c, const Vocabulary& vocab,
                            const std::string& path) {
  if (c.assignment.size() != vocab.size())
    throw InputError("clustering does not cover the vocabulary");
  auto out = open_output(path);
  out << "community_id\tcluster_id\tlabel\n";
  for (std::size_t v = 0; v < vocab.size(); ++v) {
    const auto cid = static_cast<std::size_t>(c.assignment[v]);
    out << vocab.entries[v].id << '\t' << c.assignment[v] << '\t'
        << (cid < c.labels.size() ? c.labels[cid] : "") << '\n';
  }
  if (!out) throw InputError("write failure: " + path);
}

inline Clustering load_clustering(const std::string& path,
                                  const Vocabulary& vocab) {
  auto src = open_lines(path);
  std::string line;
  if (!src->next(line)) throw InputError("empty clustering file: " + path);
  Clustering c;
  c.assignment.assign(vocab.size(), -1);
  std::vector<std::string_view> fields;
  std::int32_t max_id = -1;
  while (src->next(line)) {
    if (line.empty()) continue;
    const auto nf = split_tsv(line, fields);
    if (nf != 2 && nf != 3)
      throw InputError("bad clustering row in " + path + ": " + line);
    const std::int32_t v = vocab.dense_id(fields[0]);
    if (v < 0)
      throw InputError("clustering community not in vocabulary: " +
                       std::string(fields[0]));
    std::int64_t cid = 0;
    if (!parse_i64(fields[1], cid) || cid < 0)
      throw InputError("bad cluster id in " + path + ": " + line);
    c.assignment[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(cid);
    max_id = std::max(max_id, static_cast<std::int32_t>(cid));
    if (nf == 3 && !fields[2].empty()) {
      if (c.labels.size() <= static_cast<std::size_t>(cid))
        c.labels.resize(static_cast<std::size_t>(cid) + 1);
      c.labels[static_cast<std::size_t>(cid)] = std::string(fields[2]);
    }
  }
  for (std::size_t v = 0; v < vocab.size(); ++v)
    if (c.assignment[v] < 0)
      throw InputError("clustering misses community " + vocab.entries[v].id);
  c.k = max_id + 1;
  return c;
}

}  // namespace commdim
