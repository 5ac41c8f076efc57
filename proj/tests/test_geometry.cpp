#include <catch2/catch_amalgamated.hpp>

#include <commdim/geometry.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "helpers.hpp"

using namespace commdim;
using testutil::make_embedding;
using testutil::random_embedding;
using testutil::TempDir;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<std::string> numbered_ids(std::size_t n, const std::string& prefix) {
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

// Orthogonal city axes plus one shared type direction; analogy queries over
// this layout have exact, well-separated answers.
Embedding lattice_embedding(int n_places) {
  const int dim = n_places + 1;
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < n_places; ++i) {
    std::vector<double> city(dim, 0.0);
    city[i] = 1.0;
    ids.push_back("city" + std::to_string(i));
    rows.push_back(city);
    std::vector<double> univ(dim, 0.0);
    univ[i] = 1.0;
    univ[n_places] = 1.0;
    ids.push_back("univ" + std::to_string(i));
    rows.push_back(univ);
  }
  return make_embedding(ids, rows);
}

}  // namespace

TEST_CASE("cosine basics", "[geometry][cosine]") {
  const std::vector<float> a{1.0f, 2.0f, 2.0f};
  const std::vector<float> na{-1.0f, -2.0f, -2.0f};
  const std::vector<float> ortho{2.0f, -1.0f, 0.0f};
  CHECK_THAT(cosine(a, a), WithinAbs(1.0, 1e-12));
  CHECK_THAT(cosine(a, na), WithinAbs(-1.0, 1e-12));
  CHECK_THAT(cosine(a, ortho), WithinAbs(0.0, 1e-12));
  const std::vector<float> zero{0.0f, 0.0f, 0.0f};
  CHECK_THROWS_AS(cosine(a, zero), NumericError);
  CHECK_THROWS_AS(cosine(a, std::vector<float>{1.0f}), NumericError);
}

TEST_CASE("unit rows normalize and reject zero vectors", "[geometry][units]") {
  const auto emb = make_embedding({"p", "q"}, {{3.0, 4.0}, {0.5, 0.0}});
  const auto units = unit_rows(emb);
  CHECK_THAT(norm(units.row(0)), WithinAbs(1.0, 1e-6));
  CHECK_THAT(units.row(0)[0], WithinAbs(0.6, 1e-6));
  CHECK_THAT(units.row(1)[0], WithinAbs(1.0, 1e-6));

  const auto bad = make_embedding({"p", "z"}, {{1.0, 0.0}, {0.0, 0.0}});
  CHECK_THROWS_AS(unit_rows(bad), NumericError);
}

TEST_CASE("nearest neighbor finds a planted twin", "[geometry][nn]") {
  const auto emb = make_embedding(
      {"query", "twin", "far", "offaxis"},
      {{1.0, 0.05}, {2.0, 0.1}, {-1.0, 0.2}, {0.1, 1.0}});
  const auto ns = nearest_neighbors(emb, "query", 3);
  REQUIRE(ns.size() == 3);
  CHECK(emb.vocab.id_of(ns[0].community) == "twin");
  CHECK_THAT(ns[0].similarity, WithinAbs(1.0, 1e-6));
  CHECK(std::is_sorted(ns.begin(), ns.end(), [](const auto& x, const auto& y) {
    return x.similarity > y.similarity;
  }));

  CHECK_THROWS_AS(nearest_neighbors(emb, "query", 4), ConfigError);
  CHECK_THROWS_AS(nearest_neighbors(emb, "nope", 1), InputError);
}

TEST_CASE("nearest neighbors agree with a brute-force oracle", "[geometry][nn]") {
  const auto emb = random_embedding(numbered_ids(40, "c"), 8, 77);
  const auto units = unit_rows(emb);
  for (std::int32_t q = 0; q < 40; ++q) {
    struct Ref {
      std::int32_t id;
      double sim;
    };
    std::vector<Ref> ref;
    for (std::int32_t v = 0; v < 40; ++v) {
      if (v == q) continue;
      double s = 0.0;
      const auto a = units.row(static_cast<std::size_t>(q));
      const auto b = units.row(static_cast<std::size_t>(v));
      for (std::size_t i = 0; i < a.size(); ++i)
        s += static_cast<double>(a[i]) * b[i];
      ref.push_back({v, s});
    }
    std::sort(ref.begin(), ref.end(), [&](const Ref& a, const Ref& b) {
      if (a.sim != b.sim) return a.sim > b.sim;
      return emb.vocab.id_of(a.id) < emb.vocab.id_of(b.id);
    });
    const auto ns = nearest_neighbors(emb, units, q, 39);
    REQUIRE(ns.size() == ref.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
      CHECK(ns[i].community == ref[i].id);
      CHECK(ns[i].similarity == ref[i].sim);
    }
  }
}

TEST_CASE("neighbor lists are prefix-stable in k", "[geometry][nn]") {
  const auto emb = random_embedding(numbered_ids(20, "c"), 6, 5);
  const auto units = unit_rows(emb);
  const auto big = nearest_neighbors(emb, units, 3, 19);
  const auto small = nearest_neighbors(emb, units, 3, 4);
  REQUIRE(small.size() == 4);
  for (std::size_t i = 0; i < small.size(); ++i)
    CHECK(small[i].community == big[i].community);
}

TEST_CASE("exact similarity ties break by community id", "[geometry][nn]") {
  const auto emb = make_embedding(
      {"query", "zz", "aa", "mm"},
      {{1.0, 0.0}, {2.0, 0.0}, {2.0, 0.0}, {0.0, 1.0}});
  const auto ns = nearest_neighbors(emb, "query", 3);
  CHECK(emb.vocab.id_of(ns[0].community) == "aa");
  CHECK(emb.vocab.id_of(ns[1].community) == "zz");
}

TEST_CASE("analogy solver matches a brute-force oracle", "[geometry][analogy]") {
  const auto emb = random_embedding(numbered_ids(20, "c"), 6, 909);
  const auto units = unit_rows(emb);
  SplitMix64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = static_cast<std::int32_t>(rng.next_below(20));
    auto b = static_cast<std::int32_t>(rng.next_below(20));
    auto c = static_cast<std::int32_t>(rng.next_below(20));
    std::vector<double> target(6);
    for (int i = 0; i < 6; ++i)
      target[static_cast<std::size_t>(i)] =
          static_cast<double>(
              units.row(static_cast<std::size_t>(b))[static_cast<std::size_t>(i)]) -
          units.row(static_cast<std::size_t>(a))[static_cast<std::size_t>(i)] +
          units.row(static_cast<std::size_t>(c))[static_cast<std::size_t>(i)];
    double tn = 0.0;
    for (double x : target) tn += x * x;
    if (!(tn > 0.0)) continue;
    std::int32_t best = -1;
    double best_sim = -2.0;
    for (std::int32_t v = 0; v < 20; ++v) {
      if (v == a || v == b || v == c) continue;
      double s = 0.0;
      for (int i = 0; i < 6; ++i)
        s += target[static_cast<std::size_t>(i)] *
             units.row(static_cast<std::size_t>(v))[static_cast<std::size_t>(i)];
      s /= std::sqrt(tn);
      if (s > best_sim ||
          (s == best_sim && emb.vocab.id_of(v) < emb.vocab.id_of(best))) {
        best = v;
        best_sim = s;
      }
    }
    const auto got = solve_analogy(emb, units, a, b, c, 1);
    REQUIRE(got.size() == 1);
    CHECK(got[0].community == best);
    CHECK_THAT(got[0].similarity, WithinAbs(best_sim, 1e-12));
  }
}

TEST_CASE("analogy excludes its own query terms", "[geometry][analogy]") {
  // unexcluded winner would be b itself; exclusion promotes d
  const auto emb = make_embedding(
      {"a", "b", "c", "d", "e"},
      {{1.0, 0.0}, {0.0, 1.0}, {0.8, 0.6}, {-0.3, 0.954}, {1.0, -0.2}});
  const auto got = solve_analogy(emb, "a", "b", "c", 2);
  REQUIRE(got.size() == 2);
  CHECK(emb.vocab.id_of(got[0].community) == "d");
  CHECK(emb.vocab.id_of(got[1].community) == "e");
}

TEST_CASE("degenerate analogy a:a reduces to a neighbor query",
          "[geometry][analogy]") {
  const auto emb = random_embedding(numbered_ids(10, "c"), 4, 31);
  const auto units = unit_rows(emb);
  const auto got = solve_analogy(emb, units, 2, 2, 5, 1);
  // target collapses to c's unit vector; winner = nearest neighbor of 5
  // among everything except {2, 5}
  const auto ns = nearest_neighbors(emb, units, 5, 9);
  std::int32_t expected = -1;
  for (const auto& n : ns) {
    if (n.community != 2) {
      expected = n.community;
      break;
    }
  }
  REQUIRE(got.size() == 1);
  CHECK(got[0].community == expected);
}

TEST_CASE("perfect lattice scores a perfect analogy report",
          "[geometry][analogy]") {
  const auto emb = lattice_embedding(4);
  AnalogySet set;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      set.quads.push_back({"city" + std::to_string(i), "univ" + std::to_string(i),
                           "city" + std::to_string(j),
                           "univ" + std::to_string(j)});
    }
  }
  const auto rep = evaluate_analogies(emb, set);
  CHECK(rep.evaluated == 12);
  CHECK(rep.skipped == 0);
  CHECK(rep.top1 == 1.0);
  CHECK(rep.top5 == 1.0);
}

TEST_CASE("out-of-vocabulary quads are skipped, not scored",
          "[geometry][analogy]") {
  const auto emb = lattice_embedding(3);
  AnalogySet set;
  set.quads.push_back({"city0", "univ0", "city1", "univ1"});
  set.quads.push_back({"city0", "univ0", "atlantis", "univ1"});
  const auto rep = evaluate_analogies(emb, set);
  CHECK(rep.evaluated == 1);
  CHECK(rep.skipped == 1);
  CHECK(rep.top1 == 1.0);

  AnalogySet hopeless;
  hopeless.quads.push_back({"x", "y", "z", "w"});
  CHECK_THROWS_AS(evaluate_analogies(emb, hopeless), InputError);
  CHECK_THROWS_AS(evaluate_analogies(emb, AnalogySet{}), InputError);
}

TEST_CASE("random embeddings stay near the chance baseline",
          "[geometry][analogy]") {
  const auto emb = random_embedding(numbered_ids(1000, "c"), 4, 123);
  AnalogySet set;
  SplitMix64 rng(8);
  while (set.quads.size() < 2000) {
    const auto a = rng.next_below(1000);
    const auto b = rng.next_below(1000);
    const auto c = rng.next_below(1000);
    const auto d = rng.next_below(1000);
    if (a == b || c == d) continue;
    set.quads.push_back({"c" + std::to_string(a), "c" + std::to_string(b),
                         "c" + std::to_string(c), "c" + std::to_string(d)});
  }
  const auto rep = evaluate_analogies(emb, set);
  CHECK(rep.evaluated == 2000);
  // chance is ~1/997 for top1 and ~5/997 for top5
  CHECK(rep.top1 <= 0.012);
  CHECK(rep.top5 <= 0.035);
  CHECK(rep.top5 >= rep.top1);
}

TEST_CASE("analogy outcomes survive an exact rotation", "[geometry][analogy]") {
  auto emb = lattice_embedding(4);
  AnalogySet set;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j)
        set.quads.push_back({"city" + std::to_string(i),
                             "univ" + std::to_string(i),
                             "city" + std::to_string(j),
                             "univ" + std::to_string(j)});
  const auto before = evaluate_analogies(emb, set);
  testutil::apply_exact_rotation(emb, 17);
  const auto after = evaluate_analogies(emb, set);
  CHECK(after.top1 == before.top1);
  CHECK(after.top5 == before.top5);
  CHECK(after.evaluated == before.evaluated);
}

TEST_CASE("analogy set files round trip and reject degenerates",
          "[geometry][analogy]") {
  TempDir dir;
  AnalogySet set;
  set.quads.push_back({"a", "b", "c", "d"});
  set.quads.push_back({"e", "f", "g", "h"});
  const auto path = dir.file("quads.tsv");
  save_analogy_set(set, path);
  const auto back = load_analogy_set(path);
  REQUIRE(back.quads.size() == 2);
  CHECK(back.quads[1].c == "g");

  testutil::write_file(dir.file("selfpair.tsv"), "a\ta\tc\td\n");
  CHECK_THROWS_AS(load_analogy_set(dir.file("selfpair.tsv")), InputError);
  testutil::write_file(dir.file("selfanswer.tsv"), "a\tb\tc\tc\n");
  CHECK_THROWS_AS(load_analogy_set(dir.file("selfanswer.tsv")), InputError);
  testutil::write_file(dir.file("short.tsv"), "a\tb\tc\n");
  CHECK_THROWS_AS(load_analogy_set(dir.file("short.tsv")), InputError);
  testutil::write_file(dir.file("comments.tsv"), "# note\n\na\tb\tc\td\n");
  CHECK(load_analogy_set(dir.file("comments.tsv")).quads.size() == 1);
}

TEST_CASE("two well-separated blobs cluster exactly at k=2",
          "[geometry][cluster]") {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  SplitMix64 rng(3);
  for (int i = 0; i < 8; ++i) {
    ids.push_back("left" + std::to_string(i));
    rows.push_back({-5.0 + 0.1 * rng.next_double(), 0.1 * rng.next_double(),
                    0.1 * rng.next_double()});
    ids.push_back("right" + std::to_string(i));
    rows.push_back({5.0 + 0.1 * rng.next_double(), 0.1 * rng.next_double(),
                    0.1 * rng.next_double()});
  }
  const auto emb = make_embedding(ids, rows);
  for (const auto linkage :
       {Linkage::Ward, Linkage::Average, Linkage::Complete}) {
    const auto c = cluster(emb, 2, linkage);
    REQUIRE(c.assignment.size() == 16);
    CHECK(c.k == 2);
    CHECK(c.linkage == linkage_tag(linkage));
    // dense id 0 is "left0": the left blob must be cluster 0
    for (std::size_t v = 0; v < 16; ++v) {
      const bool is_left = emb.vocab.entries[v].id.starts_with("left");
      CHECK(c.assignment[v] == (is_left ? 0 : 1));
    }
  }
}

TEST_CASE("cluster count extremes", "[geometry][cluster]") {
  const auto emb = random_embedding(numbered_ids(6, "c"), 3, 44);
  const auto all = cluster(emb, 6);
  for (std::size_t v = 0; v < 6; ++v)
    CHECK(all.assignment[v] == static_cast<std::int32_t>(v));
  const auto one = cluster(emb, 1);
  for (std::size_t v = 0; v < 6; ++v) CHECK(one.assignment[v] == 0);
  CHECK_THROWS_AS(cluster(emb, 0), ConfigError);
  CHECK_THROWS_AS(cluster(emb, 7), ConfigError);
}

TEST_CASE("cuts along one merge tree are nested", "[geometry][cluster]") {
  const auto emb = random_embedding(numbered_ids(12, "c"), 4, 19);
  const auto merges = agglomerate(emb, Linkage::Ward);
  REQUIRE(merges.size() == 11);
  for (std::size_t k = 2; k < 10; ++k) {
    const auto coarse = cut_clusters(merges, 12, k, Linkage::Ward);
    const auto fine = cut_clusters(merges, 12, k + 1, Linkage::Ward);
    for (std::size_t i = 0; i < 12; ++i) {
      for (std::size_t j = i + 1; j < 12; ++j) {
        if (fine.assignment[i] == fine.assignment[j])
          CHECK(coarse.assignment[i] == coarse.assignment[j]);
      }
    }
  }
}

TEST_CASE("identical points merge lowest slots first", "[geometry][cluster]") {
  const auto emb = make_embedding(
      {"c0", "c1", "c2", "c3", "far"},
      {{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}, {9.0, -9.0}});
  const auto merges = agglomerate(emb, Linkage::Ward);
  REQUIRE(merges.size() == 4);
  CHECK(merges[0].a == 0);
  CHECK(merges[0].b == 1);
  CHECK(merges[0].distance == 0.0);
  CHECK(merges[1].a == 0);
  CHECK(merges[1].b == 2);
  const auto c = cluster(emb, 2);
  CHECK(c.assignment == std::vector<std::int32_t>{0, 0, 0, 0, 1});
}

TEST_CASE("clusterings persist with labels", "[geometry][cluster]") {
  const auto emb = random_embedding(numbered_ids(5, "c"), 3, 6);
  auto c = cluster(emb, 2);
  c.labels = {"first", "second"};
  TempDir dir;
  const auto path = dir.file("clusters.tsv");
  save_clustering(c, emb.vocab, path);
  const auto back = load_clustering(path, emb.vocab);
  CHECK(back.assignment == c.assignment);
  CHECK(back.k == c.k);
  REQUIRE(back.labels.size() == 2);
  CHECK(back.labels[0] == "first");
  CHECK(back.labels[1] == "second");
}

TEST_CASE("clustering io rejects inconsistent files", "[geometry][cluster]") {
  TempDir dir;
  const auto vocab = testutil::vocab_of_ids({"a", "b"});

  Clustering short_assignment;
  short_assignment.assignment = {0};
  CHECK_THROWS_AS(save_clustering(short_assignment, vocab, dir.file("x.tsv")),
                  InputError);

  testutil::write_file(dir.file("partial.tsv"),
                       "community_id\tcluster_id\tlabel\na\t0\t\n");
  CHECK_THROWS_AS(load_clustering(dir.file("partial.tsv"), vocab), InputError);

  testutil::write_file(dir.file("unknown.tsv"),
                       "community_id\tcluster_id\tlabel\na\t0\t\nzz\t1\t\n");
  CHECK_THROWS_AS(load_clustering(dir.file("unknown.tsv"), vocab), InputError);

  testutil::write_file(dir.file("badid.tsv"),
                       "community_id\tcluster_id\tlabel\na\t-1\t\nb\t0\t\n");
  CHECK_THROWS_AS(load_clustering(dir.file("badid.tsv"), vocab), InputError);

  testutil::write_file(dir.file("empty.tsv"), "");
  CHECK_THROWS_AS(load_clustering(dir.file("empty.tsv"), vocab), InputError);
}
