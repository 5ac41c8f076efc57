// commdim: community-embedding pipeline front-end.
//
// Subcommands cover the full pipeline: ingest raw interaction logs, train
// embeddings, evaluate analogies, cluster, build/score social dimensions,
// and run the polarization analyses with their null models and external
// validations. Every run writes its outputs plus a JSON manifest recording
// input hashes, the resolved configuration, and wall time.
//
// Exit codes: 0 success, 2 config error, 3 input error, 4 numeric failure.

#include <commdim/commdim.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace commdim;

namespace {

// ---- Run manifest ------------------------------------------------------------

class RunManifest {
 public:
  explicit RunManifest(std::string subcommand)
      : subcommand_(std::move(subcommand)),
        start_(std::chrono::steady_clock::now()) {}

  json& config() { return config_; }

  void input(const std::string& key, const std::string& path) {
    inputs_[key] = {{"path", path}, {"fnv1a64", hex64(hash_file(path))}};
  }

  void output(const fs::path& path) { outputs_.push_back(path.string()); }

  void write(const fs::path& dir) {
    const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start_)
                          .count();
    json j;
    j["tool"] = "commdim";
    j["version"] = kVersion;
    j["subcommand"] = subcommand_;
    j["config"] = config_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    j["wall_ms"] = wall;
    std::string name = subcommand_;
    for (auto& ch : name)
      if (ch == ' ') ch = '_';
    auto out = open_output((dir / (name + "_manifest.json")).string());
    out << j.dump(2) << '\n';
    if (!out) throw InputError("write failure: manifest");
  }

 private:
  std::string subcommand_;
  json config_ = json::object();
  json inputs_ = json::object();
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

// Applies key=value lines to options the command line left unset, so
// precedence is flags > file > defaults. Section headers may scope keys to a
// subcommand ([train], [dimension.build]); keys before any header apply
// unconditionally. Problems are collected and reported together.
void apply_config_file(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  std::string qualified = sub->get_name();
  for (const CLI::App* p = sub->get_parent(); p && p->get_parent();
       p = p->get_parent())
    qualified = p->get_name() + "." + qualified;

  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };

  std::vector<std::string> problems;
  std::string line;
  bool section_active = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string l = trim(line);
    if (l.empty() || l[0] == '#' || l[0] == ';') continue;
    if (l.front() == '[' && l.back() == ']') {
      const std::string section = trim(l.substr(1, l.size() - 2));
      section_active = section == sub->get_name() || section == qualified;
      continue;
    }
    const auto eq = l.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(lineno) + ": expected key=value");
      continue;
    }
    if (!section_active) continue;
    std::string key = trim(l.substr(0, eq));
    const std::string value = trim(l.substr(eq + 1));
    for (auto& ch : key)
      if (ch == '_') ch = '-';
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) {
      problems.push_back("line " + std::to_string(lineno) + ": unknown key '" +
                         key + "'");
      continue;
    }
    if (opt->count() > 0) continue;  // explicit flag wins
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      problems.push_back("line " + std::to_string(lineno) + ": bad value for '" +
                         key + "': " + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "config file " + path + ":";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
}

fs::path resolve_out_dir(const std::string& flag) {
  std::string dir = flag;
  if (dir.empty())
    if (const char* env = std::getenv("COMMDIM_OUT_DIR"); env && *env)
      dir = env;
  if (dir.empty()) dir = ".";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output dir " + dir + ": " + ec.message());
  return {dir};
}

void require_seed(const CLI::Option* seed_opt, bool strict) {
  if (strict && seed_opt->count() == 0)
    throw ConfigError("--strict requires an explicit --seed");
}

std::vector<InteractionRecord> load_records(const std::string& path,
                                            const std::string& format,
                                            int workers, RunManifest& man) {
  man.input("records", path);
  return read_interactions(path, parse_log_format(format), workers);
}

Vocabulary vocab_from_scores(const ScoreTable& t) {
  Vocabulary v;
  v.entries.reserve(t.size());
  for (const auto& id : t.ids) {
    v.index.emplace(id, static_cast<std::int32_t>(v.entries.size()));
    v.entries.push_back({id, 0});
  }
  return v;
}

SeedPair parse_seed_pair(const std::string& arg) {
  const auto colon = arg.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == arg.size())
    throw ConfigError("seed pair must look like LEFT:RIGHT, got '" + arg + "'");
  return {arg.substr(0, colon), arg.substr(colon + 1)};
}

// ---- ingest --------------------------------------------------------------------

struct IngestOpts {
  std::string input, format = "jsonl", out_dir;
  std::size_t top_n = 10006;
  int workers = 1;
};

void run_ingest(const IngestOpts& o) {
  RunManifest man("ingest");
  man.config() = {{"input", o.input},
                  {"format", o.format},
                  {"top_n", o.top_n},
                  {"workers", o.workers}};
  const auto dir = resolve_out_dir(o.out_dir);

  man.input("records", o.input);
  ParseStats stats;
  auto records =
      read_interactions(o.input, parse_log_format(o.format), o.workers, &stats);

  VocabCoverage coverage;
  const auto vocab = build_vocab(records, o.top_n, &coverage);
  const auto users = build_user_index(records);
  const auto table = count_pairs(records, vocab, users);
  const auto monthly = monthly_activity(records, vocab, users);

  save_pair_table(table, vocab, (dir / "pairs.tsv").string());
  save_pair_table_meta(table, vocab, coverage, stats,
                       (dir / "pairs.meta.json").string());
  save_monthly_table(monthly, vocab, (dir / "monthly.tsv").string());
  man.output(dir / "pairs.tsv");
  man.output(dir / "pairs.meta.json");
  man.output(dir / "monthly.tsv");
  man.write(dir);
  std::cout << "ingest: " << stats.records << " records, |V|=" << vocab.size()
            << ", pairs=" << table.triples.size() << '\n';
}

// ---- train ---------------------------------------------------------------------

struct TrainOpts {
  std::string pairs, meta, out_dir;
  TrainConfig config;
  bool text = false;
  bool contexts = false;
};

void run_train(const TrainOpts& o) {
  RunManifest man("train");
  const auto& c = o.config;
  man.config() = {{"dim", c.dim},
                  {"negative", c.negative},
                  {"sample", c.sample},
                  {"alpha", c.alpha},
                  {"min_alpha", c.resolved_min_alpha()},
                  {"shuffled", c.shuffled},
                  {"epochs", c.epochs},
                  {"seed", c.seed},
                  {"workers", c.workers},
                  {"text", o.text},
                  {"contexts", o.contexts}};
  const auto dir = resolve_out_dir(o.out_dir);

  man.input("pairs", o.pairs);
  man.input("meta", o.meta);
  const auto vocab = load_vocab_from_meta(o.meta);
  const auto table = load_pair_table(o.pairs, vocab);
  const auto emb = train_embedding(table, vocab, o.config);

  save_embedding(emb, (dir / "embedding.bin").string(), o.contexts);
  man.output(dir / "embedding.bin");
  if (o.text) {
    save_embedding_text(emb, (dir / "embedding.txt").string());
    man.output(dir / "embedding.txt");
  }
  man.write(dir);
  std::cout << "train: |V|=" << emb.size() << ", dim=" << emb.dim
            << ", loss " << fmt_g(emb.loss_trace.front(), 6) << " -> "
            << fmt_g(emb.loss_trace.back(), 6) << '\n';
}

// ---- eval-analogies --------------------------------------------------------------

struct AnalogyOpts {
  std::string embedding, analogies, out_dir;
};

void run_eval_analogies(const AnalogyOpts& o) {
  RunManifest man("eval-analogies");
  man.config() = {{"embedding", o.embedding}, {"analogies", o.analogies}};
  const auto dir = resolve_out_dir(o.out_dir);

  man.input("embedding", o.embedding);
  man.input("analogies", o.analogies);
  const auto emb = load_embedding(o.embedding);
  const auto set = load_analogy_set(o.analogies);
  const auto rep = evaluate_analogies(emb, set);

  json j = {{"name", set.name},
            {"top1", rep.top1},
            {"top5", rep.top5},
            {"evaluated", rep.evaluated},
            {"skipped", rep.skipped}};
  {
    auto out = open_output((dir / "analogy_report.json").string());
    out << j.dump(2) << '\n';
    if (!out) throw InputError("write failure: analogy_report.json");
  }
  man.output(dir / "analogy_report.json");
  man.write(dir);
  std::cout << "analogies: top1=" << fmt_g(rep.top1, 6)
            << " top5=" << fmt_g(rep.top5, 6) << " on " << rep.evaluated
            << " quads (" << rep.skipped << " skipped)\n";
}

// ---- cluster -------------------------------------------------------------------

struct ClusterOpts {
  std::string embedding, linkage = "ward", out_dir;
  std::size_t k = 30;
};

void run_cluster(const ClusterOpts& o) {
  RunManifest man("cluster");
  man.config() = {{"embedding", o.embedding}, {"k", o.k}, {"linkage", o.linkage}};
  const auto dir = resolve_out_dir(o.out_dir);

  man.input("embedding", o.embedding);
  const auto emb = load_embedding(o.embedding);
  const auto c = cluster(emb, o.k, parse_linkage(o.linkage));
  save_clustering(c, emb.vocab, (dir / "clusters.tsv").string());
  man.output(dir / "clusters.tsv");
  man.write(dir);
  std::cout << "cluster: k=" << c.k << " over |V|=" << emb.size() << '\n';
}

// ---- dimension build|score|compare -------------------------------------------------

struct DimBuildOpts {
  std::string embedding, name, seed, preset, out_dir;
  std::size_t k = 10, nn_k = 10;
};

void run_dim_build(const DimBuildOpts& o) {
  RunManifest man("dimension build");
  const auto dir = resolve_out_dir(o.out_dir);

  SeedPair seed;
  if (!o.preset.empty()) {
    const SeedPreset* p = find_seed_preset(o.preset);
    if (!p) throw ConfigError("unknown seed preset: " + o.preset);
    if (!p->has_pair())
      throw ConfigError("preset '" + o.preset + "' (" + p->note +
                        ") carries no built-in seed pair; pass --seed "
                        "LEFT:RIGHT instead");
    seed = p->pair;
  } else if (!o.seed.empty()) {
    seed = parse_seed_pair(o.seed);
  } else {
    throw ConfigError("dimension build needs --seed LEFT:RIGHT or --preset NAME");
  }
  std::string name = o.name;
  if (name.empty()) name = o.preset.empty() ? "dimension" : o.preset;
  man.config() = {{"embedding", o.embedding},
                  {"name", name},
                  {"seed_left", seed.left},
                  {"seed_right", seed.right},
                  {"k", o.k},
                  {"nn_k", o.nn_k}};

  man.input("embedding", o.embedding);
  const auto emb = load_embedding(o.embedding);
  const auto pairs = augment_seed(emb, seed, o.k, o.nn_k);
  const auto dim = build_dimension(emb, pairs, name);

  const auto path = dir / (name + ".dimension.json");
  save_dimension(dim, path.string());
  man.output(path);
  man.write(dir);
  std::cout << "dimension build: " << name << " with " << dim.k() << " pairs"
            << (dim.degenerate ? " (degenerate)" : "") << '\n';
}

struct DimScoreOpts {
  std::string embedding, dimension, out_dir;
};

void run_dim_score(const DimScoreOpts& o) {
  RunManifest man("dimension score");
  man.config() = {{"embedding", o.embedding}, {"dimension", o.dimension}};
  const auto dir = resolve_out_dir(o.out_dir);

  man.input("embedding", o.embedding);
  man.input("dimension", o.dimension);
  const auto emb = load_embedding(o.embedding);
  const auto dim = load_dimension(o.dimension);
  const auto units = unit_rows(emb);
  const auto partisan = score_communities(emb, units, dim);
  const auto ness = score_ness(emb, units, dim);

  const auto p1 = dir / (dim.name + ".scores.tsv");
  const auto p2 = dir / (dim.name + ".ness.scores.tsv");
  save_score_table(partisan, p1.string());
  save_score_table(ness, p2.string());
  man.output(p1);
  man.output(p2);
  man.write(dir);
  std::cout << "dimension score: " << dim.name << " over " << partisan.size()
            << " communities\n";
}

struct DimCompareOpts {
  std::string scores_a, scores_b, out_dir;
};

void run_dim_compare(const DimCompareOpts& o) {
  RunManifest man("dimension compare");
  man.config() = {{"scores_a", o.scores_a}, {"scores_b", o.scores_b}};
  const auto dir = resolve_out_dir(o.out_dir);

  man.input("scores_a", o.scores_a);
  man.input("scores_b", o.scores_b);
  const auto a = load_score_table(o.scores_a);
  const auto b = load_score_table(o.scores_b);
  const auto corr = compare_dimensions(a, b);

  json j = {{"r", corr.r}, {"p", corr.p}, {"n", corr.n}};
  {
    auto out = open_output((dir / "dimension_compare.json").string());
    out << j.dump(2) << '\n';
    if (!out) throw InputError("write failure: dimension_compare.json");
  }
  man.output(dir / "dimension_compare.json");
  man.write(dir);
  std::cout << "dimension compare: r=" << fmt_g(corr.r, 6)
            << " p=" << fmt_g(corr.p, 6) << " n=" << corr.n << '\n';
}

// ---- word-scores ------------------------------------------------------------------

struct WordScoreOpts {
  std::string usage, scores, out_dir;
  std::uint32_t cap = 100;
};

void run_word_scores(const WordScoreOpts& o) {
  RunManifest man("word-scores");
  man.config() = {{"usage", o.usage}, {"scores", o.scores}, {"cap", o.cap}};
  const auto dir = resolve_out_dir(o.out_dir);

  man.input("usage", o.usage);
  man.input("scores", o.scores);
  const auto usage = load_word_usage(o.usage, o.cap);
  const auto scores = load_score_table(o.scores);
  const auto ws = word_scores(usage, scores);

  save_word_scores(ws, (dir / "word_scores.tsv").string());
  man.output(dir / "word_scores.tsv");
  man.write(dir);
  std::cout << "word-scores: " << ws.size() << " words\n";
}

// ---- polarize <analysis> -----------------------------------------------------------

struct PolarizeOpts {
  std::string input, format = "jsonl";
  std::string scores, ness, clusters;
  int politics_cluster = -1;
  double coverage = 0.8;
  int workers = 1;
  std::string out_dir;

  // analysis-specific knobs
  double threshold = 3.0;      // extreme
  std::uint64_t min_comments = 10;  // user-months, fraction
  double delta = 1.0;          // fraction
  std::string period = "year"; // decompose, wings
  int lag = 12;                // decompose, wings
  std::string wing = "left";   // wings, implicit
  double z_threshold = 2.0;    // implicit
  double bin_width = 0.25;     // deleted
  double epsilon = 1e-9;       // deleted
  bool by_community = false;   // selection
};

struct PolarizeData {
  std::vector<InteractionRecord> records;
  ScoreTable partisan;
  ScoreTable ness;
  PoliticalSubset subset;
  PoliticalComments comments;
  Provenance prov;
};

PolarizeData load_polarize(const PolarizeOpts& o, RunManifest& man,
                           bool need_comments = true) {
  PolarizeData d;
  man.input("scores", o.scores);
  man.input("ness", o.ness);
  man.input("clusters", o.clusters);
  d.partisan = load_score_table(o.scores);
  d.ness = load_score_table(o.ness);
  if (d.partisan.ids != d.ness.ids)
    throw InputError("partisan and -ness tables cover different vocabularies");
  const auto vocab = vocab_from_scores(d.ness);
  const auto clustering = load_clustering(o.clusters, vocab);
  d.subset = select_political(d.ness, clustering,
                              static_cast<std::int32_t>(o.politics_cluster),
                              o.coverage);
  if (need_comments) {
    d.records = load_records(o.input, o.format, o.workers, man);
    d.comments = political_comments(d.records, d.subset, d.partisan);
  }
  d.prov = {{"tool", std::string("commdim ") + kVersion},
            {"politics_cluster", std::to_string(o.politics_cluster)},
            {"coverage", fmt_g(o.coverage, 12)},
            {"ness_cutoff", fmt_g(d.subset.ness_cutoff, 12)},
            {"political_communities", std::to_string(d.subset.size())}};
  return d;
}

void polarize_common_config(const PolarizeOpts& o, RunManifest& man) {
  man.config() = {{"input", o.input},
                  {"format", o.format},
                  {"scores", o.scores},
                  {"ness", o.ness},
                  {"clusters", o.clusters},
                  {"politics_cluster", o.politics_cluster},
                  {"coverage", o.coverage},
                  {"workers", o.workers}};
}

void run_polarize_select(const PolarizeOpts& o) {
  RunManifest man("polarize select");
  polarize_common_config(o, man);
  const auto dir = resolve_out_dir(o.out_dir);
  auto d = load_polarize(o, man, /*need_comments=*/false);
  save_political_subset(d.subset, d.ness, (dir / "political_subset.tsv").string());
  man.output(dir / "political_subset.tsv");
  man.write(dir);
  std::cout << "polarize select: " << d.subset.size() << " of "
            << d.subset.vocab_size << " communities, cutoff "
            << fmt_g(d.subset.ness_cutoff, 6) << '\n';
}

void run_polarize_bins(const PolarizeOpts& o) {
  RunManifest man("polarize bins");
  polarize_common_config(o, man);
  const auto dir = resolve_out_dir(o.out_dir);
  auto d = load_polarize(o, man);
  const auto overall = overall_bin_shares(d.comments);
  const auto monthly = monthly_bin_shares(d.comments);
  save_bin_shares(overall, monthly, (dir / "bin_shares.tsv").string(), d.prov);
  man.output(dir / "bin_shares.tsv");
  man.write(dir);
  std::cout << "polarize bins: " << overall.n << " political comments\n";
}

void run_polarize_selection(const PolarizeOpts& o) {
  RunManifest man("polarize selection");
  polarize_common_config(o, man);
  man.config()["by_community"] = o.by_community;
  const auto dir = resolve_out_dir(o.out_dir);
  auto d = load_polarize(o, man);
  const auto m = selection_matrix(d.comments);
  save_selection_matrix(m, (dir / "selection_matrix.tsv").string(), d.prov);
  man.output(dir / "selection_matrix.tsv");
  if (o.by_community) {
    const auto rows = community_selection(d.comments);
    save_community_selection(rows, d.comments,
                             (dir / "community_selection.tsv").string(), d.prov);
    man.output(dir / "community_selection.tsv");
  }
  man.write(dir);
  std::cout << "polarize selection: matrix written\n";
}

void run_polarize_monthly(const PolarizeOpts& o) {
  RunManifest man("polarize monthly");
  polarize_common_config(o, man);
  const auto dir = resolve_out_dir(o.out_dir);
  auto d = load_polarize(o, man);
  const auto rows = monthly_polarization(d.comments);
  save_monthly_polarization(rows, (dir / "monthly_polarization.tsv").string(),
                            d.prov);
  man.output(dir / "monthly_polarization.tsv");
  man.write(dir);
  std::cout << "polarize monthly: " << rows.size() << " months\n";
}

void run_polarize_extreme(const PolarizeOpts& o) {
  RunManifest man("polarize extreme");
  polarize_common_config(o, man);
  man.config()["threshold"] = o.threshold;
  const auto dir = resolve_out_dir(o.out_dir);
  auto d = load_polarize(o, man);
  const auto rows = extreme_share(d.comments, o.threshold);
  save_extreme_share(rows, (dir / "extreme_share.tsv").string(), d.prov);
  man.output(dir / "extreme_share.tsv");
  man.write(dir);
  std::cout << "polarize extreme: " << rows.size() << " months\n";
}

void run_polarize_cohorts(const PolarizeOpts& o) {
  RunManifest man("polarize cohorts");
  polarize_common_config(o, man);
  const auto dir = resolve_out_dir(o.out_dir);
  auto d = load_polarize(o, man);
  const auto fa = first_activity(d.comments);
  save_cohort_series(cohort_series(d.comments, fa),
                     (dir / "cohort_series.tsv").string(), d.prov);
  save_age_series(account_age_series(d.comments, fa), "account_age_months",
                  (dir / "account_age.tsv").string(), d.prov);
  save_age_series(active_months_series(d.comments), "active_months",
                  (dir / "active_months.tsv").string(), d.prov);
  man.output(dir / "cohort_series.tsv");
  man.output(dir / "account_age.tsv");
  man.output(dir / "active_months.tsv");
  man.write(dir);
  std::cout << "polarize cohorts: series written\n";
}

void run_polarize_user_months(const PolarizeOpts& o) {
  RunManifest man("polarize user-months");
  polarize_common_config(o, man);
  man.config()["min_comments"] = o.min_comments;
  const auto dir = resolve_out_dir(o.out_dir);
  auto d = load_polarize(o, man);
  const auto rows = user_month_scores(d.comments, o.min_comments);
  save_user_month_scores(rows, d.comments,
                         (dir / "user_month_scores.tsv").string(), d.prov);
  man.output(dir / "user_month_scores.tsv");
  man.write(dir);
  std::cout << "polarize user-months: " << rows.size() << " user-months\n";
}

void run_polarize_fraction(const PolarizeOpts& o) {
  RunManifest man("polarize fraction");
  polarize_common_config(o, man);
  man.config()["min_comments"] = o.min_comments;
  man.config()["delta"] = o.delta;
  const auto dir = resolve_out_dir(o.out_dir);
  auto d = load_polarize(o, man);
  const auto um = user_month_scores(d.comments, o.min_comments);
  const auto cells = polarization_matrix(um, o.delta);
  save_polarization_matrix(cells, (dir / "polarization_matrix.tsv").string(),
                           d.prov);
  man.output(dir / "polarization_matrix.tsv");
  man.write(dir);
  std::cout << "polarize fraction: " << cells.size() << " month pairs\n";
}

void run_polarize_decompose(const PolarizeOpts& o) {
  RunManifest man("polarize decompose");
  polarize_common_config(o, man);
  man.config()["period"] = o.period;
  man.config()["lag"] = o.lag;
  const auto dir = resolve_out_dir(o.out_dir);
  auto d = load_polarize(o, man);
  const auto fa = first_activity(d.comments);
  const auto period = parse_period(o.period);
  const auto rows = decompose_change(d.comments, fa, period, o.lag);
  save_decomposition(rows, period, (dir / "decomposition.tsv").string(), d.prov);
  man.output(dir / "decomposition.tsv");
  man.write(dir);
  std::cout << "polarize decompose: " << rows.size() << " periods\n";
}

void run_polarize_wings(const PolarizeOpts& o) {
  RunManifest man("polarize wings");
  polarize_common_config(o, man);
  man.config()["wing"] = o.wing;
  man.config()["period"] = o.period;
  man.config()["lag"] = o.lag;
  const auto dir = resolve_out_dir(o.out_dir);
  auto d = load_polarize(o, man);
  const auto wing = parse_wing(o.wing);
  const auto tag = wing_tag(wing);
  // First activity comes from the full political history so cohort and
  // new/existing splits stay comparable across wings.
  const auto fa = first_activity(d.comments);
  const auto filtered = wing_filter(d.comments, wing);
  auto prov = d.prov;
  prov.emplace_back("wing", tag);

  const auto p1 = dir / ("wing_" + tag + "_monthly.tsv");
  const auto p2 = dir / ("wing_" + tag + "_decomposition.tsv");
  const auto p3 = dir / ("wing_" + tag + "_cohorts.tsv");
  save_monthly_polarization(monthly_polarization(filtered), p1.string(), prov);
  const auto period = parse_period(o.period);
  save_decomposition(decompose_change(filtered, fa, period, o.lag), period,
                     p2.string(), prov);
  save_cohort_series(cohort_series(filtered, fa), p3.string(), prov);
  man.output(p1);
  man.output(p2);
  man.output(p3);
  man.write(dir);
  std::cout << "polarize wings: " << tag << " series written\n";
}

void run_polarize_implicit(const PolarizeOpts& o) {
  RunManifest man("polarize implicit");
  polarize_common_config(o, man);
  man.config()["wing"] = o.wing;
  man.config()["z_threshold"] = o.z_threshold;
  const auto dir = resolve_out_dir(o.out_dir);
  auto d = load_polarize(o, man);
  const auto res = implicit_explicit(d.records, d.partisan, d.ness, d.subset,
                                     parse_wing(o.wing), o.z_threshold);
  auto prov = d.prov;
  prov.emplace_back("wing", wing_tag(res.wing));
  prov.emplace_back("z_threshold", fmt_g(res.z_threshold, 12));
  prov.emplace_back("explicit_communities",
                    std::to_string(res.n_explicit_communities));
  prov.emplace_back("implicit_communities",
                    std::to_string(res.n_implicit_communities));
  save_implicit_explicit(res, (dir / "implicit_matrix.tsv").string(),
                         (dir / "implicit_series.tsv").string(), prov);
  man.output(dir / "implicit_matrix.tsv");
  man.output(dir / "implicit_series.tsv");
  man.write(dir);
  std::cout << "polarize implicit: " << res.n_implicit_communities
            << " implicit vs " << res.n_explicit_communities
            << " explicit communities\n";
}

void run_polarize_deleted(const PolarizeOpts& o) {
  RunManifest man("polarize deleted");
  polarize_common_config(o, man);
  man.config()["bin_width"] = o.bin_width;
  man.config()["epsilon"] = o.epsilon;
  const auto dir = resolve_out_dir(o.out_dir);
  auto d = load_polarize(o, man);
  const auto res = compare_deleted(d.comments, o.bin_width, o.epsilon);
  save_deleted_comparison(res, (dir / "deleted_comparison.tsv").string(), d.prov);
  man.output(dir / "deleted_comparison.tsv");
  man.write(dir);
  std::cout << "polarize deleted: " << res.n_deleted << " deleted vs "
            << res.n_kept << " kept\n";
}

// ---- null shuffle|bins ------------------------------------------------------------

struct NullShuffleOpts {
  std::string input, format = "jsonl", out_dir;
  std::uint64_t seed = 1;
  int workers = 1;
};

void run_null_shuffle(const NullShuffleOpts& o) {
  RunManifest man("null shuffle");
  man.config() = {{"input", o.input},
                  {"format", o.format},
                  {"seed", o.seed},
                  {"workers", o.workers}};
  const auto dir = resolve_out_dir(o.out_dir);
  const auto records = load_records(o.input, o.format, o.workers, man);
  const auto shuffled = shuffle_authors(records, ShuffleConfig{o.seed});
  save_interactions_tsv(shuffled, (dir / "shuffled.tsv").string());
  man.output(dir / "shuffled.tsv");
  man.write(dir);
  std::cout << "null shuffle: " << shuffled.size() << " records\n";
}

struct NullBinsOpts {
  std::string scores, ness, input, format = "tsv", out_dir;
  std::size_t n_political = 0;
  std::vector<std::size_t> bin_sizes;
  int workers = 1;
};

void run_null_bins(const NullBinsOpts& o) {
  RunManifest man("null bins");
  man.config() = {{"scores", o.scores},
                  {"ness", o.ness},
                  {"input", o.input},
                  {"format", o.format},
                  {"n_political", o.n_political},
                  {"bin_sizes", o.bin_sizes},
                  {"workers", o.workers}};
  const auto dir = resolve_out_dir(o.out_dir);
  if (o.bin_sizes.size() != 5)
    throw ConfigError("--bin-sizes needs exactly 5 comma-separated counts");
  std::array<std::size_t, 5> sizes{};
  std::copy(o.bin_sizes.begin(), o.bin_sizes.end(), sizes.begin());

  man.input("scores", o.scores);
  man.input("ness", o.ness);
  const auto partisan = load_score_table(o.scores);
  const auto ness = load_score_table(o.ness);
  const auto bins = null_political_bins(partisan, ness, o.n_political, sizes);

  {
    auto out = open_output((dir / "null_bins.tsv").string());
    out << "# n_political=" << o.n_political
        << "\n# ness_cutoff=" << fmt_g(bins.subset.ness_cutoff, 12)
        << "\n# tie_split=" << (bins.tie_split ? 1 : 0) << "\n";
    out << "community_id\tbin\n";
    for (const auto& id : bins.subset.communities)
      out << id << '\t' << bins.bin_of.find(id)->second << '\n';
    if (!out) throw InputError("write failure: null_bins.tsv");
  }
  man.output(dir / "null_bins.tsv");

  if (!o.input.empty()) {
    const auto records = load_records(o.input, o.format, o.workers, man);
    const auto comments = null_political_comments(records, bins, partisan);
    Provenance prov = {{"tool", std::string("commdim ") + kVersion},
                       {"null", "author-shuffle"},
                       {"n_political", std::to_string(o.n_political)}};
    save_bin_shares(overall_bin_shares(comments), monthly_bin_shares(comments),
                    (dir / "null_bin_shares.tsv").string(), prov);
    save_selection_matrix(selection_matrix(comments),
                          (dir / "null_selection_matrix.tsv").string(), prov);
    man.output(dir / "null_bin_shares.tsv");
    man.output(dir / "null_selection_matrix.tsv");
  }
  man.write(dir);
  std::cout << "null bins: " << bins.subset.size() << " communities"
            << (bins.tie_split ? " (boundary tie split by id)" : "") << '\n';
}

// ---- validate ----------------------------------------------------------------

struct ValidateOpts {
  std::string scores, measure, out_dir;
  bool groups = false;
};

void run_validate(const ValidateOpts& o) {
  RunManifest man("validate");
  man.config() = {{"scores", o.scores},
                  {"measure", o.measure},
                  {"groups", o.groups}};
  const auto dir = resolve_out_dir(o.out_dir);

  man.input("scores", o.scores);
  man.input("measure", o.measure);
  const auto scores = load_score_table(o.scores);
  const auto measure = load_external_measure(o.measure);

  json j;
  MatchReport rep;
  const auto corr = correlate(scores, measure, &rep);
  j["pearson"] = {{"r", corr.r}, {"p", corr.p}, {"n", corr.n}};
  j["matched"] = rep.matched;
  j["unmatched"] = rep.unmatched;
  if (o.groups) {
    const auto gs = group_separation(scores, measure);
    j["groups"] = {{"label_1", gs.label_1},
                   {"label_0", gs.label_0},
                   {"n_1", gs.n_1},
                   {"n_0", gs.n_0},
                   {"cohens_d", gs.cohens_d},
                   {"point_biserial", gs.point_biserial}};
  }
  {
    auto out = open_output((dir / "validation.json").string());
    out << j.dump(2) << '\n';
    if (!out) throw InputError("write failure: validation.json");
  }
  man.output(dir / "validation.json");
  man.write(dir);
  std::cout << "validate: r=" << fmt_g(corr.r, 6) << " p=" << fmt_g(corr.p, 6)
            << " over " << rep.matched << " matched communities\n";
}

// ---- export ----------------------------------------------------------------

struct ExportOpts {
  std::string embedding, text_out;
  std::string text_in, binary_out;
  std::string pairs, meta, pmi_out;
  std::string out_dir;
};

void run_export(const ExportOpts& o) {
  RunManifest man("export");
  man.config() = {{"embedding", o.embedding},   {"text_out", o.text_out},
                  {"text_in", o.text_in},       {"binary_out", o.binary_out},
                  {"pairs", o.pairs},           {"meta", o.meta},
                  {"pmi_out", o.pmi_out}};
  const auto dir = resolve_out_dir(o.out_dir);
  bool did_anything = false;

  if (!o.text_out.empty()) {
    if (o.embedding.empty())
      throw ConfigError("--text-out needs --embedding");
    man.input("embedding", o.embedding);
    const auto emb = load_embedding(o.embedding);
    const auto path = dir / o.text_out;
    save_embedding_text(emb, path.string());
    man.output(path);
    did_anything = true;
  }
  if (!o.binary_out.empty()) {
    if (o.text_in.empty())
      throw ConfigError("--binary-out needs --text-in");
    man.input("text_in", o.text_in);
    const auto emb = load_embedding_text(o.text_in);
    const auto path = dir / o.binary_out;
    save_embedding(emb, path.string());
    man.output(path);
    did_anything = true;
  }
  if (!o.pmi_out.empty()) {
    if (o.pairs.empty() || o.meta.empty())
      throw ConfigError("--pmi-out needs --pairs and --meta");
    man.input("pairs", o.pairs);
    man.input("meta", o.meta);
    const auto vocab = load_vocab_from_meta(o.meta);
    const auto table = load_pair_table(o.pairs, vocab);
    const auto pmi = pmi_matrix(table, vocab.size());
    const std::size_t n_users = table.users->ids.size();
    const auto path = dir / o.pmi_out;
    auto out = open_output(path.string());
    out << "community_id\tuser_id\tpmi\n";
    for (std::size_t c = 0; c < vocab.size(); ++c)
      for (std::size_t u = 0; u < n_users; ++u) {
        const double v = pmi[c * n_users + u];
        if (std::isinf(v)) continue;
        out << vocab.entries[c].id << '\t' << table.users->ids[u] << '\t'
            << fmt_g(v, 12) << '\n';
      }
    if (!out) throw InputError("write failure: " + path.string());
    man.output(path);
    did_anything = true;
  }
  if (!did_anything)
    throw ConfigError(
        "export needs at least one of --text-out, --binary-out, --pmi-out");
  man.write(dir);
  std::cout << "export: done\n";
}

// ---- wiring -------------------------------------------------------------------

void add_out_dir(CLI::App* sub, std::string& out_dir) {
  sub->add_option("--out-dir", out_dir,
                  "Output directory (default: $COMMDIM_OUT_DIR or .)");
  auto cfg = std::make_shared<std::string>();
  sub->add_option("--config", *cfg,
                  "Read command-line-unset options from a key=value file");
  sub->parse_complete_callback([sub, cfg] {
    if (!cfg->empty()) apply_config_file(sub, *cfg);
  });
}

void add_polarize_common(CLI::App* sub, PolarizeOpts& o) {
  sub->add_option("--input", o.input, "Interaction log")->required();
  sub->add_option("--format", o.format, "Log format: jsonl or tsv")
      ->check(CLI::IsMember({"jsonl", "tsv"}));
  sub->add_option("--scores", o.scores, "Partisan score table")->required();
  sub->add_option("--ness", o.ness, "-ness score table")->required();
  sub->add_option("--clusters", o.clusters, "Clustering table")->required();
  sub->add_option("--politics-cluster", o.politics_cluster,
                  "Cluster id anchoring the political subset")
      ->required();
  sub->add_option("--coverage", o.coverage,
                  "Politics-cluster coverage for the -ness cutoff");
  sub->add_option("--workers", o.workers, "Parse worker threads");
  add_out_dir(sub, o.out_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"commdim: community embeddings and polarization analyses"};
  app.require_subcommand(1);

  // ingest
  IngestOpts ingest;
  auto* s_ingest = app.add_subcommand("ingest", "Parse logs into pair tables");
  s_ingest->add_option("--input", ingest.input, "Interaction log")->required();
  s_ingest->add_option("--format", ingest.format, "Log format: jsonl or tsv")
      ->check(CLI::IsMember({"jsonl", "tsv"}));
  s_ingest->add_option("--top-n", ingest.top_n, "Vocabulary size cap");
  s_ingest->add_option("--workers", ingest.workers, "Parse worker threads");
  add_out_dir(s_ingest, ingest.out_dir);
  s_ingest->callback([&] { run_ingest(ingest); });

  // train
  TrainOpts train;
  bool train_strict = false;
  auto* s_train = app.add_subcommand("train", "Train community embeddings");
  s_train->add_option("--pairs", train.pairs, "Pair table TSV")->required();
  s_train->add_option("--meta", train.meta, "Pair table metadata JSON")
      ->required();
  s_train->add_option("--dim", train.config.dim, "Embedding dimensionality");
  s_train->add_option("--negative", train.config.negative,
                      "Negative samples per pair");
  s_train->add_option("--sample", train.config.sample,
                      "Frequent-community downsampling rate");
  s_train->add_option("--alpha", train.config.alpha, "Initial learning rate");
  s_train->add_option("--min-alpha", train.config.min_alpha,
                      "Final learning rate (default alpha * 1e-4)");
  s_train->add_flag("!--no-shuffle", train.config.shuffled,
                    "Keep pair instances in table order");
  s_train->add_option("--epochs", train.config.epochs, "Training epochs");
  auto* train_seed =
      s_train->add_option("--seed", train.config.seed, "RNG seed");
  s_train->add_option("--workers", train.config.workers,
                      "Trainer threads (1 = deterministic)");
  s_train->add_flag("--text", train.text, "Also write a text export");
  s_train->add_flag("--contexts", train.contexts,
                    "Persist user context vectors too");
  s_train->add_flag("--strict", train_strict,
                    "Fail unless all seeds are explicit");
  add_out_dir(s_train, train.out_dir);
  s_train->callback([&] {
    require_seed(train_seed, train_strict);
    run_train(train);
  });

  // eval-analogies
  AnalogyOpts analogy;
  auto* s_analogy =
      app.add_subcommand("eval-analogies", "Evaluate planted analogies");
  s_analogy->add_option("--embedding", analogy.embedding, "Embedding file")
      ->required();
  s_analogy->add_option("--analogies", analogy.analogies, "Analogy TSV")
      ->required();
  add_out_dir(s_analogy, analogy.out_dir);
  s_analogy->callback([&] { run_eval_analogies(analogy); });

  // cluster
  ClusterOpts clus;
  auto* s_cluster =
      app.add_subcommand("cluster", "Agglomerative community clustering");
  s_cluster->add_option("--embedding", clus.embedding, "Embedding file")
      ->required();
  s_cluster->add_option("--k", clus.k, "Number of clusters");
  s_cluster->add_option("--linkage", clus.linkage,
                        "Linkage: ward, average, complete")
      ->check(CLI::IsMember({"ward", "average", "complete"}));
  add_out_dir(s_cluster, clus.out_dir);
  s_cluster->callback([&] { run_cluster(clus); });

  // dimension build|score|compare
  auto* s_dim = app.add_subcommand("dimension", "Social dimension operations");
  s_dim->require_subcommand(1);

  DimBuildOpts dbuild;
  auto* s_dbuild = s_dim->add_subcommand("build", "Augment a seed pair");
  s_dbuild->add_option("--embedding", dbuild.embedding, "Embedding file")
      ->required();
  s_dbuild->add_option("--name", dbuild.name, "Dimension name");
  s_dbuild->add_option("--seed", dbuild.seed, "Seed pair LEFT:RIGHT");
  s_dbuild->add_option("--preset", dbuild.preset, "Named seed preset");
  s_dbuild->add_option("--k", dbuild.k, "Total pairs after augmentation");
  s_dbuild->add_option("--nn-k", dbuild.nn_k, "Neighbours per candidate pool");
  add_out_dir(s_dbuild, dbuild.out_dir);
  s_dbuild->callback([&] { run_dim_build(dbuild); });

  DimScoreOpts dscore;
  auto* s_dscore = s_dim->add_subcommand("score", "Score communities");
  s_dscore->add_option("--embedding", dscore.embedding, "Embedding file")
      ->required();
  s_dscore->add_option("--dimension", dscore.dimension, "Dimension JSON")
      ->required();
  add_out_dir(s_dscore, dscore.out_dir);
  s_dscore->callback([&] { run_dim_score(dscore); });

  DimCompareOpts dcomp;
  auto* s_dcomp = s_dim->add_subcommand("compare", "Correlate two score tables");
  s_dcomp->add_option("--scores-a", dcomp.scores_a, "First score table")
      ->required();
  s_dcomp->add_option("--scores-b", dcomp.scores_b, "Second score table")
      ->required();
  add_out_dir(s_dcomp, dcomp.out_dir);
  s_dcomp->callback([&] { run_dim_compare(dcomp); });

  // word-scores
  WordScoreOpts wscore;
  auto* s_wscore =
      app.add_subcommand("word-scores", "Score words by community usage");
  s_wscore->add_option("--usage", wscore.usage, "Word usage TSV")->required();
  s_wscore->add_option("--scores", wscore.scores, "Community score table")
      ->required();
  s_wscore->add_option("--cap", wscore.cap, "Per-commenter usage cap");
  add_out_dir(s_wscore, wscore.out_dir);
  s_wscore->callback([&] { run_word_scores(wscore); });

  // polarize <analysis>
  auto* s_pol = app.add_subcommand("polarize", "Polarization analyses");
  s_pol->require_subcommand(1);
  PolarizeOpts pol;

  auto* s_select = s_pol->add_subcommand("select", "Political subset");
  add_polarize_common(s_select, pol);
  s_select->get_option("--input")->required(false);
  s_select->callback([&] { run_polarize_select(pol); });

  auto* s_bins = s_pol->add_subcommand("bins", "Overall and monthly bin shares");
  add_polarize_common(s_bins, pol);
  s_bins->callback([&] { run_polarize_bins(pol); });

  auto* s_selection =
      s_pol->add_subcommand("selection", "Self-selection matrix f(b1,b2)");
  add_polarize_common(s_selection, pol);
  s_selection->add_flag("--by-community", pol.by_community,
                        "Also write per-community selection rows");
  s_selection->callback([&] { run_polarize_selection(pol); });

  auto* s_monthly =
      s_pol->add_subcommand("monthly", "Monthly mean |z| polarization");
  add_polarize_common(s_monthly, pol);
  s_monthly->callback([&] { run_polarize_monthly(pol); });

  auto* s_extreme = s_pol->add_subcommand("extreme", "Extreme comment shares");
  add_polarize_common(s_extreme, pol);
  s_extreme->add_option("--threshold", pol.threshold, "|z| cutoff");
  s_extreme->callback([&] { run_polarize_extreme(pol); });

  auto* s_cohorts =
      s_pol->add_subcommand("cohorts", "Cohort, account-age, active-month series");
  add_polarize_common(s_cohorts, pol);
  s_cohorts->callback([&] { run_polarize_cohorts(pol); });

  auto* s_um = s_pol->add_subcommand("user-months", "Per user-month mean z");
  add_polarize_common(s_um, pol);
  s_um->add_option("--min-comments", pol.min_comments,
                   "Minimum comments per user-month");
  s_um->callback([&] { run_polarize_user_months(pol); });

  auto* s_frac =
      s_pol->add_subcommand("fraction", "Polarized-user fraction matrix");
  add_polarize_common(s_frac, pol);
  s_frac->add_option("--min-comments", pol.min_comments,
                     "Minimum comments per user-month");
  s_frac->add_option("--delta", pol.delta, "SD multiplier for 'polarized'");
  s_frac->callback([&] { run_polarize_fraction(pol); });

  auto* s_decomp =
      s_pol->add_subcommand("decompose", "New vs existing user decomposition");
  add_polarize_common(s_decomp, pol);
  s_decomp->add_option("--period", pol.period, "Period: year or month")
      ->check(CLI::IsMember({"year", "month"}));
  s_decomp->add_option("--lag", pol.lag, "Months before an author is existing");
  s_decomp->callback([&] { run_polarize_decompose(pol); });

  auto* s_wings = s_pol->add_subcommand("wings", "Per-wing series");
  add_polarize_common(s_wings, pol);
  s_wings->add_option("--wing", pol.wing, "Wing: left, right, center")
      ->check(CLI::IsMember({"left", "right", "center"}));
  s_wings->add_option("--period", pol.period, "Period: year or month")
      ->check(CLI::IsMember({"year", "month"}));
  s_wings->add_option("--lag", pol.lag, "Months before an author is existing");
  s_wings->callback([&] { run_polarize_wings(pol); });

  auto* s_impl =
      s_pol->add_subcommand("implicit", "Implicit-to-explicit gateway analysis");
  add_polarize_common(s_impl, pol);
  s_impl->add_option("--wing", pol.wing, "Wing: left or right")
      ->check(CLI::IsMember({"left", "right"}));
  s_impl->add_option("--z-threshold", pol.z_threshold,
                     "Partisan |z| for implicit membership");
  s_impl->callback([&] { run_polarize_implicit(pol); });

  auto* s_del = s_pol->add_subcommand("deleted", "Deleted vs kept comparison");
  add_polarize_common(s_del, pol);
  s_del->add_option("--bin-width", pol.bin_width, "Histogram bin width");
  s_del->add_option("--epsilon", pol.epsilon, "Zero-mass floor");
  s_del->callback([&] { run_polarize_deleted(pol); });

  // null shuffle|bins
  auto* s_null = app.add_subcommand("null", "Author-shuffle null model");
  s_null->require_subcommand(1);

  NullShuffleOpts nshuf;
  bool null_strict = false;
  auto* s_nshuf = s_null->add_subcommand("shuffle", "Permute the author column");
  s_nshuf->add_option("--input", nshuf.input, "Interaction log")->required();
  s_nshuf->add_option("--format", nshuf.format, "Log format: jsonl or tsv")
      ->check(CLI::IsMember({"jsonl", "tsv"}));
  auto* nshuf_seed = s_nshuf->add_option("--seed", nshuf.seed, "RNG seed");
  s_nshuf->add_option("--workers", nshuf.workers, "Parse worker threads");
  s_nshuf->add_flag("--strict", null_strict,
                    "Fail unless all seeds are explicit");
  add_out_dir(s_nshuf, nshuf.out_dir);
  s_nshuf->callback([&] {
    require_seed(nshuf_seed, null_strict);
    run_null_shuffle(nshuf);
  });

  NullBinsOpts nbins;
  auto* s_nbins =
      s_null->add_subcommand("bins", "Count-matched bins on a null embedding");
  s_nbins->add_option("--scores", nbins.scores, "Null partisan score table")
      ->required();
  s_nbins->add_option("--ness", nbins.ness, "Null -ness score table")
      ->required();
  s_nbins->add_option("--n-political", nbins.n_political,
                      "Real political subset size")
      ->required();
  s_nbins->add_option("--bin-sizes", nbins.bin_sizes,
                      "Real bin community counts, 5 values")
      ->delimiter(',')
      ->required();
  s_nbins->add_option("--input", nbins.input,
                      "Shuffled log; adds null share/selection tables");
  s_nbins->add_option("--format", nbins.format, "Log format: jsonl or tsv")
      ->check(CLI::IsMember({"jsonl", "tsv"}));
  s_nbins->add_option("--workers", nbins.workers, "Parse worker threads");
  add_out_dir(s_nbins, nbins.out_dir);
  s_nbins->callback([&] { run_null_bins(nbins); });

  // validate
  ValidateOpts val;
  auto* s_val =
      app.add_subcommand("validate", "Correlate scores with an external measure");
  s_val->add_option("--scores", val.scores, "Score table")->required();
  s_val->add_option("--measure", val.measure, "External measure CSV")
      ->required();
  s_val->add_flag("--groups", val.groups, "Also report group separation");
  add_out_dir(s_val, val.out_dir);
  s_val->callback([&] { run_validate(val); });

  // export
  ExportOpts exp;
  auto* s_exp = app.add_subcommand("export", "Format conversions and PMI table");
  s_exp->add_option("--embedding", exp.embedding, "Binary embedding input");
  s_exp->add_option("--text-out", exp.text_out, "Text export file name");
  s_exp->add_option("--text-in", exp.text_in, "Text embedding input");
  s_exp->add_option("--binary-out", exp.binary_out, "Binary export file name");
  s_exp->add_option("--pairs", exp.pairs, "Pair table TSV");
  s_exp->add_option("--meta", exp.meta, "Pair table metadata JSON");
  s_exp->add_option("--pmi-out", exp.pmi_out, "Sparse PMI table file name");
  add_out_dir(s_exp, exp.out_dir);
  s_exp->callback([&] { run_export(exp); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
