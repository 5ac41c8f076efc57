#pragma once

// SGNS training over arbitrary (community, user) pairs, word2vecf-style:
// communities are the words, users are the contexts. Negatives come from the
// user unigram distribution raised to the 3/4 power.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "commdim/common.hpp"
#include "commdim/ingest.hpp"
#include "commdim/io.hpp"

namespace commdim {

struct TrainConfig {
  int dim = 150;
  int negative = 35;
  double sample = 0.0043;
  double alpha = 0.18;
  double min_alpha = -1.0;  // resolved to 1e-4 * alpha when negative
  bool shuffled = true;
  int epochs = 1;
  std::uint64_t seed = 1;
  int workers = 1;

  double resolved_min_alpha() const {
    return min_alpha < 0.0 ? 1e-4 * alpha : min_alpha;
  }

  // Collects every violation so callers can report them all at once.
  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (dim < 1) v.push_back("dim must be >= 1");
    if (negative < 1) v.push_back("negative must be >= 1");
    if (!(sample >= 0.0 && sample <= 1.0))
      v.push_back("sample must be in [0, 1]");
    if (!(alpha > 0.0)) v.push_back("alpha must be > 0");
    if (!(alpha > resolved_min_alpha()))
      v.push_back("alpha must exceed min_alpha");
    if (min_alpha >= 0.0 && !(min_alpha >= 0.0 && min_alpha < alpha))
      v.push_back("min_alpha must satisfy 0 <= min_alpha < alpha");
    if (epochs < 1) v.push_back("epochs must be >= 1");
    if (workers < 1) v.push_back("workers must be >= 1");
    return v;
  }

  void validate() const {
    const auto v = violations();
    if (v.empty()) return;
    std::string msg = "invalid training config:";
    for (const auto& s : v) msg += "\n  - " + s;
    throw ConfigError(msg);
  }

  std::uint64_t hash() const {
    std::string s;
    s += "dim=" + std::to_string(dim);
    s += ";negative=" + std::to_string(negative);
    s += ";sample=" + fmt_g(sample, 17);
    s += ";alpha=" + fmt_g(alpha, 17);
    s += ";min_alpha=" + fmt_g(resolved_min_alpha(), 17);
    s += ";shuffled=" + std::to_string(shuffled ? 1 : 0);
    s += ";epochs=" + std::to_string(epochs);
    s += ";seed=" + std::to_string(seed);
    return fnv1a64(s);
  }
};

struct TrainingPair {
  std::int32_t community;
  std::int32_t user;
};

// p_keep(c) for the word2vec dual-term downsampling rule.
inline double keep_probability(double freq, double sample) {
  if (sample <= 0.0 || freq <= 0.0) return 1.0;
  const double p = (std::sqrt(freq / sample) + 1.0) * sample / freq;
  return std::min(1.0, p);
}

inline std::vector<double> keep_probabilities(const PairCountTable& table,
                                              double sample) {
  std::vector<double> p(table.community_totals.size(), 1.0);
  if (table.total == 0) return p;
  for (std::size_t c = 0; c < p.size(); ++c) {
    const double f = static_cast<double>(table.community_totals[c]) /
                     static_cast<double>(table.total);
    p[c] = keep_probability(f, sample);
  }
  return p;
}

// Expands counted triples into individual training pairs, applying frequency
// downsampling per instance, then (optionally) one uniform shuffle.
inline std::vector<TrainingPair> expand_pairs(const PairCountTable& table,
                                              const TrainConfig& config,
                                              SplitMix64& rng) {
  if (table.triples.empty())
    throw InputError("cannot expand an empty pair table");
  const auto keep = keep_probabilities(table, config.sample);
  std::vector<TrainingPair> pairs;
  pairs.reserve(static_cast<std::size_t>(
      static_cast<double>(table.total) *
          (config.sample > 0.0 ? 0.5 : 1.0) +
      64));
  for (const auto& t : table.triples) {
    const double p = keep[static_cast<std::size_t>(t.community)];
    for (std::uint32_t i = 0; i < t.count; ++i) {
      if (p >= 1.0 || rng.next_double() < p)
        pairs.push_back({t.community, t.user});
    }
  }
  if (config.shuffled && pairs.size() > 1) {
    for (std::size_t i = pairs.size() - 1; i > 0; --i) {
      const std::size_t j = rng.next_below(i + 1);
      std::swap(pairs[i], pairs[j]);
    }
  }
  return pairs;
}

// Walker alias sampler; construction is deterministic in the weight order.
class AliasSampler {
 public:
  explicit AliasSampler(std::span<const double> weights) {
    const std::size_t n = weights.size();
    if (n == 0) throw NumericError("alias sampler over empty support");
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw NumericError("negative alias weight");
      total += w;
    }
    if (!(total > 0.0)) throw NumericError("alias sampler with zero mass");
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (std::size_t i = 0; i < n; ++i)
      scaled[i] = weights[i] * static_cast<double>(n) / total;
    std::vector<std::uint32_t> small, large;
    for (std::size_t i = 0; i < n; ++i) {
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t l = large.back();
      large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = scaled[l] + scaled[s] - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (std::uint32_t i : large) prob_[i] = 1.0;
    for (std::uint32_t i : small) prob_[i] = 1.0;
  }

  std::uint32_t sample(SplitMix64& rng) const {
    const std::size_t i = rng.next_below(prob_.size());
    return rng.next_double() < prob_[i] ? static_cast<std::uint32_t>(i)
                                        : alias_[i];
  }

  std::size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

inline std::vector<double> noise_weights(std::span<const std::uint64_t> totals,
                                         double power = 0.75) {
  std::vector<double> w(totals.size());
  for (std::size_t i = 0; i < totals.size(); ++i)
    w[i] = std::pow(static_cast<double>(totals[i]), power);
  return w;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log(sigmoid(x)) without overflow at either tail.
inline double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

// Per-pair SGNS loss and analytic gradients, double precision. Exposed so the
// finite-difference check exercises exactly this definition.
//   loss = -log s(w.u) - sum_i log s(-w.n_i)
struct PairGradients {
  double loss = 0.0;
  std::vector<double> d_word;                  // d loss / d w
  std::vector<double> d_context;               // d loss / d u
  std::vector<std::vector<double>> d_negative; // d loss / d n_i
};

inline PairGradients sgns_pair_loss(std::span<const double> word,
                                    std::span<const double> context,
                                    std::span<const std::vector<double>> negatives) {
  const std::size_t dim = word.size();
  if (context.size() != dim)
    throw NumericError("sgns_pair_loss: dimension mismatch");
  PairGradients g;
  g.d_word.assign(dim, 0.0);
  g.d_context.assign(dim, 0.0);
  g.d_negative.resize(negatives.size());
  double dot = 0.0;
  for (std::size_t i = 0; i < dim; ++i) dot += word[i] * context[i];
  g.loss = -log_sigmoid(dot);
  const double gpos = 1.0 - sigmoid(dot);  // -d loss / d dot
  for (std::size_t i = 0; i < dim; ++i) {
    g.d_word[i] -= gpos * context[i];
    g.d_context[i] -= gpos * word[i];
  }
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    const auto& neg = negatives[k];
    if (neg.size() != dim)
      throw NumericError("sgns_pair_loss: negative dimension mismatch");
    double nd = 0.0;
    for (std::size_t i = 0; i < dim; ++i) nd += word[i] * neg[i];
    g.loss -= log_sigmoid(-nd);
    const double gneg = sigmoid(nd);
    g.d_negative[k].assign(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      g.d_word[i] += gneg * neg[i];
      g.d_negative[k][i] = gneg * word[i];
    }
  }
  return g;
}

struct Embedding {
  Vocabulary vocab;
  int dim = 0;
  std::vector<float> word_vectors;  // |V| x dim, row-major
  // User (context) vectors; kept after training, optionally persisted.
  std::vector<std::string> context_ids;
  std::vector<float> context_vectors;  // |U| x dim when present
  std::uint64_t config_hash = 0;
  std::vector<double> loss_trace;  // mean per-pair loss per training decile

  std::span<const float> word(std::int32_t dense) const {
    return {word_vectors.data() + static_cast<std::size_t>(dense) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::span<float> word_mut(std::int32_t dense) {
    return {word_vectors.data() + static_cast<std::size_t>(dense) * dim,
            static_cast<std::size_t>(dim)};
  }
  std::size_t size() const { return vocab.size(); }
};

namespace detail {

struct LossBuckets {
  std::array<double, 10> sum{};
  std::array<std::uint64_t, 10> count{};
};

inline void train_range(Embedding& emb, std::vector<float>& ctx,
                        std::span<const TrainingPair> pairs, std::size_t begin,
                        std::size_t end, int epochs,
                        const TrainConfig& config, const AliasSampler& noise,
                        std::uint64_t rng_seed, std::atomic<std::uint64_t>& step,
                        std::uint64_t total_steps, LossBuckets& buckets) {
  const int dim = emb.dim;
  SplitMix64 rng(rng_seed);
  const double alpha = config.alpha;
  const double min_alpha = config.resolved_min_alpha();
  std::vector<float> accum(static_cast<std::size_t>(dim));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t p = begin; p < end; ++p) {
      const std::uint64_t s = step.fetch_add(1, std::memory_order_relaxed);
      const double progress =
          static_cast<double>(s) / static_cast<double>(total_steps);
      const double lr =
          std::max(min_alpha, alpha - (alpha - min_alpha) * progress);
      float* w = emb.word_vectors.data() +
                 static_cast<std::size_t>(pairs[p].community) * dim;
      std::fill(accum.begin(), accum.end(), 0.0f);
      double loss = 0.0;
      for (int k = 0; k <= config.negative; ++k) {
        float* v;
        double label;
        if (k == 0) {
          v = ctx.data() + static_cast<std::size_t>(pairs[p].user) * dim;
          label = 1.0;
        } else {
          v = ctx.data() + static_cast<std::size_t>(noise.sample(rng)) * dim;
          label = 0.0;
        }
        double dot = 0.0;
        for (int i = 0; i < dim; ++i) dot += static_cast<double>(w[i]) * v[i];
        if (!std::isfinite(dot))
          throw NumericError("divergence: non-finite activation at step " +
                             std::to_string(s));
        loss -= label == 1.0 ? log_sigmoid(dot) : log_sigmoid(-dot);
        const float g = static_cast<float>((label - sigmoid(dot)) * lr);
        for (int i = 0; i < dim; ++i) {
          accum[static_cast<std::size_t>(i)] += g * v[i];
          v[i] += g * w[i];
        }
      }
      for (int i = 0; i < dim; ++i) w[i] += accum[static_cast<std::size_t>(i)];
      const std::size_t decile =
          std::min<std::size_t>(9, static_cast<std::size_t>(10 * s / total_steps));
      buckets.sum[decile] += loss;
      buckets.count[decile] += 1;
    }
  }
}

}  // namespace detail

// Trains the embedding over an expanded pair sequence. Multi-worker training
// follows the hogwild contract (racy shared updates); only workers=1 is
// bit-reproducible.
inline Embedding train(std::span<const TrainingPair> pairs,
                       const PairCountTable& table, const Vocabulary& vocab,
                       const TrainConfig& config) {
  config.validate();
  if (pairs.empty()) throw InputError("no training pairs");
  const int dim = config.dim;
  const std::size_t n_users = table.users->size();

  Embedding emb;
  emb.vocab = vocab;
  emb.dim = dim;
  emb.config_hash = config.hash();
  emb.word_vectors.assign(vocab.size() * static_cast<std::size_t>(dim), 0.0f);
  {
    SplitMix64 init_rng(derive_seed(config.seed, 1));
    const double half = 0.5 / dim;
    for (auto& x : emb.word_vectors)
      x = static_cast<float>((init_rng.next_double() * 2.0 - 1.0) * half);
  }
  std::vector<float> ctx(n_users * static_cast<std::size_t>(dim), 0.0f);

  const AliasSampler noise(noise_weights(table.user_totals));
  const std::uint64_t total_steps =
      static_cast<std::uint64_t>(pairs.size()) *
      static_cast<std::uint64_t>(config.epochs);
  std::atomic<std::uint64_t> step{0};

  const int workers = std::min<int>(config.workers,
                                    static_cast<int>(pairs.size()));
  std::vector<detail::LossBuckets> buckets(static_cast<std::size_t>(workers));
  if (workers == 1) {
    detail::train_range(emb, ctx, pairs, 0, pairs.size(), config.epochs, config,
                        noise, derive_seed(config.seed, 100), step, total_steps,
                        buckets[0]);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mu;
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = pairs.size() * static_cast<std::size_t>(w) /
                                static_cast<std::size_t>(workers);
      const std::size_t end = pairs.size() * static_cast<std::size_t>(w + 1) /
                              static_cast<std::size_t>(workers);
      pool.emplace_back([&, w, begin, end] {
        try {
          detail::train_range(emb, ctx, pairs, begin, end, config.epochs,
                              config, noise,
                              derive_seed(config.seed, 100 + static_cast<std::uint64_t>(w)),
                              step, total_steps, buckets[static_cast<std::size_t>(w)]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  emb.loss_trace.assign(10, 0.0);
  for (int d = 0; d < 10; ++d) {
    double s = 0.0;
    std::uint64_t n = 0;
    for (const auto& b : buckets) {
      s += b.sum[static_cast<std::size_t>(d)];
      n += b.count[static_cast<std::size_t>(d)];
    }
    emb.loss_trace[static_cast<std::size_t>(d)] =
        n == 0 ? 0.0 : s / static_cast<double>(n);
  }

  for (float x : emb.word_vectors)
    if (!std::isfinite(x))
      throw NumericError("divergence: non-finite word vector after training");
  for (float x : ctx)
    if (!std::isfinite(x))
      throw NumericError("divergence: non-finite context vector after training");
  emb.context_ids = table.users->ids;
  emb.context_vectors = std::move(ctx);
  return emb;
}

// Convenience wrapper: expand + train from one seed.
inline Embedding train_embedding(const PairCountTable& table,
                                 const Vocabulary& vocab,
                                 const TrainConfig& config) {
  config.validate();
  SplitMix64 expand_rng(derive_seed(config.seed, 2));
  const auto pairs = expand_pairs(table, config, expand_rng);
  return train(pairs, table, vocab, config);
}

// ---- Persistence -------------------------------------------------------------

inline constexpr char kEmbeddingMagic[8] = {'C', 'D', 'I', 'M',
                                            'E', 'M', 'B', '\n'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

namespace detail {

inline void write_raw(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
template <typename T>
void write_pod(std::ostream& out, T v) {
  write_raw(out, &v, sizeof(T));
}
inline void write_str(std::ostream& out, const std::string& s) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  write_raw(out, s.data(), s.size());
}

inline void read_raw(std::istream& in, void* p, std::size_t n,
                     const std::string& path) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw InputError("truncated embedding file: " + path);
}
template <typename T>
T read_pod(std::istream& in, const std::string& path) {
  T v;
  read_raw(in, &v, sizeof(T), path);
  return v;
}
inline std::string read_str(std::istream& in, const std::string& path) {
  const auto n = read_pod<std::uint32_t>(in, path);
  if (n > (1u << 20)) throw InputError("corrupt string length in " + path);
  std::string s(n, '\0');
  if (n) read_raw(in, s.data(), n, path);
  return s;
}

}  // namespace detail

inline void save_embedding(const Embedding& emb, const std::string& path,
                           bool include_contexts = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open for write: " + path);
  detail::write_raw(out, kEmbeddingMagic, sizeof(kEmbeddingMagic));
  detail::write_pod<std::uint32_t>(out, kEmbeddingVersion);
  detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(emb.dim));
  detail::write_pod<std::uint64_t>(out, emb.vocab.size());
  for (const auto& e : emb.vocab.entries) {
    detail::write_str(out, e.id);
    detail::write_pod<std::uint64_t>(out, e.count);
  }
  detail::write_raw(out, emb.word_vectors.data(),
                    emb.word_vectors.size() * sizeof(float));
  const bool ctx = include_contexts && !emb.context_vectors.empty();
  detail::write_pod<std::uint8_t>(out, ctx ? 1 : 0);
  if (ctx) {
    detail::write_pod<std::uint64_t>(out, emb.context_ids.size());
    for (const auto& id : emb.context_ids) detail::write_str(out, id);
    detail::write_raw(out, emb.context_vectors.data(),
                      emb.context_vectors.size() * sizeof(float));
  }
  detail::write_pod<std::uint64_t>(out, emb.config_hash);
  detail::write_pod<std::uint32_t>(out,
                                   static_cast<std::uint32_t>(emb.loss_trace.size()));
  detail::write_raw(out, emb.loss_trace.data(),
                    emb.loss_trace.size() * sizeof(double));
  if (!out) throw InputError("write failure: " + path);
}

inline Embedding load_embedding(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open embedding file: " + path);
  char magic[8];
  detail::read_raw(in, magic, sizeof(magic), path);
  if (std::memcmp(magic, kEmbeddingMagic, sizeof(magic)) != 0)
    throw InputError("not an embedding file (bad magic): " + path);
  const auto version = detail::read_pod<std::uint32_t>(in, path);
  if (version != kEmbeddingVersion)
    throw InputError("unsupported embedding format version " +
                     std::to_string(version) + " in " + path);
  Embedding emb;
  emb.dim = static_cast<int>(detail::read_pod<std::uint32_t>(in, path));
  if (emb.dim < 1) throw InputError("corrupt dimension in " + path);
  const auto n = detail::read_pod<std::uint64_t>(in, path);
  emb.vocab.entries.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Vocabulary::Entry e;
    e.id = detail::read_str(in, path);
    e.count = detail::read_pod<std::uint64_t>(in, path);
    emb.vocab.entries.push_back(std::move(e));
  }
  for (std::size_t i = 0; i < emb.vocab.entries.size(); ++i)
    emb.vocab.index.emplace(emb.vocab.entries[i].id,
                            static_cast<std::int32_t>(i));
  emb.word_vectors.resize(n * static_cast<std::size_t>(emb.dim));
  detail::read_raw(in, emb.word_vectors.data(),
                   emb.word_vectors.size() * sizeof(float), path);
  if (detail::read_pod<std::uint8_t>(in, path)) {
    const auto nu = detail::read_pod<std::uint64_t>(in, path);
    emb.context_ids.reserve(nu);
    for (std::uint64_t i = 0; i < nu; ++i)
      emb.context_ids.push_back(detail::read_str(in, path));
    emb.context_vectors.resize(nu * static_cast<std::size_t>(emb.dim));
    detail::read_raw(in, emb.context_vectors.data(),
                     emb.context_vectors.size() * sizeof(float), path);
  }
  emb.config_hash = detail::read_pod<std::uint64_t>(in, path);
  const auto tn = detail::read_pod<std::uint32_t>(in, path);
  if (tn > 1024) throw InputError("corrupt loss trace in " + path);
  emb.loss_trace.resize(tn);
  if (tn)
    detail::read_raw(in, emb.loss_trace.data(), tn * sizeof(double), path);
  return emb;
}

// word2vec text format: "<|V|> <dim>", then one community per line.
inline void save_embedding_text(const Embedding& emb, const std::string& path) {
  auto out = open_output(path);
  out << emb.vocab.size() << ' ' << emb.dim << '\n';
  for (std::size_t v = 0; v < emb.vocab.size(); ++v) {
    out << emb.vocab.entries[v].id;
    const auto row = emb.word(static_cast<std::int32_t>(v));
    for (float x : row) out << ' ' << fmt_g(x, 6);
    out << '\n';
  }
  if (!out) throw InputError("write failure: " + path);
}

inline Embedding load_embedding_text(const std::string& path) {
  auto src = open_lines(path);
  std::string line;
  if (!src->next(line)) throw InputError("empty embedding text file: " + path);
  std::uint64_t n = 0;
  int dim = 0;
  {
    const auto sp = line.find(' ');
    std::int64_t a = 0, b = 0;
    if (sp == std::string::npos || !parse_i64(line.substr(0, sp), a) ||
        !parse_i64(line.substr(sp + 1), b) || a < 0 || b < 1)
      throw InputError("bad embedding text header: " + path);
    n = static_cast<std::uint64_t>(a);
    dim = static_cast<int>(b);
  }
  Embedding emb;
  emb.dim = dim;
  emb.word_vectors.reserve(n * static_cast<std::size_t>(dim));
  while (src->next(line)) {
    if (line.empty()) continue;
    std::size_t pos = line.find(' ');
    if (pos == std::string::npos)
      throw InputError("bad embedding text row: " + line);
    emb.vocab.entries.push_back({line.substr(0, pos), 0});
    const char* p = line.c_str() + pos;
    char* endp = nullptr;
    for (int i = 0; i < dim; ++i) {
      const double x = std::strtod(p, &endp);
      if (endp == p)
        throw InputError("bad embedding text value in row: " + line);
      emb.word_vectors.push_back(static_cast<float>(x));
      p = endp;
    }
  }
  if (emb.vocab.entries.size() != n)
    throw InputError("embedding text row count mismatch in " + path);
  for (std::size_t i = 0; i < emb.vocab.entries.size(); ++i)
    emb.vocab.index.emplace(emb.vocab.entries[i].id,
                            static_cast<std::int32_t>(i));
  return emb;
}

// ---- PMI diagnostic ------------------------------------------------------------

// Dense PMI matrix, |V| x |U| row-major; zero-count cells are -inf.
inline std::vector<double> pmi_matrix(const PairCountTable& table,
                                      std::size_t n_communities) {
  const std::size_t n_users = table.users->size();
  if (n_communities * n_users > 10'000'000)
    throw ConfigError("pmi_matrix refused: |V| * |U| exceeds 1e7 (diagnostic only)");
  if (table.total == 0) throw InputError("pmi_matrix over empty table");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> pmi(n_communities * n_users, kNegInf);
  const double total = static_cast<double>(table.total);
  for (const auto& t : table.triples) {
    const double num = static_cast<double>(t.count) * total;
    const double den =
        static_cast<double>(
            table.community_totals[static_cast<std::size_t>(t.community)]) *
        static_cast<double>(table.user_totals[static_cast<std::size_t>(t.user)]);
    pmi[static_cast<std::size_t>(t.community) * n_users +
        static_cast<std::size_t>(t.user)] = std::log(num / den);
  }
  return pmi;
}

}  // namespace commdim
