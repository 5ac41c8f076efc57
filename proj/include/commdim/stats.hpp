#pragma once

// Small statistics kit: moments, ranks, correlations, and the incomplete beta
// function needed for t-distribution p-values. Everything is deterministic and
// allocation-light; inputs are taken as spans of doubles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "commdim/common.hpp"

namespace commdim {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw NumericError("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

// Population standard deviation (divide by n).
inline double stdev_population(std::span<const double> xs) {
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

// Sample variance (divide by n-1).
inline double variance_sample(std::span<const double> xs) {
  if (xs.size() < 2) throw NumericError("sample variance needs n >= 2");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

// Z-scores against the population mean/SD of xs itself.
inline std::vector<double> zscores(std::span<const double> xs) {
  const double m = mean(xs);
  const double sd = stdev_population(xs);
  if (!(sd > 0.0))
    throw NumericError("z-scores undefined: zero variance population");
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (xs[i] - m) / sd;
  return out;
}

// Average ranks, 1-based; ties share the mean of their covered ranks.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw NumericError("pearson: length mismatch");
  if (xs.size() < 2) throw NumericError("pearson needs n >= 2");
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw NumericError("pearson undefined: zero-variance input");
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(std::span<const double> xs, std::span<const double> ys) {
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz's method).
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction failed to converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incbeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw NumericError("incbeta requires a > 0 and b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value for a t statistic with df degrees of freedom:
// p = I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_p_two_sided(double t, double df) {
  if (!(df > 0.0)) throw NumericError("t-test requires df > 0");
  if (!std::isfinite(t)) return 0.0;
  return incbeta(df / 2.0, 0.5, df / (df + t * t));
}

struct Correlation {
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

// Pearson r with the usual two-sided t-test on n-2 degrees of freedom.
inline Correlation pearson_test(std::span<const double> xs,
                                std::span<const double> ys) {
  Correlation out;
  out.n = xs.size();
  out.r = pearson(xs, ys);
  if (out.n < 3) {
    out.p = 1.0;
    return out;
  }
  const double df = static_cast<double>(out.n - 2);
  const double r2 = std::min(out.r * out.r, 1.0);
  if (r2 >= 1.0) {
    out.p = 0.0;
    return out;
  }
  const double t = out.r * std::sqrt(df / (1.0 - r2));
  out.p = student_t_p_two_sided(t, df);
  return out;
}

inline Correlation spearman_test(std::span<const double> xs,
                                 std::span<const double> ys) {
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson_test(rx, ry);
}

// Cohen's d with the pooled standard deviation, (n_a - 1) and (n_b - 1)
// weights. Sign convention: positive when group a sits above group b.
inline double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw NumericError("cohens_d needs n >= 2 in both groups");
  const double va = variance_sample(a);
  const double vb = variance_sample(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pooled =
      std::sqrt(((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0));
  if (!(pooled > 0.0))
    throw NumericError("cohens_d undefined: zero pooled variance");
  return (mean(a) - mean(b)) / pooled;
}

// Point-biserial correlation: Pearson r between a binary group label and a
// continuous value (group 1 coded 1, group 0 coded 0).
inline double point_biserial(std::span<const double> group1,
                             std::span<const double> group0) {
  std::vector<double> values;
  std::vector<double> labels;
  values.reserve(group1.size() + group0.size());
  labels.reserve(values.capacity());
  for (double v : group1) {
    values.push_back(v);
    labels.push_back(1.0);
  }
  for (double v : group0) {
    values.push_back(v);
    labels.push_back(0.0);
  }
  return pearson(labels, values);
}

}  // namespace commdim
