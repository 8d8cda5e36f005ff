#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "cmg/common.hpp"

namespace cmg::stats {

/// P(T > t) for Student's t with `df` degrees of freedom.
inline double student_t_sf(double t, double df) {
  if (!(df >= 1.0)) throw ArgumentError("student_t_sf: df must be >= 1");
  if (std::isnan(t)) throw ArgumentError("student_t_sf: t is NaN");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double tail = 0.5 * boost::math::ibeta(0.5 * df, 0.5, df / (df + t * t));
  return t >= 0.0 ? tail : 1.0 - tail;
}

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
  std::size_t n = 0;
};

inline TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ArgumentError("paired_t_test: length mismatch");
  if (a.size() < 2) throw ArgumentError("paired_t_test: need n >= 2");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw NumericalError("degenerate: identical paired results");
  TTestResult r;
  r.n = n;
  r.df = static_cast<double>(n - 1);
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = std::min(1.0, 2.0 * student_t_sf(std::abs(r.t), r.df));
  return r;
}

struct WilcoxonResult {
  double w = 0.0;  // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p = 1.0;  // two-sided
  std::size_t n_effective = 0;
  bool exact = true;
};

inline constexpr std::size_t kWilcoxonExactMax = 25;

/// Average ranks (1-based) of the values, ties sharing the mean rank.
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

/// P(S <= s) where S sums each doubled rank with probability 1/2 (the null
/// distribution of 2 W+). Doubled average ranks are integers.
inline double signed_rank_cdf(const std::vector<long>& doubled_ranks, long s) {
  const long total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0L);
  if (s < 0) return 0.0;
  if (s >= total) return 1.0;
  std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
  ways[0] = 1.0;
  long reach = 0;
  for (long r : doubled_ranks) {
    for (long k = reach; k >= 0; --k)
      if (ways[static_cast<std::size_t>(k)] != 0.0) ways[static_cast<std::size_t>(k + r)] += ways[static_cast<std::size_t>(k)];
    reach += r;
  }
  double below = 0.0;
  for (long k = 0; k <= s; ++k) below += ways[static_cast<std::size_t>(k)];
  return below / std::ldexp(1.0, static_cast<int>(doubled_ranks.size()));
}

inline WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ArgumentError("wilcoxon: length mismatch");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
  if (d.empty()) throw NumericalError("degenerate: all paired differences are zero");
  std::vector<double> mags(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) mags[i] = std::abs(d[i]);
  const auto ranks = average_ranks(mags);

  WilcoxonResult r;
  r.n_effective = d.size();
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? r.w_plus : r.w_minus) += ranks[i];
  r.w = std::min(r.w_plus, r.w_minus);
  const double n = static_cast<double>(d.size());

  if (d.size() <= kWilcoxonExactMax) {
    std::vector<long> doubled(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) doubled[i] = std::lround(2.0 * ranks[i]);
    r.exact = true;
    r.p = std::min(1.0, 2.0 * signed_rank_cdf(doubled, std::lround(2.0 * r.w)));
  } else {
    std::vector<double> sorted = mags;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const double t = static_cast<double>(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if (!(var > 0.0)) throw NumericalError("degenerate: zero variance in Wilcoxon approximation");
    const double z = std::max(0.0, std::abs(r.w - mean) - 0.5) / std::sqrt(var);
    r.exact = false;
    r.p = std::min(1.0, std::erfc(z / std::numbers::sqrt2));
  }
  return r;
}

}  // namespace cmg::stats
