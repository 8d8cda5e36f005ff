#pragma once

// Causal technical indicators and the per-bar feature matrix.
//
// Every function returns a series aligned with its input; entries that are
// not yet defined (warm-up) are `missing`.

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "cmg/common.hpp"
#include "cmg/ohlc.hpp"

namespace cmg::indicators {

inline Series sma(const Series& x, std::size_t w) {
  if (w < 1) throw ArgumentError("sma: window must be >= 1");
  if (w > x.size()) throw DataError("sma: window longer than series");
  Series out(x.size(), missing);
  // Direct window sums: no running-sum drift, and values at i never depend on later bars.
  for (std::size_t i = w - 1; i < x.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = i + 1 - w; j <= i; ++j) s += x[j];
    out[i] = s / static_cast<double>(w);
  }
  return out;
}

/// EMA seeded with the first value: e[0] = x[0], alpha = 2/(p+1).
/// Missing inputs are skipped; the recursion starts at the first defined value.
inline Series ema(const Series& x, std::size_t p) {
  if (p < 1) throw ArgumentError("ema: period must be >= 1");
  if (x.empty()) throw DataError("ema: empty input");
  const double alpha = 2.0 / (static_cast<double>(p) + 1.0);
  Series out(x.size(), missing);
  bool seeded = false;
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (is_missing(x[i])) continue;
    e = seeded ? alpha * x[i] + (1.0 - alpha) * e : x[i];
    seeded = true;
    out[i] = e;
  }
  return out;
}

struct MacdResult {
  Series macd_line;
  Series signal_line;
  Series histogram;
};

inline MacdResult macd(const Series& close, std::size_t fast = 12, std::size_t slow = 26, std::size_t signal = 9) {
  if (fast >= slow) throw ArgumentError("macd: fast period must be < slow period");
  const Series ef = ema(close, fast);
  const Series es = ema(close, slow);
  MacdResult r;
  r.macd_line.resize(close.size());
  for (std::size_t i = 0; i < close.size(); ++i) r.macd_line[i] = ef[i] - es[i];
  r.signal_line = ema(r.macd_line, signal);
  r.histogram.resize(close.size());
  for (std::size_t i = 0; i < close.size(); ++i) r.histogram[i] = r.macd_line[i] - r.signal_line[i];
  return r;
}

/// Wilder RSI. Defined from index p. Flat window -> 50.
inline Series rsi(const Series& close, std::size_t p = 14) {
  if (p < 1) throw ArgumentError("rsi: period must be >= 1");
  if (close.size() < p + 1) throw DataError("rsi: series too short");
  Series out(close.size(), missing);
  double avg_gain = 0.0, avg_loss = 0.0;
  auto value = [](double g, double l) {
    if (l == 0.0) return g == 0.0 ? 50.0 : 100.0;
    if (g == 0.0) return 0.0;
    return 100.0 - 100.0 / (1.0 + g / l);
  };
  for (std::size_t i = 1; i <= p; ++i) {
    const double d = close[i] - close[i - 1];
    avg_gain += std::max(d, 0.0);
    avg_loss += std::max(-d, 0.0);
  }
  avg_gain /= static_cast<double>(p);
  avg_loss /= static_cast<double>(p);
  out[p] = value(avg_gain, avg_loss);
  const double pd = static_cast<double>(p);
  for (std::size_t i = p + 1; i < close.size(); ++i) {
    const double d = close[i] - close[i - 1];
    avg_gain = (avg_gain * (pd - 1.0) + std::max(d, 0.0)) / pd;
    avg_loss = (avg_loss * (pd - 1.0) + std::max(-d, 0.0)) / pd;
    out[i] = value(avg_gain, avg_loss);
  }
  return out;
}

inline double true_range(const Candle& c, double prev_close) {
  return std::max({c.high - c.low, std::abs(c.high - prev_close), std::abs(c.low - prev_close)});
}

/// Wilder ATR. Defined from index p (mean of the first p true ranges).
inline Series atr(const OhlcSeries& s, std::size_t p = 14) {
  if (p < 1) throw ArgumentError("atr: period must be >= 1");
  if (s.size() < p + 1) throw DataError("atr: series too short (needs a prior close)");
  Series out(s.size(), missing);
  double a = 0.0;
  for (std::size_t i = 1; i <= p; ++i) a += true_range(s[i], s[i - 1].close);
  a /= static_cast<double>(p);
  out[p] = a;
  const double pd = static_cast<double>(p);
  for (std::size_t i = p + 1; i < s.size(); ++i) {
    a = (a * (pd - 1.0) + true_range(s[i], s[i - 1].close)) / pd;
    out[i] = a;
  }
  return out;
}

struct BollingerResult {
  Series middle;
  Series upper;
  Series lower;
};

inline BollingerResult bollinger(const Series& close, std::size_t w = 20, double k = 2.0) {
  if (w < 2) throw ArgumentError("bollinger: window must be >= 2");
  if (close.size() < w) throw DataError("bollinger: series too short");
  BollingerResult r{sma(close, w), Series(close.size(), missing), Series(close.size(), missing)};
  for (std::size_t i = w - 1; i < close.size(); ++i) {
    const double m = r.middle[i];
    double ss = 0.0;
    for (std::size_t j = i + 1 - w; j <= i; ++j) ss += (close[j] - m) * (close[j] - m);
    const double sd = std::sqrt(ss / static_cast<double>(w));
    r.upper[i] = m + k * sd;
    r.lower[i] = m - k * sd;
  }
  return r;
}

struct StochasticResult {
  Series k;
  Series d;
};

namespace detail {

/// SMA over the defined tail of a series that starts with missing entries.
inline Series sma_defined(const Series& x, std::size_t w) {
  Series out(x.size(), missing);
  std::size_t run = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (is_missing(x[i])) {
      run = 0;
      continue;
    }
    ++run;
    if (run >= w) {
      double s = 0.0;
      for (std::size_t j = i + 1 - w; j <= i; ++j) s += x[j];
      out[i] = s / static_cast<double>(w);
    }
  }
  return out;
}

}  // namespace detail

/// Slow stochastic. Raw %K over k_period, smoothed by k_smooth; %D = SMA(%K, d_smooth).
inline StochasticResult stochastic(const OhlcSeries& s, std::size_t k_period = 14, std::size_t k_smooth = 3,
                                   std::size_t d_smooth = 3) {
  if (k_period < 1 || k_smooth < 1 || d_smooth < 1) throw ArgumentError("stochastic: periods must be >= 1");
  if (s.size() < k_period) throw DataError("stochastic: series too short");
  Series raw(s.size(), missing);
  for (std::size_t i = k_period - 1; i < s.size(); ++i) {
    double hi = s[i].high, lo = s[i].low;
    for (std::size_t j = i + 1 - k_period; j <= i; ++j) {
      hi = std::max(hi, s[j].high);
      lo = std::min(lo, s[j].low);
    }
    raw[i] = hi == lo ? 50.0 : 100.0 * (s[i].close - lo) / (hi - lo);
  }
  StochasticResult r;
  r.k = detail::sma_defined(raw, k_smooth);
  r.d = detail::sma_defined(r.k, d_smooth);
  return r;
}

/// Raw (unsmoothed) %K, exposed for tests of the window rule.
inline Series stochastic_raw(const OhlcSeries& s, std::size_t k_period = 14) {
  return stochastic(s, k_period, 1, 1).k;
}

inline Series momentum(const Series& close, std::size_t p = 10) {
  if (p < 1) throw ArgumentError("momentum: period must be >= 1");
  if (close.size() <= p) throw DataError("momentum: series too short");
  Series out(close.size(), missing);
  for (std::size_t i = p; i < close.size(); ++i) out[i] = close[i] - close[i - p];
  return out;
}

struct PsarResult {
  Series sar;
  Series direction;  // +1 long, -1 short
};

/// Wilder parabolic SAR. Initial direction from sign(close[1] - close[0]);
/// the SAR at bar 1 is bar 0's opposite extreme.
inline PsarResult psar(const OhlcSeries& s, double af0 = 0.02, double af_max = 0.2) {
  if (!(af0 > 0.0)) throw ArgumentError("psar: af0 must be > 0");
  if (af_max < af0) throw ArgumentError("psar: af_max must be >= af0");
  if (s.size() < 2) throw DataError("psar: series too short");
  PsarResult r{Series(s.size(), missing), Series(s.size(), missing)};

  bool up = s[1].close >= s[0].close;
  double sar = up ? s[0].low : s[0].high;
  double ep = up ? s[0].high : s[0].low;
  double af = af0;

  auto advance = [&](std::size_t i) {
    if (up) {
      if (s[i].low < sar) {
        up = false;
        sar = std::max({ep, s[i].high, s[i - 1].high});
        ep = s[i].low;
        af = af0;
      } else if (s[i].high > ep) {
        ep = s[i].high;
        af = std::min(af + af0, af_max);
      }
    } else {
      if (s[i].high > sar) {
        up = true;
        sar = std::min({ep, s[i].low, s[i - 1].low});
        ep = s[i].high;
        af = af0;
      } else if (s[i].low < ep) {
        ep = s[i].low;
        af = std::min(af + af0, af_max);
      }
    }
    r.sar[i] = sar;
    r.direction[i] = up ? 1.0 : -1.0;
  };

  advance(1);
  for (std::size_t i = 2; i < s.size(); ++i) {
    double next = sar + af * (ep - sar);
    if (up)
      next = std::min({next, s[i - 1].low, s[i - 2].low});
    else
      next = std::max({next, s[i - 1].high, s[i - 2].high});
    sar = next;
    advance(i);
  }
  return r;
}

}  // namespace cmg::indicators

namespace cmg {

/// Per-bar feature rows aligned with candle indices.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;  // N x F
  std::size_t valid_from = 0;

  std::size_t size() const { return rows.size(); }
  std::size_t width() const { return names.size(); }

  std::size_t column_index(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ArgumentError("unknown feature column '" + name + "'");
    return static_cast<std::size_t>(it - names.begin());
  }

  Series column(const std::string& name) const {
    const std::size_t c = column_index(name);
    Series out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[i][c];
    return out;
  }
};

inline const std::array<const char*, 19>& feature_names() {
  static const std::array<const char*, 19> names = {
      "open",   "high",     "low",      "close",    "sma10",   "ema10",  "macd",
      "macd_signal", "macd_hist", "rsi14", "atr14", "boll_mid", "boll_up", "boll_lo",
      "stoch_k", "stoch_d", "mom10",   "psar",     "psar_dir"};
  return names;
}

/// Seeded EMAs are treated as warm once `p` updates have followed the seed.
inline constexpr std::size_t kEmaWarmup10 = 10;
inline constexpr std::size_t kMacdSlow = 26;
inline constexpr std::size_t kMacdSignal = 9;
inline constexpr std::size_t kFeatureWarmup = kMacdSlow + kMacdSignal;  // 35

/// The 19-column feature set. Rows before `valid_from` contain missing entries.
inline FeatureMatrix compute_features(const OhlcSeries& s) {
  if (s.size() <= kFeatureWarmup) throw DataError("compute_features: series shorter than indicator warm-up");
  namespace ind = indicators;
  const Series close = s.closes();
  const std::size_t n = s.size();

  Series ema10 = ind::ema(close, 10);
  std::fill(ema10.begin(), ema10.begin() + kEmaWarmup10, missing);
  auto m = ind::macd(close, 12, kMacdSlow, kMacdSignal);
  std::fill(m.macd_line.begin(), m.macd_line.begin() + kMacdSlow, missing);
  std::fill(m.signal_line.begin(), m.signal_line.begin() + kFeatureWarmup, missing);
  std::fill(m.histogram.begin(), m.histogram.begin() + kFeatureWarmup, missing);

  const Series sma10 = ind::sma(close, 10);
  const Series rsi14 = ind::rsi(close, 14);
  const Series atr14 = ind::atr(s, 14);
  const auto bb = ind::bollinger(close, 20, 2.0);
  const auto st = ind::stochastic(s, 14, 3, 3);
  const Series mom10 = ind::momentum(close, 10);
  const auto ps = ind::psar(s);

  FeatureMatrix fm;
  for (const char* name : feature_names()) fm.names.emplace_back(name);
  fm.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Candle& c = s[i];
    fm.rows[i] = {c.open,        c.high,           c.low,           c.close,   sma10[i], ema10[i],  m.macd_line[i],
                  m.signal_line[i], m.histogram[i], rsi14[i],      atr14[i],  bb.middle[i], bb.upper[i],
                  bb.lower[i],   st.k[i],          st.d[i],         mom10[i],  ps.sar[i], ps.direction[i]};
  }
  fm.valid_from = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool any_missing = std::any_of(fm.rows[i].begin(), fm.rows[i].end(), [](double v) { return is_missing(v); });
    if (any_missing) fm.valid_from = i + 1;
  }
  if (fm.valid_from >= n) throw DataError("compute_features: no fully defined rows");
  return fm;
}

inline void write_features_csv(std::ostream& out, const FeatureMatrix& fm) {
  out << "# valid_from=" << fm.valid_from << '\n';
  for (std::size_t c = 0; c < fm.names.size(); ++c) out << (c ? "," : "") << fm.names[c];
  out << '\n';
  for (const auto& row : fm.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
}

}  // namespace cmg
