#pragma once

// OHLC candles: CSV ingestion, trading-day segmentation and a seeded
// chaotic price generator.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cmg/common.hpp"

namespace cmg {

struct Candle {
  std::int64_t timestamp = 0;  // seconds since Unix epoch, UTC
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;

  bool valid() const {
    return open > 0.0 && high > 0.0 && low > 0.0 && close > 0.0 &&
           low <= std::min(open, close) && std::max(open, close) <= high;
  }

  friend bool operator==(const Candle&, const Candle&) = default;
};

struct OhlcSeries {
  std::string symbol;
  std::int64_t bar_interval = 60;
  std::vector<Candle> candles;

  std::size_t size() const { return candles.size(); }
  bool empty() const { return candles.empty(); }
  const Candle& operator[](std::size_t i) const { return candles[i]; }

  Series closes() const {
    Series out(candles.size());
    std::transform(candles.begin(), candles.end(), out.begin(),
                   [](const Candle& c) { return c.close; });
    return out;
  }
};

/// Inclusive index range [first, last].
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t size() const { return last - first + 1; }
  bool contains(std::size_t i) const { return i >= first && i <= last; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct TradingDay {
  int day_id = 0;
  std::chrono::sys_days date{};
  std::size_t start_index = 0;
  std::size_t end_index = 0;

  std::size_t size() const { return end_index - start_index + 1; }
  IndexRange range() const { return {start_index, end_index}; }
};

// --- timestamps -------------------------------------------------------------

namespace detail {

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Parses `YYYY-MM-DDTHH:MM:SSZ` or an all-digit epoch-seconds field.
inline bool parse_timestamp(const std::string& field, std::int64_t& out) {
  if (detail::all_digits(field)) {
    out = std::stoll(field);
    return true;
  }
  int y, mo, d, h, mi, s;
  char tail = 0;
  if (field.size() != 20 || field[19] != 'Z') return false;
  if (std::sscanf(field.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail) != 7 ||
      tail != 'Z')
    return false;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59 || h < 0 || mi < 0 || s < 0) return false;
  out = static_cast<std::int64_t>(sys_days{ymd}.time_since_epoch().count()) * 86400 + h * 3600 + mi * 60 + s;
  return true;
}

inline std::string format_timestamp(std::int64_t ts) {
  using namespace std::chrono;
  const std::int64_t days = detail::floor_div(ts, 86400);
  const std::int64_t secs = ts - days * 86400;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(secs / 3600), static_cast<int>((secs / 60) % 60), static_cast<int>(secs % 60));
  return buf;
}

inline std::string format_date(std::chrono::sys_days d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

// --- CSV --------------------------------------------------------------------

inline constexpr const char* kOhlcHeader = "timestamp,open,high,low,close";

inline OhlcSeries parse_csv(std::istream& in, std::string symbol = "SERIES") {
  OhlcSeries series;
  series.symbol = std::move(symbol);
  if (series.symbol.empty()) throw DataError("empty symbol");

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (!header_seen) {
      if (t != kOhlcHeader)
        throw DataError("line " + std::to_string(line_no) + ": expected header '" + kOhlcHeader + "'");
      header_seen = true;
      continue;
    }
    const auto fields = detail::split(t);
    Candle c;
    if (fields.size() != 5 || !parse_timestamp(fields[0], c.timestamp) || !detail::parse_double(fields[1], c.open) ||
        !detail::parse_double(fields[2], c.high) || !detail::parse_double(fields[3], c.low) ||
        !detail::parse_double(fields[4], c.close))
      throw DataError("malformed row at line " + std::to_string(line_no));
    if (!c.valid()) throw DataError("OHLC violation at line " + std::to_string(line_no));
    if (!series.candles.empty() && c.timestamp <= series.candles.back().timestamp)
      throw DataError("non-increasing timestamps at line " + std::to_string(line_no));
    series.candles.push_back(c);
  }
  if (!header_seen) throw DataError("empty file");
  if (series.candles.empty()) throw DataError("empty file: no data rows");
  return series;
}

inline OhlcSeries parse_csv_string(const std::string& text, std::string symbol = "SERIES") {
  std::istringstream in(text);
  return parse_csv(in, std::move(symbol));
}

inline void write_csv(std::ostream& out, const OhlcSeries& series) {
  out << kOhlcHeader << '\n';
  for (const Candle& c : series.candles)
    out << format_timestamp(c.timestamp) << ',' << format_number(c.open) << ',' << format_number(c.high) << ','
        << format_number(c.low) << ',' << format_number(c.close) << '\n';
}

// --- segmentation -----------------------------------------------------------

/// One TradingDay per calendar date, shifted by `utc_offset_seconds`.
inline std::vector<TradingDay> segment_days(const OhlcSeries& series, std::int64_t utc_offset_seconds = 0) {
  std::vector<TradingDay> days;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::int64_t day_num = detail::floor_div(series[i].timestamp + utc_offset_seconds, 86400);
    const std::chrono::sys_days date{std::chrono::days{day_num}};
    if (days.empty() || days.back().date != date) {
      days.push_back({static_cast<int>(days.size()), date, i, i});
    } else {
      days.back().end_index = i;
    }
  }
  return days;
}

/// First ceil(n/4) bars of the day.
inline IndexRange first_quarter(const TradingDay& day) {
  const std::size_t n = day.size();
  return {day.start_index, day.start_index + (n + 3) / 4 - 1};
}

/// Day index containing bar `i` (binary search over contiguous ranges).
inline std::size_t day_of_bar(const std::vector<TradingDay>& days, std::size_t i) {
  auto it = std::upper_bound(days.begin(), days.end(), i,
                             [](std::size_t v, const TradingDay& d) { return v < d.start_index; });
  if (it == days.begin()) throw DataError("bar index precedes the first trading day");
  --it;
  if (!it->range().contains(i)) throw DataError("bar index outside trading days");
  return static_cast<std::size_t>(it - days.begin());
}

// --- synthetic generator ----------------------------------------------------

struct SynthParams {
  std::uint64_t seed = 42;
  int days = 360;
  int bars_per_day = 96;
  double r = 4.0;
  double vol = 1e-3;
  std::string symbol = "SYN";
  double start_price = 1000.0;
};

/// Chaotic OHLC series: log-price increments follow the centered logistic map,
/// four substeps per bar. Deterministic for a given seed.
inline OhlcSeries synth_generate(const SynthParams& p) {
  if (p.days < 1) throw ArgumentError("synth: days must be >= 1");
  if (p.bars_per_day < 4) throw ArgumentError("synth: bars_per_day must be >= 4");
  if (!(p.r > 3.57 && p.r <= 4.0)) throw ArgumentError("synth: r must lie in (3.57, 4]");
  if (!(p.vol > 0.0) || !std::isfinite(p.vol)) throw ArgumentError("synth: vol must be > 0");
  if (p.symbol.empty()) throw ArgumentError("synth: empty symbol");

  std::mt19937_64 rng(p.seed);
  double x = uniform(rng, 0.05, 0.95);
  auto step = [&]() {
    x = p.r * x * (1.0 - x);
    // Finite precision can land on the 0.5 -> 1 -> 0 absorbing path.
    if (!(x > 1e-12 && x < 1.0 - 1e-12)) x = uniform(rng, 0.05, 0.95);
    return x;
  };

  for (int i = 0; i < 1000; ++i) step();
  double center = 0.5;
  if (p.r < 4.0) {
    double s = 0.0;
    constexpr int kMeanSteps = 1 << 16;
    for (int i = 0; i < kMeanSteps; ++i) s += step();
    center = s / kMeanSteps;
  }

  OhlcSeries out;
  out.symbol = p.symbol;
  out.bar_interval = 60;
  out.candles.reserve(static_cast<std::size_t>(p.days) * p.bars_per_day);

  using namespace std::chrono;
  const std::int64_t day0 = sys_days{year{2024} / January / 2}.time_since_epoch().count();
  constexpr std::int64_t kSessionOpen = 9 * 3600 + 15 * 60;
  double log_price = std::log(p.start_price);
  for (int d = 0; d < p.days; ++d) {
    for (int b = 0; b < p.bars_per_day; ++b) {
      Candle c;
      c.timestamp = (day0 + d) * 86400 + kSessionOpen + static_cast<std::int64_t>(b) * out.bar_interval;
      c.open = std::exp(log_price);
      c.high = c.open;
      c.low = c.open;
      for (int s = 0; s < 4; ++s) {
        log_price += p.vol * (step() - center);
        const double px = std::exp(log_price);
        c.high = std::max(c.high, px);
        c.low = std::min(c.low, px);
      }
      c.close = std::exp(log_price);
      c.high = std::max(c.high, c.close);
      c.low = std::min(c.low, c.close);
      out.candles.push_back(c);
    }
  }
  return out;
}

}  // namespace cmg
