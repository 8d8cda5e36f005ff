#include <catch_amalgamated.hpp>

#include <cstring>

#include "cmg/indicators.hpp"

using namespace cmg;
using namespace cmg::indicators;
using Catch::Approx;

namespace {

OhlcSeries from_closes(const Series& close, double spread = 0.5) {
  OhlcSeries s;
  s.symbol = "T";
  for (std::size_t i = 0; i < close.size(); ++i) {
    const double open = i ? close[i - 1] : close[i];
    s.candles.push_back({static_cast<std::int64_t>(60 * i), open, std::max(open, close[i]) + spread,
                         std::min(open, close[i]) - spread, close[i]});
  }
  return s;
}

OhlcSeries constant_candles(std::size_t n, double c, double d) {
  OhlcSeries s;
  s.symbol = "C";
  for (std::size_t i = 0; i < n; ++i)
    s.candles.push_back({static_cast<std::int64_t>(60 * i), c, c + d / 2, c - d / 2, c});
  return s;
}

Series ramp(std::size_t n, double slope = 1.0, double start = 100.0) {
  Series x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = start + slope * static_cast<double>(i);
  return x;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("sma matches the window mean and leaves warm-up missing") {
  const auto a = sma({1, 2, 3}, 3);
  CHECK(is_missing(a[0]));
  CHECK(is_missing(a[1]));
  CHECK(a[2] == 2.0);
  const auto b = sma({1, 2, 3, 4}, 2);
  CHECK(is_missing(b[0]));
  CHECK(b[1] == 1.5);
  CHECK(b[2] == 2.5);
  CHECK(b[3] == 3.5);
  for (double v : sma(Series(30, 7.25), 9))
    if (!is_missing(v)) CHECK(v == Approx(7.25));
  CHECK_THROWS_AS(sma({1, 2}, 3), DataError);
  CHECK_THROWS_AS(sma({1, 2}, 0), ArgumentError);
}

TEST_CASE("ema follows the first-value-seeded recurrence") {
  const auto a = ema({1, 2, 3}, 3);
  CHECK(a[0] == 1.0);
  CHECK(a[1] == 1.5);
  CHECK(a[2] == 2.25);
  const auto b = ema({0, 1}, 1);
  CHECK(b[0] == 0.0);
  CHECK(b[1] == 1.0);
  for (double v : ema(Series(40, 3.5), 12)) CHECK(v == 3.5);
  CHECK_THROWS_AS(ema({}, 3), DataError);
}

TEST_CASE("macd on constant and ramp inputs") {
  const auto c = macd(Series(80, 50.0));
  for (std::size_t i = 0; i < 80; ++i) {
    CHECK(c.macd_line[i] == 0.0);
    CHECK(c.signal_line[i] == 0.0);
    CHECK(c.histogram[i] == 0.0);
  }
  const auto r = macd(ramp(200));
  for (std::size_t i = 40; i < 200; ++i) CHECK(r.macd_line[i] > 0.0);
  // steady state of EMA lag difference on a unit ramp: (slow - fast) / 2
  CHECK(r.macd_line[199] == Approx(7.0).epsilon(1e-3));
  for (std::size_t i = 0; i < 200; ++i) CHECK(same_bits(r.histogram[i], r.macd_line[i] - r.signal_line[i]));
  CHECK_THROWS_AS(macd(ramp(50), 12, 12), ArgumentError);
}

TEST_CASE("rsi fixed points") {
  const auto up = rsi(ramp(40), 14);
  const auto down = rsi(ramp(40, -1.0), 14);
  Series alt(41);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = 100.0 + (i % 2 ? 1.0 : 0.0);
  const auto mid = rsi(alt, 14);
  for (std::size_t i = 14; i < 40; ++i) {
    CHECK(up[i] == 100.0);
    CHECK(down[i] == 0.0);
  }
  // first average covers 7 rises and 7 falls
  CHECK(mid[14] == Approx(50.0));
  CHECK(rsi(Series(30, 5.0), 14)[20] == 50.0);
  CHECK_THROWS_AS(rsi(ramp(14), 14), DataError);
}

TEST_CASE("atr on constant ranges and gaps") {
  const auto a = atr(constant_candles(30, 100.0, 2.0), 14);
  for (std::size_t i = 14; i < 30; ++i) CHECK(a[i] == Approx(2.0));
  CHECK_THROWS_AS(atr(constant_candles(1, 100.0, 2.0), 1), DataError);
  const Candle prev{0, 100, 101, 99, 100};
  const Candle gap{60, 105, 106, 104, 105};
  CHECK(true_range(gap, prev.close) == 6.0);
  const Candle inside{60, 100, 100.5, 99.5, 100};
  CHECK(true_range(inside, 100.0) == 1.0);
}

TEST_CASE("bollinger bands use the population deviation") {
  const auto b = bollinger({1, 3}, 2, 2.0);
  CHECK(b.middle[1] == 2.0);
  CHECK(b.upper[1] == 4.0);
  CHECK(b.lower[1] == 0.0);
  const auto c = bollinger(Series(25, 9.0), 20, 2.0);
  CHECK(c.upper[24] == 9.0);
  CHECK(c.lower[24] == 9.0);
  const auto z = bollinger(ramp(30), 20, 0.0);
  CHECK(z.upper[29] == z.middle[29]);
  CHECK(z.lower[29] == z.middle[29]);
  CHECK_THROWS_AS(bollinger({1, 2, 3}, 1), ArgumentError);
}

TEST_CASE("stochastic extremes and the flat-window rule") {
  OhlcSeries s = constant_candles(20, 100.0, 0.0);
  CHECK(stochastic_raw(s, 14)[19] == 50.0);
  s.candles[19] = {s.candles[19].timestamp, 100, 105, 100, 105};
  CHECK(stochastic_raw(s, 14)[19] == 100.0);
  s.candles[19] = {s.candles[19].timestamp, 100, 100, 95, 95};
  CHECK(stochastic_raw(s, 14)[19] == 0.0);
  CHECK_THROWS_AS(stochastic(constant_candles(5, 1.0, 0.1), 14), DataError);
}

TEST_CASE("momentum") {
  for (double v : momentum(Series(20, 3.0), 10))
    if (!is_missing(v)) CHECK(v == 0.0);
  CHECK(momentum(ramp(30), 10)[25] == 10.0);
  const auto m = momentum({1, 2, 4}, 1);
  CHECK(is_missing(m[0]));
  CHECK(m[1] == 1.0);
  CHECK(m[2] == 2.0);
}

TEST_CASE("psar on rising highs and the two-bar seed") {
  Series close = ramp(60, 0.5);
  const auto r = psar(from_closes(close, 0.2));
  for (std::size_t i = 1; i < 60; ++i) {
    CHECK(r.direction[i] == 1.0);
    if (i > 1) CHECK(r.sar[i] >= r.sar[i - 1]);
  }
  const OhlcSeries two = from_closes({100.0, 101.0}, 0.5);
  const auto t = psar(two);
  CHECK(is_missing(t.sar[0]));
  CHECK(t.sar[1] == two[0].low);
  CHECK(t.direction[1] == 1.0);
  CHECK_THROWS_AS(psar(two, 0.2, 0.1), ArgumentError);
  CHECK_THROWS_AS(psar(from_closes({100.0})), DataError);
}

TEST_CASE("compute_features shape, fixed points and ranges") {
  SynthParams p;
  p.days = 10;
  p.bars_per_day = 48;
  const auto s = synth_generate(p);
  const auto fm = compute_features(s);
  CHECK(fm.width() == 19);
  CHECK(fm.names.front() == "open");
  CHECK(fm.names.back() == "psar_dir");
  CHECK(fm.valid_from >= 34);
  for (std::size_t i = fm.valid_from; i < fm.size(); ++i) {
    const auto& row = fm.rows[i];
    for (double v : row) REQUIRE_FALSE(is_missing(v));
    CHECK(row[fm.column_index("rsi14")] >= 0.0);
    CHECK(row[fm.column_index("rsi14")] <= 100.0);
    CHECK(row[fm.column_index("stoch_k")] >= 0.0);
    CHECK(row[fm.column_index("stoch_k")] <= 100.0);
    CHECK(row[fm.column_index("boll_up")] >= row[fm.column_index("boll_mid")]);
    CHECK(row[fm.column_index("boll_mid")] >= row[fm.column_index("boll_lo")]);
    CHECK(same_bits(row[fm.column_index("macd_hist")],
                    row[fm.column_index("macd")] - row[fm.column_index("macd_signal")]));
  }

  const auto flat = compute_features(constant_candles(60, 10.0, 0.0));
  const auto& last = flat.rows.back();
  CHECK(last[flat.column_index("macd")] == 0.0);
  CHECK(last[flat.column_index("rsi14")] == 50.0);
  CHECK(last[flat.column_index("stoch_k")] == 50.0);
  CHECK(last[flat.column_index("mom10")] == 0.0);

  CHECK_THROWS_AS(compute_features(constant_candles(30, 10.0, 1.0)), DataError);
}

TEST_CASE("features are causal: appending bars leaves earlier rows bitwise unchanged") {
  SynthParams p;
  p.days = 6;
  p.bars_per_day = 40;
  const auto full = synth_generate(p);
  const auto all = compute_features(full);
  for (std::size_t cut : {60u, 113u, 200u}) {
    OhlcSeries prefix = full;
    prefix.candles.resize(cut);
    const auto part = compute_features(prefix);
    CHECK(part.valid_from == all.valid_from);
    for (std::size_t i = 0; i < cut; ++i)
      for (std::size_t c = 0; c < part.width(); ++c) {
        const double a = part.rows[i][c], b = all.rows[i][c];
        REQUIRE(((is_missing(a) && is_missing(b)) || same_bits(a, b)));
      }
  }
}
