#include <catch_amalgamated.hpp>

#include <random>

#include "cmg/dataset.hpp"

using namespace cmg;
using Catch::Approx;

namespace {

std::vector<TradingDay> uniform_days(std::size_t n_days, std::size_t bars) {
  std::vector<TradingDay> d;
  for (std::size_t k = 0; k < n_days; ++k) d.push_back({static_cast<int>(k), {}, k * bars, (k + 1) * bars - 1});
  return d;
}

FeatureMatrix one_column(const Series& v) {
  FeatureMatrix fm;
  fm.names = {"x"};
  for (double x : v) fm.rows.push_back({x});
  return fm;
}

std::vector<EventSample> samples_over_days(const std::vector<int>& day_ids) {
  std::vector<EventSample> s;
  for (std::size_t k = 0; k < day_ids.size(); ++k)
    s.push_back({{static_cast<double>(k), -static_cast<double>(k)}, k % 2 ? 1 : -2, day_ids[k], 100 + k});
  return s;
}

}  // namespace

TEST_CASE("per-day standardization of a single day column") {
  const auto out = standardize_features_per_day(one_column({1, 2, 3}), uniform_days(1, 3));
  CHECK(out.rows[0][0] == Approx(-1.224744871391589));
  CHECK(out.rows[1][0] == Approx(0.0).margin(1e-15));
  CHECK(out.rows[2][0] == Approx(1.224744871391589));
  const auto flat = standardize_features_per_day(one_column({4, 4, 4, 1, 2, 3}), uniform_days(2, 3));
  for (int i = 0; i < 3; ++i) CHECK(flat.rows[static_cast<std::size_t>(i)][0] == 0.0);
  CHECK(flat.rows[5][0] == Approx(1.224744871391589));
}

TEST_CASE("per-day standardization yields zero mean and unit sigma on real features") {
  SynthParams p;
  p.days = 8;
  p.bars_per_day = 48;
  const auto s = synth_generate(p);
  const auto days = segment_days(s);
  const auto fm = compute_features(s);
  const auto z = standardize_features_per_day(fm, days);
  for (const auto& d : days) {
    for (std::size_t c = 0; c < fm.width(); ++c) {
      double sum = 0.0, ss = 0.0;
      std::size_t n = 0;
      bool degenerate = true;
      for (std::size_t i = d.start_index; i <= d.end_index; ++i) {
        if (is_missing(z.rows[i][c])) continue;
        sum += z.rows[i][c];
        ++n;
        if (z.rows[i][c] != 0.0) degenerate = false;
      }
      if (n == 0 || degenerate) continue;
      const double mean = sum / static_cast<double>(n);
      for (std::size_t i = d.start_index; i <= d.end_index; ++i)
        if (!is_missing(z.rows[i][c])) ss += (z.rows[i][c] - mean) * (z.rows[i][c] - mean);
      CHECK(std::abs(mean) < 1e-9);
      CHECK(std::abs(std::sqrt(ss / static_cast<double>(n)) - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("editing a later day leaves earlier standardized rows bitwise unchanged") {
  std::mt19937_64 rng(5);
  Series v(40);
  for (auto& x : v) x = standard_normal(rng);
  const auto days = uniform_days(4, 10);
  const auto base = standardize_features_per_day(one_column(v), days);
  for (int trial = 0; trial < 20; ++trial) {
    Series w = v;
    const std::size_t d = 1 + rng() % 3;
    for (std::size_t i = d * 10; i < 40; ++i) w[i] += standard_normal(rng);
    const auto m = standardize_features_per_day(one_column(w), days);
    for (std::size_t i = 0; i < d * 10; ++i) REQUIRE(m.rows[i][0] == base.rows[i][0]);
  }
}

TEST_CASE("align_events keeps usable events at or after valid_from") {
  FeatureMatrix fm = one_column(Series(60, 1.0));
  fm.valid_from = 34;
  const auto days = uniform_days(3, 20);
  std::vector<TargetEvent> ev(3);
  ev[0].event.bar_index = 10;
  ev[0].usable = true;
  ev[1].event.bar_index = 40;
  ev[1].usable = true;
  ev[1].label = -2;
  ev[2].event.bar_index = 50;
  ev[2].usable = false;
  const auto r = align_events(ev, fm, days);
  REQUIRE(r.samples.size() == 1);
  CHECK(r.dropped_before_valid == 1);
  CHECK(r.samples[0].bar_index == 40);
  CHECK(r.samples[0].day_id == 2);
  CHECK(r.samples[0].label == -2);
  CHECK(r.samples.size() <= 2);
}

TEST_CASE("chronological_split holds out the last ceil(fraction * D) days") {
  std::vector<int> ids;
  for (int d = 0; d < 360; ++d) ids.push_back(d);
  const auto sp = chronological_split(samples_over_days(ids));
  CHECK(sp.test.size() == 108);
  CHECK(sp.first_test_day == 252);

  const auto ten = chronological_split(samples_over_days({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
  CHECK(ten.test.size() == 3);
  int max_train = -1, min_test = 1 << 30;
  for (const auto& s : ten.train) max_train = std::max(max_train, s.day_id);
  for (const auto& s : ten.test) min_test = std::min(min_test, s.day_id);
  CHECK(max_train < min_test);

  CHECK_THROWS_AS(chronological_split(samples_over_days({4, 4, 4})), DataError);
  CHECK_THROWS_AS(chronological_split(samples_over_days({1, 2}), 1.0), ArgumentError);
}

TEST_CASE("make_windows slides with stride 1") {
  const auto s = samples_over_days({0, 0, 1, 1, 2});
  const auto w = make_windows(s, 3);
  REQUIRE(w.size() == 3);
  CHECK(make_windows(s, 1).size() == 5);
  for (std::size_t k = 0; k < w.size(); ++k) {
    CHECK(w[k].length() == 3);
    CHECK(w[k].encoder_input == w[k].decoder_input);
    CHECK(w[k].encoder_input[0] == s[k].features);
    CHECK(w[k].labels[2] == s[k + 2].label);
    CHECK(w[k].last_day_id == s[k + 2].day_id);
    if (k) CHECK(w[k].last_bar_index > w[k - 1].last_bar_index);
  }
  CHECK_THROWS_AS(make_windows(s, 6), DataError);
  CHECK_THROWS_AS(make_windows(s, 0), ArgumentError);
}
