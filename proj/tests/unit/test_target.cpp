#include <catch_amalgamated.hpp>

#include <array>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "cmg/target.hpp"

using namespace cmg;
using Catch::Approx;

TEST_CASE("crossovers follow sign changes with the zero-inherit rule") {
  std::vector<int> dirs;
  const auto idx = crossover_indices({-1, -0.5, 0.2, 0.4, -0.1}, 0, &dirs);
  REQUIRE(idx == std::vector<std::size_t>{2, 4});
  CHECK(dirs == std::vector<int>{1, -1});

  CHECK(crossover_indices({1, 0.5, 0.0, 0.7}, 0, nullptr).empty());
  CHECK(crossover_indices({-1, 0.0, 0.0, 2.0}, 0, nullptr) == std::vector<std::size_t>{3});
  CHECK(crossover_indices({0.0, 0.0, 1.0, -1.0}, 0, nullptr) == std::vector<std::size_t>{3});
  // valid_from hides earlier changes
  CHECK(crossover_indices({-1, 1, -1, 1}, 2, nullptr) == std::vector<std::size_t>{3});

  const Series zeros(50, 0.0);
  CHECK(detect_crossovers(zeros, zeros, 0).empty());
  CHECK_THROWS_AS(detect_crossovers(Series(3, 0.0), Series(4, 0.0), 0), DataError);
}

TEST_CASE("crossover directions alternate on a chaotic series") {
  SynthParams p;
  p.days = 20;
  const auto s = synth_generate(p);
  const auto fm = compute_features(s);
  const auto ev = detect_crossovers(fm.column("macd"), fm.column("macd_signal"), fm.valid_from, &s);
  REQUIRE(ev.size() > 30);
  for (std::size_t k = 1; k < ev.size(); ++k) {
    CHECK(ev[k].direction == -ev[k - 1].direction);
    CHECK(ev[k].bar_index > ev[k - 1].bar_index);
    CHECK(ev[k].close == s[ev[k].bar_index].close);
  }
}

TEST_CASE("build_targets differences successive event closes") {
  std::vector<MacdEvent> ev = {{10, 0, 100.0, 1}, {20, 0, 103.0, -1}, {30, 0, 101.0, 1}};
  const auto t = build_targets(ev);
  REQUIRE(t.size() == 2);
  CHECK(t[0].second == 3.0);
  CHECK(t[1].second == -2.0);
  ev[1].close = 100.0;
  CHECK(build_targets(ev)[0].second == 0.0);
  CHECK_THROWS_AS(build_targets({ev[0]}), DataError);
}

TEST_CASE("expanding standardization uses population statistics of the prefix") {
  const auto s = expanding_standardize({1, 2, 3}, 1);
  CHECK(s.z[2] == Approx(1.224744871391589).epsilon(1e-12));
  CHECK_FALSE(s.usable[0]);  // sigma of one value is 0
  CHECK(s.usable[2]);

  const auto flat = expanding_standardize({5, 5, 5, 5, 6}, 2);
  for (int i = 0; i < 4; ++i) {
    CHECK_FALSE(flat.usable[static_cast<std::size_t>(i)]);
    CHECK(flat.z[static_cast<std::size_t>(i)] == 0.0);
  }
  CHECK(flat.usable[4]);

  const auto early = expanding_standardize({1, 2, 3, 4}, 20);
  for (bool u : early.usable) CHECK_FALSE(u);
}

TEST_CASE("expanding standardization is causal under perturbation and truncation") {
  std::mt19937_64 rng(11);
  Series y(300);
  for (auto& v : y) v = standard_normal(rng);
  const auto full = expanding_standardize(y);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t i = 20 + rng() % 270;
    Series mutated = y;
    for (std::size_t j = i + 1; j < y.size(); ++j) mutated[j] += standard_normal(rng) * 10.0;
    const auto m = expanding_standardize(mutated);
    Series prefix(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(i + 1));
    const auto t = expanding_standardize(prefix);
    for (std::size_t j = 0; j <= i; ++j) {
      REQUIRE(m.z[j] == full.z[j]);
      REQUIRE(t.z[j] == full.z[j]);
      REQUIRE(t.usable[j] == full.usable[j]);
    }
  }
}

TEST_CASE("gaussian_bin boundaries") {
  const boost::math::normal n;
  const BinningSpec spec;
  CHECK(spec.inner == Approx(boost::math::quantile(n, 0.75)).epsilon(1e-15));
  CHECK(spec.outer == Approx(boost::math::quantile(n, 0.875)).epsilon(1e-15));
  CHECK(gaussian_bin(0.0) == 1);
  CHECK(gaussian_bin(-0.0) == 1);
  CHECK(gaussian_bin(-0.7) == -2);
  CHECK(gaussian_bin(1.2) == 3);
  CHECK(gaussian_bin(spec.inner) == 2);
  CHECK(gaussian_bin(-spec.inner) == -1);  // half-open intervals: -inner <= z < 0
  CHECK(gaussian_bin(spec.outer) == 3);
  CHECK(gaussian_bin(-spec.outer) == -2);
  CHECK(gaussian_bin(-1e-300) == -1);
  CHECK_THROWS_AS(gaussian_bin(std::numeric_limits<double>::quiet_NaN()), DataError);
  CHECK_THROWS_AS(gaussian_bin(std::numeric_limits<double>::infinity()), DataError);
  CHECK_THROWS_AS((BinningSpec{1.0, 0.5}.validate()), ArgumentError);
}

TEST_CASE("gaussian_bin is monotone and antisymmetric on a fine grid") {
  int prev = -3;
  for (int k = -4000; k <= 4000; ++k) {
    const double z = k * 1e-3;
    const int b = gaussian_bin(z);
    REQUIRE(b >= prev);
    REQUIRE(b != 0);
    if (k != 0) REQUIRE(gaussian_bin(-z) == -b);
    if (k != 0) REQUIRE((b > 0) == (z > 0));
    prev = b;
  }
}

TEST_CASE("gaussian_bin class masses over standard-normal draws") {
  std::mt19937_64 rng(2024);
  std::array<double, 6> count{};
  const int n = 200000;
  for (int i = 0; i < n; ++i) count[label_to_index(gaussian_bin(standard_normal(rng)))] += 1.0;
  const std::array<double, 6> expect = {0.125, 0.125, 0.25, 0.25, 0.125, 0.125};
  for (std::size_t k = 0; k < 6; ++k) CHECK(count[k] / n == Approx(expect[k]).margin(0.005));
}

TEST_CASE("build_target_events on a synthetic series") {
  SynthParams p;
  p.days = 30;
  const auto s = synth_generate(p);
  const auto fm = compute_features(s);
  const auto ev = build_target_events(s, fm);
  REQUIRE(ev.size() > 30);
  std::size_t usable = 0;
  for (std::size_t k = 0; k < ev.size(); ++k) {
    if (k) CHECK(ev[k].event.bar_index > ev[k - 1].event.bar_index);
    CHECK(ev[k].label != 0);
    CHECK(std::abs(ev[k].label) <= 3);
    if (ev[k].usable) {
      ++usable;
      if (ev[k].z != 0.0) CHECK((ev[k].label > 0) == (ev[k].z > 0));
    }
  }
  CHECK(usable + kDefaultMinHistory - 1 >= ev.size());
  CHECK(usable_z(ev).size() == usable);

  OhlcSeries flat;
  flat.symbol = "F";
  for (int i = 0; i < 100; ++i) flat.candles.push_back({60 * i, 10, 10, 10, 10});
  CHECK_THROWS_WITH(build_target_events(flat, compute_features(flat)), Catch::Matchers::ContainsSubstring("fewer than 2 events"));
}

TEST_CASE("labels map to class indices in fixed order") {
  for (std::size_t k = 0; k < 6; ++k) CHECK(label_to_index(index_to_label(k)) == k);
  CHECK(index_to_label(0) == -3);
  CHECK(index_to_label(5) == 3);
  CHECK_THROWS_AS(label_to_index(0), ArgumentError);
}
