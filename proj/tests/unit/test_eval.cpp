#include <catch_amalgamated.hpp>

#include "cmg/eval.hpp"

using namespace cmg;
using namespace cmg::eval;
using Catch::Approx;

namespace {

/// Two days of `bars` each; day 1 opens at `open1` and rises one unit per bar.
OhlcSeries two_days(double close0, double open1, std::size_t bars = 8) {
  OhlcSeries s;
  s.symbol = "T";
  std::int64_t ts = 1704186000;
  for (std::size_t i = 0; i < bars; ++i, ts += 900) s.candles.push_back({ts, close0, close0 + 0.5, close0 - 0.5, close0});
  ts += 86400;
  for (std::size_t i = 0; i < bars; ++i, ts += 900) {
    const double o = open1 + static_cast<double>(i);
    s.candles.push_back({ts, o, o + 1.0, o - 0.25, o + 1.0});
  }
  return s;
}

}  // namespace

TEST_CASE("daybreak scoring examples") {
  CHECK(score_daybreak(kBullish, 100.0, 101.0, 99.0));
  CHECK_FALSE(score_daybreak(kBearish, 100.0, 101.0, 100.5));
  CHECK(score_daybreak(kBearish, 100.0, 101.0, 99.5));
  CHECK_FALSE(score_daybreak(kBullish, 101.0, 101.0, 100.5));  // strict inequality
  // a wide range can make both directions correct
  CHECK(score_daybreak(kBullish, 100.0, 102.0, 98.0));
  CHECK(score_daybreak(kBearish, 100.0, 102.0, 98.0));
  CHECK_THROWS_AS(score_daybreak(0, 100.0, 101.0, 99.0), ArgumentError);
  CHECK_THROWS_AS(score_daybreak(kBullish, 100.0, 99.0, 101.0), ArgumentError);

  const std::vector<Candle> fq = {{0, 100, 100.8, 100.5, 100.6}, {900, 100.6, 101, 100.55, 100.9}};
  CHECK(score_daybreak(kBullish, 100.0, fq));
  CHECK_FALSE(score_daybreak(kBearish, 100.0, fq));
}

TEST_CASE("evaluate_model scores against the next day's first quarter") {
  const auto s = two_days(100.0, 102.0);
  const auto days = segment_days(s);
  REQUIRE(days.size() == 2);
  auto up = evaluate_model({{0, kBullish}, {1, kBullish}}, s, days);
  CHECK(up.accuracy == 1.0);
  REQUIRE(up.outcomes.size() == 1);  // the last day has no successor
  CHECK(up.outcomes[0].prev_close == 100.0);
  CHECK(up.outcomes[0].fq_low == 101.75);
  CHECK(up.outcomes[0].fq_high == 104.0);  // first quarter is 2 of 8 bars
  CHECK(evaluate_model({{0, kBearish}}, s, days).accuracy == 0.0);
  CHECK_THROWS_AS(evaluate_model({{1, kBullish}}, s, days), DataError);
  CHECK_THROWS_AS(evaluate_model({{5, kBullish}}, s, days), ArgumentError);
}

TEST_CASE("report ranks by mean accuracy with name tie-break") {
  // dyadic values keep the means and differences exact
  AccuracyMatrix m{{"CMG", "B", "A"}, {"X", "Y", "Z"}, {{0.5, 0.75, 1.0}, {0.25, 0.5, 0.75}, {0.75, 0.5, 0.25}}};
  const auto r = build_report(m);
  REQUIRE(r.ranking.size() == 3);
  CHECK(r.ranking[0].name == "CMG");
  CHECK(r.ranking[1].name == "A");
  CHECK(r.ranking[2].name == "B");
  CHECK(r.ranking[1].mean == 0.5);
  CHECK(r.ranking[2].mean == 0.5);
  REQUIRE(r.tests.size() == 2);
  CHECK(r.tests[0].other == "B");
  // CMG - B is a constant 0.25 shift: t-test degenerate, Wilcoxon fine
  CHECK_FALSE(r.tests[0].t_test.has_value());
  CHECK(r.tests[0].wilcoxon.has_value());
  CHECK(r.tests[1].t_test.has_value());

  const std::string md = render_markdown(r);
  for (const char* h : {"## Average daybreak sentiment prediction accuracy", "## Paired t-test",
                        "## Wilcoxon signed-rank test", "## Notices"})
    CHECK(md.find(h) != std::string::npos);
  CHECK(md.find("| CMG | 0.7500 |") != std::string::npos);
  const std::string csv = render_csv(r);
  CHECK(csv.rfind("table,row,column,value\n", 0) == 0);
  CHECK(csv.find("accuracy,CMG,mean,") != std::string::npos);
  CHECK(csv.find("t_test,CMG vs B,notice,") != std::string::npos);
}

TEST_CASE("report notices for degenerate comparisons") {
  const auto one = build_report({{"CMG"}, {"X", "Y"}, {{0.5, 0.6}}});
  REQUIRE(one.notices.size() == 1);
  CHECK(one.notices[0].find("only one model") != std::string::npos);
  CHECK(one.tests.empty());

  const auto same = build_report({{"CMG", "B"}, {"X", "Y"}, {{0.5, 0.6}, {0.5, 0.6}}});
  REQUIRE(same.tests.size() == 1);
  CHECK_FALSE(same.tests[0].t_test.has_value());
  CHECK_FALSE(same.tests[0].wilcoxon.has_value());
  CHECK(same.notices.size() == 2);
  CHECK(render_markdown(same).find("n/a") != std::string::npos);

  const auto single = build_report({{"CMG", "B"}, {"X"}, {{0.5}, {0.6}}});
  CHECK(single.tests.empty());
  CHECK(single.notices[0].find("fewer than 2 indices") != std::string::npos);

  const auto absent = build_report({{"P", "Q"}, {"X", "Y"}, {{0.5, 0.7}, {0.6, 0.65}}}, "CMG");
  CHECK(absent.tests[0].reference == "P");

  CHECK_THROWS_AS(build_report({{"CMG"}, {"X"}, {{1.5}}}), ArgumentError);
  CHECK_THROWS_AS(build_report({{"CMG"}, {"X", "Y"}, {{0.5}}}), ArgumentError);
}
