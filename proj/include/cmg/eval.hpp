#pragma once

// Daybreak sentiment scoring and the accuracy / significance report.

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cmg/common.hpp"
#include "cmg/ohlc.hpp"
#include "cmg/stats.hpp"

namespace cmg::eval {

inline constexpr int kBullish = 1;
inline constexpr int kBearish = -1;

/// Bullish is correct iff prev_close < the highest first-quarter high;
/// bearish iff prev_close > the lowest first-quarter low.
inline bool score_daybreak(int direction, double prev_close, double fq_high, double fq_low) {
  if (direction != kBullish && direction != kBearish) throw ArgumentError("score_daybreak: direction must be +-1");
  if (fq_low > fq_high) throw ArgumentError("score_daybreak: fq_low > fq_high");
  return direction == kBullish ? prev_close < fq_high : prev_close > fq_low;
}

inline bool score_daybreak(int direction, double prev_close, const std::vector<Candle>& first_quarter_bars) {
  if (first_quarter_bars.empty()) throw ArgumentError("score_daybreak: empty first-quarter range");
  double hi = first_quarter_bars.front().high, lo = first_quarter_bars.front().low;
  for (const auto& c : first_quarter_bars) {
    hi = std::max(hi, c.high);
    lo = std::min(lo, c.low);
  }
  return score_daybreak(direction, prev_close, hi, lo);
}

/// A forecast issued at the close of days[day_index] for the next session.
struct DayForecast {
  std::size_t day_index = 0;
  int direction = kBullish;
};

struct DaybreakOutcome {
  int day_id = 0;
  int prediction = kBullish;
  double prev_close = 0.0;
  double fq_high = 0.0;
  double fq_low = 0.0;
  bool correct = false;
};

struct ModelEvaluation {
  double accuracy = 0.0;
  std::vector<DaybreakOutcome> outcomes;
};

/// Scores each forecast against the following day's first quarter. Forecasts on
/// the final day have no successor and are skipped.
inline ModelEvaluation evaluate_model(const std::vector<DayForecast>& forecasts, const OhlcSeries& series,
                                      const std::vector<TradingDay>& days) {
  ModelEvaluation ev;
  std::size_t hits = 0;
  for (const auto& f : forecasts) {
    if (f.day_index >= days.size()) throw ArgumentError("evaluate_model: day index out of range");
    if (f.day_index + 1 >= days.size()) continue;
    const TradingDay& today = days[f.day_index];
    const IndexRange fq = first_quarter(days[f.day_index + 1]);
    DaybreakOutcome o;
    o.day_id = today.day_id;
    o.prediction = f.direction;
    o.prev_close = series[today.end_index].close;
    o.fq_high = series[fq.first].high;
    o.fq_low = series[fq.first].low;
    for (std::size_t i = fq.first; i <= fq.last; ++i) {
      o.fq_high = std::max(o.fq_high, series[i].high);
      o.fq_low = std::min(o.fq_low, series[i].low);
    }
    o.correct = score_daybreak(o.prediction, o.prev_close, o.fq_high, o.fq_low);
    hits += o.correct;
    ev.outcomes.push_back(o);
  }
  if (ev.outcomes.empty()) throw DataError("evaluate_model: no scorable days");
  ev.accuracy = static_cast<double>(hits) / static_cast<double>(ev.outcomes.size());
  return ev;
}

// --- report ------------------------------------------------------------------------

struct AccuracyMatrix {
  std::vector<std::string> models;
  std::vector<std::string> indices;
  std::vector<std::vector<double>> acc;  // [model][index]

  void validate() const {
    if (models.empty()) throw ArgumentError("report: no models");
    if (indices.empty()) throw ArgumentError("report: no indices");
    if (acc.size() != models.size()) throw ArgumentError("report: accuracy rows != models");
    for (const auto& row : acc) {
      if (row.size() != indices.size()) throw ArgumentError("report: accuracy columns != indices");
      for (double a : row)
        if (!(a >= 0.0 && a <= 1.0)) throw ArgumentError("report: accuracy outside [0, 1]");
    }
  }
};

struct RankedModel {
  std::string name;
  double mean = 0.0;
  std::size_t row = 0;  // into AccuracyMatrix
};

struct PairwiseTest {
  std::string reference;
  std::string other;
  std::optional<stats::TTestResult> t_test;
  std::optional<stats::WilcoxonResult> wilcoxon;
  std::string t_notice, w_notice;
};

struct EvalReport {
  AccuracyMatrix matrix;
  std::vector<RankedModel> ranking;  // mean descending, ties by name
  std::vector<PairwiseTest> tests;
  std::vector<std::string> notices;
};

inline EvalReport build_report(const AccuracyMatrix& m, const std::string& reference = "CMG") {
  m.validate();
  EvalReport r;
  r.matrix = m;
  for (std::size_t k = 0; k < m.models.size(); ++k) {
    double s = 0.0;
    for (double a : m.acc[k]) s += a;
    r.ranking.push_back({m.models[k], s / static_cast<double>(m.indices.size()), k});
  }
  std::sort(r.ranking.begin(), r.ranking.end(), [](const RankedModel& a, const RankedModel& b) {
    return a.mean != b.mean ? a.mean > b.mean : a.name < b.name;
  });

  if (m.models.size() < 2) {
    r.notices.push_back("significance tests skipped: only one model");
    return r;
  }
  if (m.indices.size() < 2) {
    r.notices.push_back("significance tests skipped: fewer than 2 indices");
    return r;
  }
  const auto ref_it = std::find(m.models.begin(), m.models.end(), reference);
  const std::size_t ref = ref_it == m.models.end() ? 0 : static_cast<std::size_t>(ref_it - m.models.begin());
  if (ref_it == m.models.end())
    r.notices.push_back("reference model '" + reference + "' absent; comparing against " + m.models[0]);
  for (std::size_t k = 0; k < m.models.size(); ++k) {
    if (k == ref) continue;
    PairwiseTest pt{m.models[ref], m.models[k], std::nullopt, std::nullopt, {}, {}};
    try {
      pt.t_test = stats::paired_t_test(m.acc[ref], m.acc[k]);
    } catch (const NumericalError& e) {
      pt.t_notice = e.what();
    }
    try {
      pt.wilcoxon = stats::wilcoxon_signed_rank(m.acc[ref], m.acc[k]);
    } catch (const NumericalError& e) {
      pt.w_notice = e.what();
    }
    if (!pt.t_notice.empty()) r.notices.push_back(pt.reference + " vs " + pt.other + " (t-test): " + pt.t_notice);
    if (!pt.w_notice.empty()) r.notices.push_back(pt.reference + " vs " + pt.other + " (Wilcoxon): " + pt.w_notice);
    r.tests.push_back(std::move(pt));
  }
  return r;
}

inline std::string render_markdown(const EvalReport& r) {
  std::ostringstream o;
  const auto& m = r.matrix;
  o << "# Daybreak sentiment evaluation\n\n";
  o << "## Average daybreak sentiment prediction accuracy\n\n";
  o << "| Model | Mean accuracy |";
  for (const auto& idx : m.indices) o << ' ' << idx << " |";
  o << "\n|---|---|";
  for (std::size_t k = 0; k < m.indices.size(); ++k) o << "---|";
  o << '\n';
  for (const auto& rm : r.ranking) {
    o << "| " << rm.name << " | " << format_fixed(rm.mean, 4) << " |";
    for (double a : m.acc[rm.row]) o << ' ' << format_fixed(a, 4) << " |";
    o << '\n';
  }
  if (!r.tests.empty()) {
    o << "\n## Paired t-test\n\n| Comparison | t | df | p-value | n |\n|---|---|---|---|---|\n";
    for (const auto& t : r.tests) {
      o << "| " << t.reference << " vs " << t.other << " | ";
      if (t.t_test)
        o << format_fixed(t.t_test->t, 4) << " | " << format_fixed(t.t_test->df, 0) << " | "
          << format_fixed(t.t_test->p, 4) << " | " << t.t_test->n << " |\n";
      else
        o << "n/a | n/a | n/a | " << m.indices.size() << " |\n";
    }
    o << "\n## Wilcoxon signed-rank test\n\n| Comparison | W | p-value | n | method |\n|---|---|---|---|---|\n";
    for (const auto& t : r.tests) {
      o << "| " << t.reference << " vs " << t.other << " | ";
      if (t.wilcoxon)
        o << format_fixed(t.wilcoxon->w, 1) << " | " << format_fixed(t.wilcoxon->p, 4) << " | "
          << t.wilcoxon->n_effective << " | " << (t.wilcoxon->exact ? "exact" : "normal approx.") << " |\n";
      else
        o << "n/a | n/a | 0 | n/a |\n";
    }
  }
  if (!r.notices.empty()) {
    o << "\n## Notices\n\n";
    for (const auto& n : r.notices) o << "- " << n << '\n';
  }
  return o.str();
}

/// Long-format CSV: table,row,column,value.
inline std::string render_csv(const EvalReport& r) {
  std::ostringstream o;
  o << "table,row,column,value\n";
  const auto& m = r.matrix;
  for (const auto& rm : r.ranking) {
    o << "accuracy," << rm.name << ",mean," << format_number(rm.mean) << '\n';
    for (std::size_t k = 0; k < m.indices.size(); ++k)
      o << "accuracy," << rm.name << ',' << m.indices[k] << ',' << format_number(m.acc[rm.row][k]) << '\n';
  }
  for (const auto& t : r.tests) {
    const std::string row = t.reference + " vs " + t.other;
    if (t.t_test) {
      o << "t_test," << row << ",t," << format_number(t.t_test->t) << '\n';
      o << "t_test," << row << ",df," << format_number(t.t_test->df) << '\n';
      o << "t_test," << row << ",p," << format_number(t.t_test->p) << '\n';
    } else {
      o << "t_test," << row << ",notice," << t.t_notice << '\n';
    }
    if (t.wilcoxon) {
      o << "wilcoxon," << row << ",W," << format_number(t.wilcoxon->w) << '\n';
      o << "wilcoxon," << row << ",p," << format_number(t.wilcoxon->p) << '\n';
      o << "wilcoxon," << row << ",n," << t.wilcoxon->n_effective << '\n';
    } else {
      o << "wilcoxon," << row << ",notice," << t.w_notice << '\n';
    }
  }
  return o.str();
}

}  // namespace cmg::eval
