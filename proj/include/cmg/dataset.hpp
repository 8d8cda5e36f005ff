#pragma once

// Per-day feature standardization, event/feature alignment, chronological
// split and sliding sequence windows.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <vector>

#include "cmg/common.hpp"
#include "cmg/indicators.hpp"
#include "cmg/ohlc.hpp"
#include "cmg/target.hpp"

namespace cmg {

struct EventSample {
  std::vector<double> features;
  int label = 1;  // class label in {-3..3} \ {0}
  int day_id = 0;
  std::size_t bar_index = 0;

  std::size_t class_index() const { return label_to_index(label); }
  int direction() const { return label > 0 ? 1 : -1; }
};

struct SequenceWindow {
  std::vector<std::vector<double>> encoder_input;  // L x F
  std::vector<std::vector<double>> decoder_input;  // L x F
  std::vector<int> labels;                         // L class labels
  int last_day_id = 0;
  std::size_t last_bar_index = 0;

  std::size_t length() const { return labels.size(); }
};

/// Z-score every column within each day using that day's defined values only.
/// Degenerate (sigma < 1e-12) day columns become 0; missing entries stay missing.
inline FeatureMatrix standardize_features_per_day(const FeatureMatrix& fm, const std::vector<TradingDay>& days) {
  FeatureMatrix out = fm;
  const std::size_t width = fm.width();
  for (const TradingDay& d : days) {
    if (d.end_index >= fm.size()) throw DataError("standardize_features_per_day: day range exceeds matrix");
    for (std::size_t c = 0; c < width; ++c) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t i = d.start_index; i <= d.end_index; ++i) {
        if (is_missing(fm.rows[i][c])) continue;
        sum += fm.rows[i][c];
        ++n;
      }
      if (n == 0) continue;
      const double mean = sum / static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t i = d.start_index; i <= d.end_index; ++i)
        if (!is_missing(fm.rows[i][c])) ss += (fm.rows[i][c] - mean) * (fm.rows[i][c] - mean);
      const double sigma = std::sqrt(ss / static_cast<double>(n));
      for (std::size_t i = d.start_index; i <= d.end_index; ++i) {
        if (is_missing(fm.rows[i][c])) continue;
        out.rows[i][c] = sigma < kSigmaFloor ? 0.0 : (fm.rows[i][c] - mean) / sigma;
      }
    }
  }
  return out;
}

struct AlignResult {
  std::vector<EventSample> samples;
  std::size_t dropped_before_valid = 0;
};

inline AlignResult align_events(const std::vector<TargetEvent>& events, const FeatureMatrix& std_features,
                                const std::vector<TradingDay>& days) {
  AlignResult r;
  for (const TargetEvent& e : events) {
    if (!e.usable) continue;
    const std::size_t bar = e.event.bar_index;
    if (bar < std_features.valid_from) {
      ++r.dropped_before_valid;
      continue;
    }
    if (bar >= std_features.size()) throw DataError("align_events: event beyond feature matrix");
    EventSample s;
    s.features = std_features.rows[bar];
    if (!std::all_of(s.features.begin(), s.features.end(), [](double v) { return std::isfinite(v); }))
      throw DataError("align_events: non-finite feature at bar " + std::to_string(bar));
    s.label = e.label;
    s.bar_index = bar;
    s.day_id = days[day_of_bar(days, bar)].day_id;
    r.samples.push_back(std::move(s));
  }
  return r;
}

struct Split {
  std::vector<EventSample> train;
  std::vector<EventSample> test;
  int first_test_day = 0;
};

/// ceil(fraction * n) with a tolerance for products like 0.3 * 10 = 3.0000000000000004.
inline std::size_t ceil_fraction(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

/// The last ceil(fraction * D) distinct days form the test set.
inline Split chronological_split(const std::vector<EventSample>& samples, double test_fraction = 0.3) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ArgumentError("chronological_split: fraction in (0,1)");
  std::set<int> day_set;
  for (const auto& s : samples) day_set.insert(s.day_id);
  if (day_set.size() < 2) throw DataError("chronological_split: fewer than 2 days");
  const std::vector<int> ids(day_set.begin(), day_set.end());
  const std::size_t n_test = std::clamp<std::size_t>(ceil_fraction(test_fraction, ids.size()), 1, ids.size() - 1);
  Split sp;
  sp.first_test_day = ids[ids.size() - n_test];
  for (const auto& s : samples) (s.day_id >= sp.first_test_day ? sp.test : sp.train).push_back(s);
  return sp;
}

inline constexpr std::size_t kDefaultWindow = 16;

/// Stride-1 windows of L consecutive samples; encoder and decoder see the same rows.
inline std::vector<SequenceWindow> make_windows(const std::vector<EventSample>& samples, std::size_t L) {
  if (L < 1) throw ArgumentError("make_windows: L must be >= 1");
  if (samples.size() < L) throw DataError("make_windows: too few samples for window length");
  std::vector<SequenceWindow> out;
  out.reserve(samples.size() - L + 1);
  for (std::size_t end = L; end <= samples.size(); ++end) {
    SequenceWindow w;
    for (std::size_t i = end - L; i < end; ++i) {
      w.encoder_input.push_back(samples[i].features);
      w.labels.push_back(samples[i].label);
    }
    w.decoder_input = w.encoder_input;
    w.last_day_id = samples[end - 1].day_id;
    w.last_bar_index = samples[end - 1].bar_index;
    out.push_back(std::move(w));
  }
  return out;
}

inline void write_samples_csv(std::ostream& out, const std::vector<EventSample>& samples,
                              const std::vector<std::string>& names) {
  out << "bar_index,day_id,label";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (const auto& s : samples) {
    out << s.bar_index << ',' << s.day_id << ',' << s.label;
    for (double v : s.features) out << ',' << format_number(v);
    out << '\n';
  }
}

inline void write_split_csv(std::ostream& out, const Split& sp) {
  out << "bar_index,day_id,set\n";
  for (const auto& s : sp.train) out << s.bar_index << ',' << s.day_id << ",train\n";
  for (const auto& s : sp.test) out << s.bar_index << ',' << s.day_id << ",test\n";
}

}  // namespace cmg
