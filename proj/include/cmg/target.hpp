#pragma once

// Target construction: MACD/signal crossover events, price moves between
// consecutive events, expanding standardization and six-class Gaussian binning.

#include <array>
#include <ostream>
#include <vector>

#include "cmg/common.hpp"
#include "cmg/indicators.hpp"
#include "cmg/ohlc.hpp"

namespace cmg {

struct MacdEvent {
  std::size_t bar_index = 0;
  std::int64_t timestamp = 0;
  double close = 0.0;
  int direction = 0;  // +1 MACD crossed above signal, -1 below
};

struct BinningSpec {
  double inner = 0.6744897501960817;  // standard normal quantile at 0.75
  double outer = 1.1503493803760079;  // standard normal quantile at 0.875

  void validate() const {
    if (!(inner > 0.0 && inner < outer) || !std::isfinite(outer))
      throw ArgumentError("binning: require 0 < inner < outer");
  }
};

struct TargetEvent {
  MacdEvent event;
  double y_raw = 0.0;
  double z = 0.0;
  int label = 1;
  bool usable = false;
};

/// Class labels in class-index order.
inline constexpr std::array<int, 6> kClassLabels = {-3, -2, -1, 1, 2, 3};

inline std::size_t label_to_index(int label) {
  for (std::size_t i = 0; i < kClassLabels.size(); ++i)
    if (kClassLabels[i] == label) return i;
  throw ArgumentError("invalid sentiment label " + std::to_string(label));
}

inline int index_to_label(std::size_t idx) {
  if (idx >= kClassLabels.size()) throw ArgumentError("class index out of range");
  return kClassLabels[idx];
}

/// Events where sign(macd - signal) flips. Zero differences inherit the previous
/// nonzero sign, so a touch-and-return is not a crossover.
inline std::vector<std::size_t> crossover_indices(const Series& diff, std::size_t valid_from, std::vector<int>* dirs) {
  std::vector<std::size_t> out;
  int prev = 0;
  for (std::size_t i = valid_from; i < diff.size(); ++i) {
    if (is_missing(diff[i])) throw DataError("detect_crossovers: missing value at or after valid_from");
    int s = diff[i] > 0.0 ? 1 : (diff[i] < 0.0 ? -1 : 0);
    if (s == 0) s = prev;
    if (s != 0 && prev != 0 && s != prev) {
      out.push_back(i);
      if (dirs) dirs->push_back(s);
    }
    prev = s;
  }
  return out;
}

inline std::vector<MacdEvent> detect_crossovers(const Series& macd_line, const Series& signal_line,
                                                std::size_t valid_from, const OhlcSeries* series = nullptr) {
  if (macd_line.size() != signal_line.size()) throw DataError("detect_crossovers: length mismatch");
  if (series && series->size() != macd_line.size()) throw DataError("detect_crossovers: series length mismatch");
  if (valid_from > macd_line.size()) throw DataError("detect_crossovers: valid_from out of range");
  Series diff(macd_line.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = macd_line[i] - signal_line[i];
  std::vector<int> dirs;
  const auto idx = crossover_indices(diff, valid_from, &dirs);
  std::vector<MacdEvent> events;
  events.reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    MacdEvent e{idx[k], 0, 0.0, dirs[k]};
    if (series) {
      e.timestamp = (*series)[idx[k]].timestamp;
      e.close = (*series)[idx[k]].close;
    }
    events.push_back(e);
  }
  return events;
}

/// y_raw = next event's close - this event's close. The last event has no successor.
inline std::vector<std::pair<MacdEvent, double>> build_targets(const std::vector<MacdEvent>& events) {
  if (events.size() < 2) throw DataError("build_targets: fewer than 2 events");
  std::vector<std::pair<MacdEvent, double>> out;
  out.reserve(events.size() - 1);
  for (std::size_t i = 0; i + 1 < events.size(); ++i) out.emplace_back(events[i], events[i + 1].close - events[i].close);
  return out;
}

struct Standardized {
  Series z;
  std::vector<bool> usable;
};

inline constexpr std::size_t kDefaultMinHistory = 20;
inline constexpr double kSigmaFloor = 1e-12;

/// z[i] uses the population mean and sigma of y[0..i] only.
inline Standardized expanding_standardize(const Series& y, std::size_t min_history = kDefaultMinHistory) {
  Standardized out{Series(y.size(), 0.0), std::vector<bool>(y.size(), false)};
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    const double delta = y[i] - mean;
    mean += delta / n;
    m2 += delta * (y[i] - mean);
    const double sigma = std::sqrt(std::max(m2, 0.0) / n);
    if (i + 1 >= min_history && sigma > kSigmaFloor) {
      out.z[i] = (y[i] - mean) / sigma;
      out.usable[i] = true;
    }
  }
  return out;
}

inline int gaussian_bin(double z, const BinningSpec& spec = {}) {
  if (!std::isfinite(z)) throw DataError("gaussian_bin: non-finite z");
  if (z < -spec.outer) return -3;
  if (z < -spec.inner) return -2;
  if (z < 0.0) return -1;
  if (z < spec.inner) return 1;
  if (z < spec.outer) return 2;
  return 3;
}

struct TargetOptions {
  BinningSpec binning;
  std::size_t min_history = kDefaultMinHistory;
};

inline std::vector<TargetEvent> build_target_events(const OhlcSeries& series, const FeatureMatrix& features,
                                                    const TargetOptions& opt = {}) {
  opt.binning.validate();
  if (features.size() != series.size()) throw DataError("build_target_events: features not computed on this series");
  const auto events =
      detect_crossovers(features.column("macd"), features.column("macd_signal"), features.valid_from, &series);
  const auto targets = build_targets(events);
  Series y(targets.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = targets[i].second;
  const auto st = expanding_standardize(y, opt.min_history);
  std::vector<TargetEvent> out(targets.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].event = targets[i].first;
    out[i].y_raw = y[i];
    out[i].z = st.z[i];
    out[i].usable = st.usable[i];
    out[i].label = gaussian_bin(st.z[i], opt.binning);
  }
  return out;
}

/// Standardized z of usable events, the series the chaos battery runs on.
inline Series usable_z(const std::vector<TargetEvent>& events) {
  Series z;
  for (const auto& e : events)
    if (e.usable) z.push_back(e.z);
  return z;
}

inline void write_targets_csv(std::ostream& out, const std::vector<TargetEvent>& events) {
  out << "bar_index,timestamp,direction,y_raw,z,label,usable\n";
  for (const auto& e : events)
    out << e.event.bar_index << ',' << e.event.timestamp << ',' << e.event.direction << ',' << format_number(e.y_raw)
        << ',' << format_number(e.z) << ',' << e.label << ',' << (e.usable ? 1 : 0) << '\n';
}

}  // namespace cmg
