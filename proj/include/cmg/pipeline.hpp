#pragma once

// Per-index end-to-end run: features -> targets -> samples -> split -> models -> daybreak accuracy.
//
// Train samples are restricted to events whose successor event also lies in a
// train day, so no train tensor depends on any test-day bar.

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cmg/baselines.hpp"
#include "cmg/chaos.hpp"
#include "cmg/dataset.hpp"
#include "cmg/eval.hpp"
#include "cmg/indicators.hpp"
#include "cmg/model/network.hpp"
#include "cmg/model/train.hpp"
#include "cmg/ohlc.hpp"
#include "cmg/target.hpp"

namespace cmg {

struct PipelineConfig {
  std::uint64_t seed = 42;
  std::string out_dir = "out";

  SynthParams synth;
  int indices = 3;  // synthetic indices in `compare`

  chaos::ChaosConfig chaos;
  std::size_t chaos_m = 3;
  std::size_t chaos_tau = 0;  // 0 -> first 1/e crossing of the autocorrelation
  chaos::GateThresholds gate;
  bool enforce_gate = false;

  TargetOptions target;

  std::size_t window = kDefaultWindow;
  double test_fraction = 0.3;
  std::int64_t utc_offset = 0;

  model::ModelConfig model;
  model::TrainConfig train;
  baselines::GdOptions gd;
};

/// Built-in defaults with the output directory taken from CMG_OUT_DIR when set.
inline PipelineConfig default_pipeline_config() {
  PipelineConfig c;
  if (const char* env = std::getenv("CMG_OUT_DIR"); env && *env) c.out_dir = env;
  return c;
}

inline void validate(const PipelineConfig& c) {
  if (c.indices < 1) throw ArgumentError("config: indices must be >= 1");
  if (c.window < 1) throw ArgumentError("config: window must be >= 1");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw ArgumentError("config: test_fraction must lie in (0, 1)");
  if (c.chaos_m < 2) throw ArgumentError("config: chaos embedding dimension must be >= 2");
  if (c.gd.epochs < 1 || !(c.gd.lr > 0.0) || !(c.gd.l2 >= 0.0)) throw ArgumentError("config: invalid baseline settings");
  c.target.binning.validate();
  c.model.validate();
  c.train.validate();
}

inline chaos::ChaosConfig chaos_config_for(const PipelineConfig& cfg, const Series& x) {
  chaos::ChaosConfig cc = cfg.chaos;
  cc.embedding = chaos::EmbeddingSpec{cfg.chaos_m, cfg.chaos_tau ? cfg.chaos_tau : chaos::autocorrelation_delay(x)};
  return cc;
}

struct PreparedIndex {
  std::string name;
  OhlcSeries series;
  std::vector<TradingDay> days;
  FeatureMatrix features;
  FeatureMatrix std_features;
  std::vector<TargetEvent> events;
  std::vector<EventSample> samples;  // every usable event
  std::size_t dropped_before_valid = 0;
  std::size_t first_test_day = 0;    // index into `days`
  std::vector<EventSample> train;    // successor event inside train days
  std::vector<EventSample> test;
};

/// Index of the first test day: the last ceil(fraction * D) trading days are test.
inline std::size_t first_test_day_index(std::size_t n_days, double test_fraction) {
  if (n_days < 2) throw DataError("split: fewer than 2 trading days");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ArgumentError("split: fraction must lie in (0, 1)");
  const std::size_t n_test = std::clamp<std::size_t>(ceil_fraction(test_fraction, n_days), 1, n_days - 1);
  return n_days - n_test;
}

inline PreparedIndex prepare_index(const std::string& name, const OhlcSeries& series, const PipelineConfig& cfg) {
  PreparedIndex p;
  p.name = name;
  p.series = series;
  p.days = segment_days(series, cfg.utc_offset);
  p.features = compute_features(series);
  p.std_features = standardize_features_per_day(p.features, p.days);
  p.events = build_target_events(series, p.features, cfg.target);
  AlignResult al = align_events(p.events, p.std_features, p.days);
  p.samples = std::move(al.samples);
  p.dropped_before_valid = al.dropped_before_valid;
  p.first_test_day = first_test_day_index(p.days.size(), cfg.test_fraction);
  const std::size_t boundary_bar = p.days[p.first_test_day].start_index;

  // successor bar of each event, to keep train labels free of test-day prices
  std::vector<std::size_t> successor_bar;
  {
    const auto crossings = detect_crossovers(p.features.column("macd"), p.features.column("macd_signal"),
                                             p.features.valid_from, &series);
    for (const auto& e : p.events) {
      auto it = std::upper_bound(crossings.begin(), crossings.end(), e.event.bar_index,
                                 [](std::size_t b, const MacdEvent& m) { return b < m.bar_index; });
      successor_bar.push_back(it == crossings.end() ? series.size() : it->bar_index);
    }
  }
  std::vector<std::size_t> succ_of_sample;
  for (std::size_t k = 0; k < p.events.size(); ++k)
    if (p.events[k].usable && p.events[k].event.bar_index >= p.std_features.valid_from)
      succ_of_sample.push_back(successor_bar[k]);

  for (std::size_t k = 0; k < p.samples.size(); ++k) {
    const auto& s = p.samples[k];
    if (s.bar_index >= boundary_bar)
      p.test.push_back(s);
    else if (succ_of_sample[k] < boundary_bar)
      p.train.push_back(s);
  }
  if (p.train.empty()) throw DataError(name + ": no training samples");
  return p;
}

/// Chronological train / validation split of the train samples by day.
struct TrainValSplit {
  std::vector<SequenceWindow> train;
  std::vector<SequenceWindow> val;
};

inline TrainValSplit split_train_windows(const std::vector<EventSample>& train, std::size_t L, double val_fraction) {
  std::set<int> day_set;
  for (const auto& s : train) day_set.insert(s.day_id);
  if (day_set.size() < 2) throw DataError("validation split: fewer than 2 train days");
  const std::vector<int> ids(day_set.begin(), day_set.end());
  const std::size_t n_val = std::clamp<std::size_t>(ceil_fraction(val_fraction, ids.size()), 1, ids.size() - 1);
  const int first_val_day = ids[ids.size() - n_val];
  TrainValSplit out;
  for (auto& w : make_windows(train, L)) (w.last_day_id >= first_val_day ? out.val : out.train).push_back(std::move(w));
  if (out.train.empty() || out.val.empty()) throw DataError("validation split: empty train or validation windows");
  return out;
}

/// Feature rows available at each day's close: every crossover at or after
/// valid_from, independent of whether its successor event exists yet.
struct ForecastInputs {
  std::vector<std::vector<double>> rows;   // chronological
  std::vector<std::size_t> bars;
  std::vector<std::size_t> day_indices;    // scored days (test days with a full window)
  std::vector<std::size_t> last_row;       // row index used for each scored day
};

inline ForecastInputs forecast_inputs(const PreparedIndex& p, std::size_t L) {
  ForecastInputs f;
  const auto crossings = detect_crossovers(p.features.column("macd"), p.features.column("macd_signal"),
                                           p.features.valid_from, &p.series);
  for (const auto& e : crossings) {
    f.rows.push_back(p.std_features.rows[e.bar_index]);
    f.bars.push_back(e.bar_index);
  }
  for (std::size_t d = p.first_test_day; d + 1 < p.days.size(); ++d) {
    const auto it = std::upper_bound(f.bars.begin(), f.bars.end(), p.days[d].end_index);
    const auto count = static_cast<std::size_t>(it - f.bars.begin());
    if (count < L) continue;
    f.day_indices.push_back(d);
    f.last_row.push_back(count - 1);
  }
  if (f.day_indices.empty()) throw DataError(p.name + ": no scorable test days");
  return f;
}

inline SequenceWindow window_ending_at(const ForecastInputs& f, std::size_t last, std::size_t L) {
  SequenceWindow w;
  for (std::size_t i = last + 1 - L; i <= last; ++i) {
    w.encoder_input.push_back(f.rows[i]);
    w.labels.push_back(1);
  }
  w.decoder_input = w.encoder_input;
  return w;
}

struct IndexResult {
  std::string name;
  std::vector<std::string> model_names;
  std::vector<eval::ModelEvaluation> evaluations;
  double majority_accuracy = 0.0;  // constant majority-direction forecast on the same days
  model::TrainResult cmg;
  baselines::LinearModel mlr, blr;
  baselines::GnbModel gnb;
  std::optional<chaos::ChaosReport> chaos_report;
  std::optional<chaos::GateResult> gate;
  std::vector<std::string> notices;
  std::size_t train_samples = 0, test_samples = 0;
};

inline const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {"CMG", "Multinomial LR", "Logistic Regression", "Gaussian NB"};
  return names;
}

inline model::ModelConfig model_config_for(const PipelineConfig& cfg, std::size_t n_features, std::uint64_t seed) {
  model::ModelConfig mc = cfg.model;
  mc.window = static_cast<int>(cfg.window);
  mc.n_features = static_cast<int>(n_features);
  mc.seed = derive_seed(seed, "model");
  return mc;
}

/// `pretrained` skips CMG training and evaluates the given parameters instead.
inline IndexResult run_index(const PreparedIndex& p, const PipelineConfig& cfg, std::uint64_t seed,
                             const model::CmgParams* pretrained = nullptr) {
  IndexResult r;
  r.name = p.name;
  r.model_names = model_names();
  r.train_samples = p.train.size();
  r.test_samples = p.test.size();

  try {
    const Series z = usable_z(p.events);
    r.chaos_report = chaos::run_battery(z, chaos_config_for(cfg, z));
    r.gate = chaos::chaos_gate(*r.chaos_report, cfg.gate);
    for (const auto& w : r.gate->warnings) r.notices.push_back(p.name + ": chaos warning: " + w);
    for (const auto& w : r.gate->reasons) r.notices.push_back(p.name + ": chaos gate failed: " + w);
  } catch (const DataError& e) {
    r.notices.push_back(p.name + ": chaos battery skipped: " + e.what());
  }
  if (cfg.enforce_gate && (!r.gate || !r.gate->pass)) throw DataError(p.name + ": chaos gate failed");

  const std::size_t L = cfg.window;
  if (pretrained) {
    if (static_cast<std::size_t>(pretrained->config.window) != L ||
        static_cast<std::size_t>(pretrained->config.n_features) != p.std_features.width())
      throw DataError("checkpoint window or feature count does not match the pipeline");
    r.cmg.params = *pretrained;
  } else {
    const auto tv = split_train_windows(p.train, L, cfg.train.val_fraction);
    model::TrainConfig tc = cfg.train;
    tc.seed = derive_seed(seed, "train");
    r.cmg = model::train(model::init_params(model_config_for(cfg, p.std_features.width(), seed)), tv.train, tv.val, tc);
  }

  r.mlr = baselines::fit_multinomial_lr(p.train, cfg.gd);
  r.blr = baselines::fit_binary_lr(p.train, cfg.gd);
  r.gnb = baselines::fit_gnb(p.train);

  const ForecastInputs f = forecast_inputs(p, L);
  std::vector<std::vector<eval::DayForecast>> fc(4);
  for (std::size_t k = 0; k < f.day_indices.size(); ++k) {
    const std::size_t d = f.day_indices[k];
    const auto& row = f.rows[f.last_row[k]];
    fc[0].push_back({d, static_cast<int>(model::predict_next(r.cmg.params, window_ending_at(f, f.last_row[k], L)).direction)});
    fc[1].push_back({d, baselines::predict(r.mlr, row).direction});
    fc[2].push_back({d, baselines::predict(r.blr, row).direction});
    fc[3].push_back({d, baselines::predict(r.gnb, row).direction});
  }
  for (const auto& one : fc) r.evaluations.push_back(eval::evaluate_model(one, p.series, p.days));

  std::size_t up = 0;
  for (const auto& s : p.train) up += s.direction() > 0;
  const int majority = 2 * up >= p.train.size() ? eval::kBullish : eval::kBearish;
  std::vector<eval::DayForecast> constant;
  for (std::size_t d : f.day_indices) constant.push_back({d, majority});
  r.majority_accuracy = eval::evaluate_model(constant, p.series, p.days).accuracy;
  return r;
}

}  // namespace cmg
