#pragma once

// Subcommand front-end. Every stage reads either an OHLC CSV (--input) or a
// seeded synthetic series, writes artifacts under --out and prints one summary
// line on stdout. Exit codes: 0 ok, 1 usage, 2 data or validation, 3 numerical.
//
// Value precedence: command-line flag > config file > CMG_OUT_DIR > default.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cmg/config.hpp"
#include "cmg/model/checkpoint.hpp"
#include "cmg/pipeline.hpp"

namespace cmg::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

/// Seed of the k-th synthetic index (0-based) under top-level seed `seed`.
inline std::uint64_t synth_index_seed(std::uint64_t seed, int k) {
  return derive_seed(seed, "synth/" + std::to_string(k));
}

/// Seed for the models of one index; `train`, `evaluate` and `compare` agree.
inline std::uint64_t index_seed(std::uint64_t seed, const std::string& name) { return derive_seed(seed, "index/" + name); }

inline std::string synth_index_name(int k) { return "SYN" + std::to_string(k + 1); }

inline OhlcSeries synth_index(const PipelineConfig& cfg, int k) {
  SynthParams sp = cfg.synth;
  sp.seed = synth_index_seed(cfg.seed, k);
  sp.symbol = synth_index_name(k);
  return synth_generate(sp);
}

inline OhlcSeries read_ohlc(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in, path.stem().string().empty() ? "SERIES" : path.stem().string());
}

/// The --input series, or synthetic index 0 when no input is given.
inline OhlcSeries input_series(const std::string& input, const PipelineConfig& cfg) {
  return input.empty() ? synth_index(cfg, 0) : read_ohlc(input);
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream o;
  fn(o);
  write_text(path, o.str());
}

inline fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

/// Reads one named column of a headered CSV ('#' lines skipped). Missing
/// values are dropped; when a `usable` column exists only usable rows count.
inline Series read_csv_column(const fs::path& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    header = detail::split(t);
    break;
  }
  if (header.empty()) throw DataError(path.string() + ": empty file");
  auto find = [&](const std::string& name) -> std::ptrdiff_t {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (detail::trim(header[k]) == name) return static_cast<std::ptrdiff_t>(k);
    return -1;
  };
  const auto col = find(column);
  if (col < 0) throw DataError(path.string() + ": no column '" + column + "'");
  const auto usable = find("usable");
  Series out;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = detail::split(t);
    if (fields.size() != header.size()) throw DataError(path.string() + ": ragged row " + std::to_string(line_no));
    if (usable >= 0 && detail::trim(fields[static_cast<std::size_t>(usable)]) != "1") continue;
    double v = 0.0;
    if (!detail::parse_double(detail::trim(fields[static_cast<std::size_t>(col)]), v)) continue;
    if (!is_missing(v)) out.push_back(v);
  }
  if (out.empty()) throw DataError(path.string() + ": column '" + column + "' has no values");
  return out;
}

inline Series z_series(const OhlcSeries& s, const PipelineConfig& cfg) {
  return usable_z(build_target_events(s, compute_features(s), cfg.target));
}

/// Scalar series for `chaos` and `phase-space`. Column "z" of an OHLC input
/// (or of the synthetic series) is the standardized crossover target.
inline Series scalar_series(const std::string& input, const std::string& column, const PipelineConfig& cfg) {
  if (input.empty()) {
    const OhlcSeries s = synth_index(cfg, 0);
    if (column == "close") return s.closes();
    if (column == "z") return z_series(s, cfg);
    throw ArgumentError("without --input only columns 'close' and 'z' exist");
  }
  if (column == "z") {
    std::ifstream in(input);
    std::string first;
    while (std::getline(in, first) && detail::trim(first).empty()) {
    }
    if (detail::trim(first) == kOhlcHeader) return z_series(read_ohlc(input), cfg);
  }
  return read_csv_column(input, column);
}

// --- per-index artifacts -------------------------------------------------------------

inline void write_history_csv(std::ostream& o, const model::TrainResult& r) {
  o << "epoch,train_loss,val_accuracy\n";
  for (const auto& e : r.history)
    o << e.epoch << ',' << format_number(e.train_loss) << ',' << format_number(e.val_accuracy) << '\n';
}

inline void write_index_artifacts(const fs::path& dir, const PreparedIndex& p, const IndexResult& r, bool trained) {
  fs::create_directories(dir);
  if (trained) {
    model::save_params(r.cmg.params, dir / "cmg.bin");
    write_with(dir / "history.csv", [&](std::ostream& o) { write_history_csv(o, r.cmg); });
  }
  const auto& names = p.std_features.names;
  write_with(dir / "mlr.csv", [&](std::ostream& o) { baselines::write_linear_csv(o, r.mlr, names); });
  write_with(dir / "blr.csv", [&](std::ostream& o) { baselines::write_linear_csv(o, r.blr, names); });
  write_with(dir / "gnb.csv", [&](std::ostream& o) { baselines::write_gnb_csv(o, r.gnb, names); });
  if (r.chaos_report)
    write_with(dir / "chaos.csv", [&](std::ostream& o) { chaos::write_report_csv(o, p.name, *r.chaos_report); });
  write_with(dir / "outcomes.csv", [&](std::ostream& o) {
    o << "model,day_id,prediction,prev_close,fq_high,fq_low,correct\n";
    for (std::size_t m = 0; m < r.model_names.size(); ++m)
      for (const auto& oc : r.evaluations[m].outcomes)
        o << r.model_names[m] << ',' << oc.day_id << ',' << oc.prediction << ',' << format_number(oc.prev_close) << ','
          << format_number(oc.fq_high) << ',' << format_number(oc.fq_low) << ',' << (oc.correct ? 1 : 0) << '\n';
  });
}

/// Report over several indices plus the majority-direction and chaos sections.
struct FullReport {
  std::string markdown;
  std::string csv;
  eval::EvalReport eval;
};

inline FullReport assemble_report(const std::vector<IndexResult>& results) {
  eval::AccuracyMatrix m;
  m.models = model_names();
  m.acc.assign(m.models.size(), {});
  for (const auto& r : results) {
    m.indices.push_back(r.name);
    for (std::size_t k = 0; k < m.models.size(); ++k) m.acc[k].push_back(r.evaluations[k].accuracy);
  }
  FullReport out;
  out.eval = eval::build_report(m);
  for (const auto& r : results)
    for (const auto& n : r.notices) out.eval.notices.push_back(n);

  std::ostringstream extra;
  extra << "\n## Constant majority-direction reference\n\n| Index | Accuracy | Scored days |\n|---|---|---|\n";
  for (const auto& r : results)
    extra << "| " << r.name << " | " << format_fixed(r.majority_accuracy, 4) << " | "
          << r.evaluations.front().outcomes.size() << " |\n";
  extra << "\n## Chaos battery\n\n| Index | λ | D2 | ApEn | SampEn | DFA α | Spectral Entropy | Gate |\n"
        << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& r : results) {
    if (!r.chaos_report) {
      extra << "| " << r.name << " | n/a | n/a | n/a | n/a | n/a | n/a | skipped |\n";
      continue;
    }
    const auto& c = *r.chaos_report;
    extra << "| " << r.name << " | " << format_fixed(c.lambda, 4) << " | " << format_fixed(c.d2, 4) << " | "
          << format_fixed(c.apen, 4) << " | " << format_fixed(c.sampen, 4) << " | " << format_fixed(c.dfa_alpha, 4)
          << " | " << format_fixed(c.spectral_entropy, 4) << " | " << (r.gate && r.gate->pass ? "pass" : "fail")
          << " |\n";
  }
  std::string md = eval::render_markdown(out.eval);
  const auto notices = md.find("\n## Notices");
  md.insert(notices == std::string::npos ? md.size() : notices, extra.str());
  out.markdown = std::move(md);

  std::ostringstream csv;
  csv << eval::render_csv(out.eval);
  for (const auto& r : results) csv << "reference,Majority direction," << r.name << ',' << format_number(r.majority_accuracy) << '\n';
  for (const auto& r : results) {
    if (!r.chaos_report) continue;
    const auto& c = *r.chaos_report;
    csv << "chaos," << r.name << ",lambda," << format_number(c.lambda) << '\n'
        << "chaos," << r.name << ",D2," << format_number(c.d2) << '\n'
        << "chaos," << r.name << ",ApEn," << format_number(c.apen) << '\n'
        << "chaos," << r.name << ",SampEn," << format_number(c.sampen) << '\n'
        << "chaos," << r.name << ",DFA_alpha," << format_number(c.dfa_alpha) << '\n'
        << "chaos," << r.name << ",Spectral_Entropy," << format_number(c.spectral_entropy) << '\n';
  }
  out.csv = csv.str();
  return out;
}

// --- argument pre-scan ---------------------------------------------------------------

/// Value of --config (either `--config X` or `--config=X`), empty when absent.
inline std::string find_config_path(const std::vector<std::string>& args) {
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) return args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) return args[k].substr(9);
  }
  return {};
}

/// Runs one command line; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  PipelineConfig cfg;
  try {
    const std::string config_path = find_config_path(args);
    cfg = config_path.empty() ? default_pipeline_config() : load_config(config_path);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }

  CLI::App app{"Chaos-Markov-Gaussian sentiment forecasting pipeline", "cmg"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  std::string config_path;
  app.add_option("--config", config_path, "Sectioned key = value config file");

  std::string input, checkpoint;
  std::vector<std::string> inputs;
  std::string column = "z";
  int n_indices_flag = 0;
  long long start = -1, length = -1;

  auto common = [&](CLI::App* sc) {
    sc->add_option("--config", config_path, "Sectioned key = value config file");
    sc->add_option("--seed", cfg.seed, "Top-level seed")->capture_default_str();
    sc->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
  };
  auto synth_flags = [&](CLI::App* sc) {
    sc->add_option("--days", cfg.synth.days, "Synthetic trading days")->capture_default_str();
    sc->add_option("--bars-per-day", cfg.synth.bars_per_day, "Synthetic bars per day")->capture_default_str();
    sc->add_option("--r", cfg.synth.r, "Logistic-map parameter in (3.57, 4]")->capture_default_str();
    sc->add_option("--vol", cfg.synth.vol, "Log-return scale")->capture_default_str();
  };
  auto pipeline_flags = [&](CLI::App* sc) {
    sc->add_option("--utc-offset", cfg.utc_offset, "Day-boundary offset in seconds")->capture_default_str();
    sc->add_option("--window", cfg.window, "Sequence length L")->capture_default_str();
    sc->add_option("--test-fraction", cfg.test_fraction, "Fraction of trading days held out")->capture_default_str();
  };
  auto model_flags = [&](CLI::App* sc) {
    sc->add_option("--d-model", cfg.model.d_model, "Model width")->capture_default_str();
    sc->add_option("--heads", cfg.model.n_heads, "Attention heads")->capture_default_str();
    sc->add_option("--lstm-hidden", cfg.model.lstm_hidden, "LSTM hidden size")->capture_default_str();
    sc->add_option("--lr", cfg.train.lr, "Learning rate")->capture_default_str();
    sc->add_option("--epochs", cfg.train.max_epochs, "Maximum epochs")->capture_default_str();
    sc->add_option("--patience", cfg.train.patience, "Early-stopping patience")->capture_default_str();
  };

  auto* synth = app.add_subcommand("synth", "Generate a seeded chaotic OHLC series");
  common(synth);
  synth_flags(synth);
  synth->add_option("--symbol", cfg.synth.symbol, "Symbol and file stem")->capture_default_str();

  auto* ingest = app.add_subcommand("ingest", "Validate an OHLC CSV and segment it into trading days");
  common(ingest);
  ingest->add_option("--input", input, "OHLC CSV")->required();
  ingest->add_option("--utc-offset", cfg.utc_offset, "Day-boundary offset in seconds")->capture_default_str();

  auto* features = app.add_subcommand("features", "Compute the indicator feature matrix");
  common(features);
  synth_flags(features);
  features->add_option("--input", input, "OHLC CSV (synthetic index 1 when absent)");
  features->add_option("--utc-offset", cfg.utc_offset, "Day-boundary offset in seconds")->capture_default_str();

  auto* chaos_cmd = app.add_subcommand("chaos", "Chaos battery on one column");
  common(chaos_cmd);
  synth_flags(chaos_cmd);
  chaos_cmd->add_option("--input", input, "CSV file (synthetic index 1 when absent)");
  chaos_cmd->add_option("--column", column, "Column name; 'z' on an OHLC file is the crossover target")->capture_default_str();
  chaos_cmd->add_option("--m", cfg.chaos_m, "Embedding dimension")->capture_default_str();
  chaos_cmd->add_option("--tau", cfg.chaos_tau, "Embedding delay (0 = autocorrelation rule)")->capture_default_str();

  auto* target = app.add_subcommand("target", "Crossover targets, samples and the day split");
  common(target);
  synth_flags(target);
  pipeline_flags(target);
  target->add_option("--input", input, "OHLC CSV (synthetic index 1 when absent)");

  auto* train_cmd = app.add_subcommand("train", "Train the CMG model on one index");
  common(train_cmd);
  synth_flags(train_cmd);
  pipeline_flags(train_cmd);
  model_flags(train_cmd);
  train_cmd->add_option("--input", input, "OHLC CSV (synthetic index 1 when absent)");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate CMG and the baselines on one index");
  common(evaluate);
  synth_flags(evaluate);
  pipeline_flags(evaluate);
  model_flags(evaluate);
  evaluate->add_option("--input", input, "OHLC CSV (synthetic index 1 when absent)");
  evaluate->add_option("--checkpoint", checkpoint, "Use this CMG checkpoint instead of training");

  auto* compare = app.add_subcommand("compare", "Full pipeline over several indices with significance tests");
  common(compare);
  synth_flags(compare);
  pipeline_flags(compare);
  model_flags(compare);
  compare->add_option("--input", inputs, "OHLC CSV, repeatable (replaces synthetic indices)");
  compare->add_option("--indices", n_indices_flag, "Synthetic index count");

  auto* phase = app.add_subcommand("phase-space", "Export delay-embedding coordinates");
  common(phase);
  synth_flags(phase);
  phase->add_option("--input", input, "CSV file (synthetic index 1 when absent)");
  phase->add_option("--column", column, "Column name; 'z' on an OHLC file is the crossover target")->capture_default_str();
  phase->add_option("--m", cfg.chaos_m, "Embedding dimension")->capture_default_str();
  phase->add_option("--tau", cfg.chaos_tau, "Embedding delay (0 = autocorrelation rule)")->capture_default_str();
  phase->add_option("--start", start, "First exported point");
  phase->add_option("--length", length, "Number of exported points");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitUsage;
  }
  if (n_indices_flag != 0) cfg.indices = n_indices_flag;

  try {
    validate(cfg);
    const fs::path out_dir = ensure_dir(cfg.out_dir);

    if (synth->parsed()) {
      SynthParams sp = cfg.synth;
      sp.seed = cfg.seed;
      const OhlcSeries s = synth_generate(sp);
      const fs::path path = out_dir / (sp.symbol + ".csv");
      write_with(path, [&](std::ostream& o) { write_csv(o, s); });
      out << "synth: wrote " << s.size() << " bars (" << sp.days << " days) to " << path.string() << '\n';
    } else if (ingest->parsed()) {
      const OhlcSeries s = read_ohlc(input);
      const auto days = segment_days(s, cfg.utc_offset);
      write_with(out_dir / "ohlc.csv", [&](std::ostream& o) { write_csv(o, s); });
      write_with(out_dir / "days.csv", [&](std::ostream& o) {
        o << "day_id,start_index,end_index,bars\n";
        for (const auto& d : days)
          o << d.day_id << ',' << d.start_index << ',' << d.end_index << ',' << d.end_index - d.start_index + 1 << '\n';
      });
      out << "ingest: " << s.size() << " bars in " << days.size() << " trading days -> " << out_dir.string() << '\n';
    } else if (features->parsed()) {
      const OhlcSeries s = input_series(input, cfg);
      const FeatureMatrix fm = compute_features(s);
      write_with(out_dir / "features.csv", [&](std::ostream& o) { write_features_csv(o, fm); });
      out << "features: " << fm.rows.size() << " rows x " << fm.width() << " features, valid from row "
          << fm.valid_from << " -> " << (out_dir / "features.csv").string() << '\n';
    } else if (chaos_cmd->parsed()) {
      const Series x = scalar_series(input, column, cfg);
      chaos::ChaosConfig cc = chaos_config_for(cfg, x);
      cc.source = column;
      const auto rep = chaos::run_battery(x, cc);
      const auto gate = chaos::chaos_gate(rep, cfg.gate);
      const std::string name = input.empty() ? synth_index_name(0) : fs::path(input).stem().string();
      write_with(out_dir / "chaos.csv", [&](std::ostream& o) { chaos::write_report_csv(o, name, rep); });
      out << "chaos: " << name << " n=" << rep.n << " lambda=" << format_fixed(rep.lambda, 4)
          << " D2=" << format_fixed(rep.d2, 4) << " gate=" << (gate.pass ? "pass" : "fail");
      for (const auto& w : gate.warnings) out << " [warning: " << w << ']';
      out << '\n';
      if (cfg.enforce_gate && !gate.pass) throw DataError("chaos gate failed: " + gate.reasons.front());
    } else if (target->parsed()) {
      const OhlcSeries s = input_series(input, cfg);
      const PreparedIndex p = prepare_index(s.symbol, s, cfg);
      write_with(out_dir / "targets.csv", [&](std::ostream& o) { write_targets_csv(o, p.events); });
      write_with(out_dir / "samples.csv", [&](std::ostream& o) { write_samples_csv(o, p.samples, p.std_features.names); });
      write_with(out_dir / "split.csv", [&](std::ostream& o) {
        o << "bar_index,day_id,set\n";
        for (const auto& x : p.train) o << x.bar_index << ',' << x.day_id << ",train\n";
        for (const auto& x : p.test) o << x.bar_index << ',' << x.day_id << ",test\n";
      });
      out << "target: " << p.events.size() << " events, " << p.samples.size() << " samples (" << p.train.size()
          << " train, " << p.test.size() << " test) -> " << out_dir.string() << '\n';
    } else if (train_cmd->parsed()) {
      const OhlcSeries s = input_series(input, cfg);
      const PreparedIndex p = prepare_index(s.symbol, s, cfg);
      const auto tv = split_train_windows(p.train, cfg.window, cfg.train.val_fraction);
      model::TrainConfig tc = cfg.train;
      const std::uint64_t seed = index_seed(cfg.seed, p.name);
      tc.seed = derive_seed(seed, "train");
      const auto result =
          model::train(model::init_params(model_config_for(cfg, p.std_features.width(), seed)), tv.train, tv.val, tc);
      model::save_params(result.params, out_dir / "cmg.bin");
      write_with(out_dir / "history.csv", [&](std::ostream& o) { write_history_csv(o, result); });
      const auto& best = result.history[static_cast<std::size_t>(result.best_epoch - 1)];
      out << "train: " << tv.train.size() << " windows, best epoch " << result.best_epoch << " of "
          << result.history.size() << ", val accuracy " << format_fixed(best.val_accuracy, 4) << ", checkpoint "
          << format_fixed(model::checkpoint_size_kb(result.params), 1) << " KB -> " << (out_dir / "cmg.bin").string()
          << '\n';
    } else if (evaluate->parsed()) {
      const OhlcSeries s = input_series(input, cfg);
      const PreparedIndex p = prepare_index(s.symbol, s, cfg);
      std::optional<model::CmgParams> pre;
      if (!checkpoint.empty()) pre = model::load_params(checkpoint);
      const IndexResult r = run_index(p, cfg, index_seed(cfg.seed, p.name), pre ? &*pre : nullptr);
      write_index_artifacts(out_dir / p.name, p, r, !pre);
      const FullReport rep = assemble_report({r});
      write_text(out_dir / "report.md", rep.markdown);
      write_text(out_dir / "report.csv", rep.csv);
      out << "evaluate: " << p.name << " over " << r.evaluations.front().outcomes.size() << " days:";
      for (std::size_t k = 0; k < r.model_names.size(); ++k)
        out << ' ' << r.model_names[k] << '=' << format_fixed(r.evaluations[k].accuracy, 4);
      out << " majority=" << format_fixed(r.majority_accuracy, 4) << " -> " << (out_dir / "report.md").string() << '\n';
    } else if (compare->parsed()) {
      std::vector<IndexResult> results;
      const int n = inputs.empty() ? cfg.indices : static_cast<int>(inputs.size());
      for (int k = 0; k < n; ++k) {
        OhlcSeries s = inputs.empty() ? synth_index(cfg, k) : read_ohlc(inputs[static_cast<std::size_t>(k)]);
        for (const auto& prev : results)
          if (prev.name == s.symbol) throw DataError("duplicate index name " + s.symbol);
        const PreparedIndex p = prepare_index(s.symbol, s, cfg);
        results.push_back(run_index(p, cfg, index_seed(cfg.seed, p.name)));
        write_index_artifacts(out_dir / p.name, p, results.back(), true);
      }
      const FullReport rep = assemble_report(results);
      write_text(out_dir / "report.md", rep.markdown);
      write_text(out_dir / "report.csv", rep.csv);
      write_with(out_dir / "chaos.csv", [&](std::ostream& o) {
        o << "Index,lambda,D2,ApEn,SampEn,DFA_alpha,Spectral_Entropy\n";
        for (const auto& r : results) {
          if (!r.chaos_report) continue;
          std::ostringstream one;
          chaos::write_report_csv(one, r.name, *r.chaos_report);
          const std::string text = one.str();
          o << text.substr(text.find('\n') + 1);
        }
      });
      out << "compare: " << results.size() << " indices;";
      for (const auto& rm : rep.eval.ranking) out << ' ' << rm.name << '=' << format_fixed(rm.mean, 4);
      out << " -> " << (out_dir / "report.md").string() << '\n';
    } else if (phase->parsed()) {
      const Series x = scalar_series(input, column, cfg);
      const chaos::EmbeddingSpec spec = *chaos_config_for(cfg, x).embedding;
      std::optional<chaos::ExportWindow> win;
      if (start >= 0 || length >= 0) {
        if (start < 0 || length < 1) throw ArgumentError("phase-space: --start and --length go together, length >= 1");
        win = chaos::ExportWindow{static_cast<std::size_t>(start), static_cast<std::size_t>(length)};
      }
      const auto rows = chaos::export_phase_space(x, spec, win);
      write_with(out_dir / "phase_space.csv", [&](std::ostream& o) { chaos::write_phase_space_csv(o, rows); });
      out << "phase-space: " << rows.size() << " points, m=" << spec.m << " tau=" << spec.tau << " -> "
          << (out_dir / "phase_space.csv").string() << '\n';
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args, out, err);
}

}  // namespace cmg::cli
