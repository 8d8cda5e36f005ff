#pragma once

// Plain-text pipeline configuration:
//
//   # comment
//   [section]
//   key = value
//
// Keys before the first header belong to [general]. Every key must be known.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "cmg/pipeline.hpp"

namespace cmg {

class ConfigError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

namespace detail {

inline std::string trim_ws(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
bool parse_value(const std::string& text, T& out) {
  std::istringstream ss(text);
  ss >> out;
  return !ss.fail() && ss.eof();
}

inline bool parse_value(const std::string& text, bool& out) {
  if (text == "true" || text == "1" || text == "yes") return out = true, true;
  if (text == "false" || text == "0" || text == "no") return out = false, true;
  return false;
}

inline bool parse_value(const std::string& text, std::string& out) {
  out = text;
  return !text.empty();
}

using Setter = std::function<bool(PipelineConfig&, const std::string&)>;

template <typename T, typename Get>
Setter bind(Get get) {
  return [get](PipelineConfig& c, const std::string& v) { return parse_value(v, get(c)); };
}

inline const std::map<std::string, Setter>& config_keys() {
  static const std::map<std::string, Setter> keys = [] {
    std::map<std::string, Setter> k;
    k["general.seed"] = bind<std::uint64_t>([](PipelineConfig& c) -> std::uint64_t& { return c.seed; });
    k["general.out"] = bind<std::string>([](PipelineConfig& c) -> std::string& { return c.out_dir; });

    k["synth.days"] = bind<int>([](PipelineConfig& c) -> int& { return c.synth.days; });
    k["synth.bars_per_day"] = bind<int>([](PipelineConfig& c) -> int& { return c.synth.bars_per_day; });
    k["synth.r"] = bind<double>([](PipelineConfig& c) -> double& { return c.synth.r; });
    k["synth.vol"] = bind<double>([](PipelineConfig& c) -> double& { return c.synth.vol; });
    k["synth.symbol"] = bind<std::string>([](PipelineConfig& c) -> std::string& { return c.synth.symbol; });
    k["synth.start_price"] = bind<double>([](PipelineConfig& c) -> double& { return c.synth.start_price; });
    k["synth.indices"] = bind<int>([](PipelineConfig& c) -> int& { return c.indices; });

    k["chaos.m"] = bind<std::size_t>([](PipelineConfig& c) -> std::size_t& { return c.chaos_m; });
    k["chaos.tau"] = bind<std::size_t>([](PipelineConfig& c) -> std::size_t& { return c.chaos_tau; });
    k["chaos.r_frac"] = bind<double>([](PipelineConfig& c) -> double& { return c.chaos.r_frac; });
    k["chaos.entropy_m"] = bind<std::size_t>([](PipelineConfig& c) -> std::size_t& { return c.chaos.entropy_m; });
    k["chaos.enforce_gate"] = bind<bool>([](PipelineConfig& c) -> bool& { return c.enforce_gate; });
    k["chaos.min_lambda"] = bind<double>([](PipelineConfig& c) -> double& { return c.gate.min_lambda; });
    k["chaos.spectral"] = [](PipelineConfig& c, const std::string& v) {
      if (v == "amplitude") c.chaos.spectral = chaos::SpectralWeighting::amplitude;
      else if (v == "power") c.chaos.spectral = chaos::SpectralWeighting::power;
      else return false;
      return true;
    };

    k["target.min_history"] = bind<std::size_t>([](PipelineConfig& c) -> std::size_t& { return c.target.min_history; });
    k["target.inner"] = bind<double>([](PipelineConfig& c) -> double& { return c.target.binning.inner; });
    k["target.outer"] = bind<double>([](PipelineConfig& c) -> double& { return c.target.binning.outer; });

    k["dataset.window"] = bind<std::size_t>([](PipelineConfig& c) -> std::size_t& { return c.window; });
    k["dataset.test_fraction"] = bind<double>([](PipelineConfig& c) -> double& { return c.test_fraction; });
    k["dataset.utc_offset"] = bind<std::int64_t>([](PipelineConfig& c) -> std::int64_t& { return c.utc_offset; });

    k["model.d_model"] = bind<int>([](PipelineConfig& c) -> int& { return c.model.d_model; });
    k["model.heads"] = bind<int>([](PipelineConfig& c) -> int& { return c.model.n_heads; });
    k["model.d_ff"] = bind<int>([](PipelineConfig& c) -> int& { return c.model.d_ff; });
    k["model.lstm_hidden"] = bind<int>([](PipelineConfig& c) -> int& { return c.model.lstm_hidden; });

    k["train.lr"] = bind<double>([](PipelineConfig& c) -> double& { return c.train.lr; });
    k["train.epochs"] = bind<int>([](PipelineConfig& c) -> int& { return c.train.max_epochs; });
    k["train.patience"] = bind<int>([](PipelineConfig& c) -> int& { return c.train.patience; });
    k["train.batch"] = bind<int>([](PipelineConfig& c) -> int& { return c.train.batch_size; });
    k["train.clip"] = bind<double>([](PipelineConfig& c) -> double& { return c.train.clip_norm; });
    k["train.val_fraction"] = bind<double>([](PipelineConfig& c) -> double& { return c.train.val_fraction; });

    k["baselines.l2"] = bind<double>([](PipelineConfig& c) -> double& { return c.gd.l2; });
    k["baselines.lr"] = bind<double>([](PipelineConfig& c) -> double& { return c.gd.lr; });
    k["baselines.epochs"] = bind<int>([](PipelineConfig& c) -> int& { return c.gd.epochs; });
    return k;
  }();
  return keys;
}

}  // namespace detail

/// Applies `text` on top of `cfg`; the first bad line aborts with its line number.
inline void apply_config_text(const std::string& text, PipelineConfig& cfg, const std::string& origin = "config") {
  std::istringstream in(text);
  std::string line, section = "general";
  int line_no = 0;
  const auto& keys = detail::config_keys();
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    const auto hash = line.find_first_of("#;");
    const std::string body = detail::trim_ws(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']' || body.size() < 3) throw ConfigError(where + "parse error: malformed section header");
      section = detail::trim_ws(body.substr(1, body.size() - 2));
      if (section.empty()) throw ConfigError(where + "parse error: empty section name");
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "parse error: expected 'key = value'");
    const std::string key = detail::trim_ws(body.substr(0, eq));
    const std::string value = detail::trim_ws(body.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "parse error: empty key");
    const auto it = keys.find(section + "." + key);
    if (it == keys.end()) throw ConfigError(where + "unknown key '" + key + "' in section [" + section + "]");
    if (!it->second(cfg, value)) throw ConfigError(where + "invalid value '" + value + "' for key '" + key + "'");
  }
}

/// Defaults, then CMG_OUT_DIR, then the file.
inline PipelineConfig load_config(const std::string& path) {
  PipelineConfig cfg = default_pipeline_config();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(ss.str(), cfg, path);
  return cfg;
}

}  // namespace cmg
