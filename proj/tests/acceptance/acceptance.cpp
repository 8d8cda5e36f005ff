// Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. argv[1] is the path to the cmg CLI binary.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "chaos_fixtures.hpp"
#include "cmg/chaos.hpp"
#include "cmg/cli.hpp"
#include "cmg/pipeline.hpp"
#include "cmg/stats.hpp"
#include "cmg/target.hpp"
#include "leakage.hpp"
#include "model_fixtures.hpp"
#include "stats_oracles.hpp"
#include "temp_dir.hpp"

namespace fs = std::filesystem;
using namespace cmg;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int d = 4) { return format_fixed(v, d); }

Outcome lyapunov_oracle() {
  const Series x = testing::logistic_series(5000, 2024);
  const auto t0 = Clock::now();
  const double lambda = chaos::lyapunov_rosenstein(x, {2, 1});
  const double secs = seconds_since(t0);
  return {lambda >= 0.64 && lambda <= 0.75 && secs < 10.0, "lambda=" + fmt(lambda) + " in " + fmt(secs, 2) + " s"};
}

Outcome dimension_oracles() {
  const double d2 = chaos::correlation_dimension(testing::henon_series(5000), {2, 1});
  int noise_ok = 0, walk_ok = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Series w = testing::white_noise(4000, 1000 + s);
    const double a = chaos::dfa(w), b = chaos::dfa(testing::cumulative(w));
    noise_ok += a >= 0.4 && a <= 0.6;
    walk_ok += b >= 1.35 && b <= 1.65;
  }
  const bool pass = d2 >= 1.10 && d2 <= 1.35 && noise_ok >= 45 && walk_ok >= 45;
  return {pass, "Henon D2=" + fmt(d2) + ", DFA noise " + std::to_string(noise_ok) + "/50, walk " + std::to_string(walk_ok) + "/50"};
}

Outcome spectral_oracles() {
  double worst_flat = 0.0;
  for (std::size_t k : {2, 7, 64, 1000, 4096}) {
    const double h = chaos::entropy_of_spectrum(Series(k, 0.37));
    worst_flat = std::max(worst_flat, std::abs(h - std::log(static_cast<double>(k))));
  }
  double worst_rel = 0.0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const double h = chaos::spectral_entropy(testing::white_noise(2048, s));
    worst_rel = std::max(worst_rel, std::abs(h - std::log(1024.0)) / std::log(1024.0));
  }
  return {worst_flat < 1e-9 && worst_rel < 0.05,
          "flat |H-lnK|max=" + format_number(worst_flat) + ", white noise rel.err max=" + fmt(worst_rel)};
}

/// Max |logit change| at decoder positions i after perturbing encoder rows j < i.
double masked_change(const model::CmgParams& p, std::mt19937_64& rng) {
  const int L = p.config.window;
  const auto w = testing::random_window(rng, L, p.config.n_features);
  const model::Mat enc = model::to_matrix(w.encoder_input), dec = model::to_matrix(w.decoder_input);
  const model::Mat base = model::forward(p, enc, dec).logits;
  const int i = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(L - 1));
  model::Mat enc2 = enc;
  for (int j = 0; j < i; ++j)
    for (Eigen::Index c = 0; c < enc2.cols(); ++c) enc2(j, c) += uniform(rng, -3.0, 3.0);
  const model::Mat pert = model::forward(p, enc2, dec).logits;
  return (base.row(i) - pert.row(i)).cwiseAbs().maxCoeff();
}

Outcome masking_invariant() {
  std::mt19937_64 rng(4);
  int exact_zero = 0;
  double control_max = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const model::CmgParams p = model::init_params(testing::tiny_config(1000 + static_cast<std::uint64_t>(trial), 8));
    exact_zero += masked_change(p, rng) == 0.0;
  }
  for (int trial = 0; trial < 100; ++trial) {
    model::ModelConfig c = testing::tiny_config(5000 + static_cast<std::uint64_t>(trial), 8);
    c.encoder_mask = model::MaskKind::full;
    c.decoder_mask = model::MaskKind::causal;
    c.cross_mask = model::MaskKind::causal;
    c.lstm_direction = model::LstmDirection::forward;
    control_max = std::max(control_max, masked_change(model::init_params(c), rng));
  }
  return {exact_zero == 100 && control_max > 0.0,
          std::to_string(exact_zero) + "/100 bitwise unchanged; causal-mask control max change " + format_number(control_max)};
}

Outcome gradient_check() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed * 7919);
    const model::ModelConfig c = testing::tiny_config(seed, 4);
    std::vector<SequenceWindow> batch{testing::random_window(rng, c.window, c.n_features),
                                      testing::random_window(rng, c.window, c.n_features)};
    worst = std::max(worst, testing::max_gradient_error(model::init_params(c), batch));
  }
  return {worst < 1e-4, "max relative error " + format_number(worst) + " over 5 seeds"};
}

Outcome binning() {
  std::mt19937_64 rng(6);
  std::array<double, 6> count{};
  const int n = 1000000;
  for (int i = 0; i < n; ++i) count[label_to_index(gaussian_bin(standard_normal(rng)))] += 1.0;
  const std::array<double, 6> expect = {0.125, 0.125, 0.25, 0.25, 0.125, 0.125};
  double worst = 0.0;
  for (std::size_t k = 0; k < 6; ++k) worst = std::max(worst, std::abs(count[k] / n - expect[k]));
  bool grid_ok = true;
  int prev = -3;
  for (int k = -4000; k <= 4000; ++k) {
    const double z = k * 1e-3;
    const int b = gaussian_bin(z);
    grid_ok = grid_ok && b >= prev && b != 0 && (k == 0 || (gaussian_bin(-z) == -b && (b > 0) == (z > 0)));
    prev = b;
  }
  return {worst <= 0.01 && grid_ok, "max mass deviation " + fmt(worst, 5) + ", grid scan " + (grid_ok ? "ok" : "broken")};
}

Outcome no_leakage() {
  const auto cfg = testing::small_pipeline_config();
  const auto base = prepare_index("SYN", synth_generate(cfg.synth), cfg);
  std::mt19937_64 rng(7);
  int unchanged = 0;
  for (int trial = 0; trial < 50; ++trial) unchanged += testing::train_tensors_unchanged(base, cfg, rng);

  Series y(400);
  for (auto& v : y) v = standard_normal(rng);
  const auto full = expanding_standardize(y);
  int prefix_ok = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t cut = 1 + rng() % (y.size() - 1);
    const auto t = expanding_standardize(Series(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(cut)));
    bool same = true;
    for (std::size_t j = 0; j < cut; ++j) same = same && t.z[j] == full.z[j] && t.usable[j] == full.usable[j];
    prefix_ok += same;
  }
  return {unchanged == 50 && prefix_ok == 50,
          std::to_string(unchanged) + "/50 mutations leave train tensors bitwise equal; " + std::to_string(prefix_ok) +
              "/50 truncations keep the z prefix"};
}

Outcome statistics() {
  const auto t = stats::paired_t_test({1, 2, 3}, {0, 0, 0});
  bool ok = std::abs(t.t - 3.4641) <= 1e-4 && std::abs(t.p - 0.0742) <= 1e-4;

  std::mt19937_64 rng(8);
  int matched = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(rng() % 9) / 8.0;
      b[i] = static_cast<double>(rng() % 9) / 8.0;
    }
    a[0] = b[0] + 0.5;  // at least one non-zero difference
    matched += std::abs(stats::wilcoxon_signed_rank(a, b).p - testing::wilcoxon_brute_force_p(a, b)) < 1e-12;
  }
  double sf_err = 0.0;
  for (double x = -10.0; x <= 10.0; x += 0.25) {
    sf_err = std::max(sf_err, std::abs(stats::student_t_sf(x, 1) - (0.5 - std::atan(x) / std::numbers::pi)));
    sf_err = std::max(sf_err, std::abs(stats::student_t_sf(x, 2) - 0.5 * (1.0 - x / std::sqrt(2.0 + x * x))));
  }
  ok = ok && matched == 100 && sf_err < 1e-9;
  return {ok, "t=" + fmt(t.t) + " p=" + fmt(t.p) + ", Wilcoxon " + std::to_string(matched) +
                  "/100 match enumeration, t-SF max error " + format_number(sf_err)};
}

/// Runs `compare` with default settings into `out`; returns exit code and wall time.
std::pair<int, double> run_compare(const std::string& cli, const fs::path& out) {
  const std::string cmd = "\"" + cli + "\" compare --seed 42 --days 360 --bars-per-day 96 --out \"" + out.string() +
                          "\" > \"" + (out.string() + ".log") + "\" 2>&1";
  const auto t0 = Clock::now();
  const int rc = std::system(cmd.c_str());
  return {rc, seconds_since(t0)};
}

/// report.csv rows keyed by "table,row,column".
std::map<std::string, double> read_report_values(const fs::path& csv) {
  std::map<std::string, double> v;
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto last = line.rfind(',');
    if (last == std::string::npos) continue;
    try {
      v[line.substr(0, last)] = std::stod(line.substr(last + 1));
    } catch (const std::exception&) {
      // notice rows carry text
    }
  }
  return v;
}

Outcome end_to_end(const std::string& cli, const fs::path& out) {
  const auto [rc, secs] = run_compare(cli, out);
  if (rc != 0) return {false, "compare exited with status " + std::to_string(rc)};
  const std::string md = testing::slurp(out / "report.md");
  bool shaped = true;
  for (const char* h : {"## Average daybreak sentiment prediction accuracy", "## Paired t-test", "## Wilcoxon signed-rank test"})
    shaped = shaped && md.find(h) != std::string::npos;
  for (const auto& m : model_names()) shaped = shaped && md.find("| " + m + " |") != std::string::npos;

  // the held-out block is the final 108 trading days of each index
  PipelineConfig cfg;
  const auto p = prepare_index("SYN1", cli::synth_index(cfg, 0), cfg);
  const bool split_ok = p.days.size() == 360 && p.days.size() - p.first_test_day == 108;

  auto v = read_report_values(out / "report.csv");
  bool floor_ok = true;
  std::ostringstream d;
  for (int k = 0; k < cfg.indices; ++k) {
    const std::string idx = cli::synth_index_name(k);
    const auto a = v.find("accuracy,CMG," + idx), m = v.find("reference,Majority direction," + idx);
    if (a == v.end() || m == v.end()) return {false, "report.csv lacks rows for " + idx};
    floor_ok = floor_ok && a->second >= m->second - 0.02;
    d << idx << " CMG " << fmt(a->second) << " vs majority " << fmt(m->second) << "; ";
  }
  d << "mean CMG " << fmt(v.at("accuracy,CMG,mean")) << ", " << fmt(secs, 1) << " s";
  if (!shaped) d << ", report sections missing";
  if (!split_ok) d << ", test block is not the final 108 days";
  return {floor_ok && shaped && split_ok && secs < 300.0, d.str()};
}

Outcome determinism(const std::string& cli, const fs::path& first, const fs::path& second) {
  const auto [rc, secs] = run_compare(cli, second);
  (void)secs;
  if (rc != 0) return {false, "second compare exited with status " + std::to_string(rc)};
  std::vector<fs::path> files = {"report.md", "report.csv", "chaos.csv"};
  for (const auto& e : fs::recursive_directory_iterator(first))
    if (e.path().filename() == "cmg.bin") files.push_back(fs::relative(e.path(), first));
  std::size_t same = 0, checkpoints = 0;
  for (const auto& f : files) {
    const std::string a = testing::slurp(first / f), b = testing::slurp(second / f);
    same += !a.empty() && a == b;
    checkpoints += f.filename() == "cmg.bin";
  }
  return {same == files.size() && checkpoints > 0,
          std::to_string(same) + "/" + std::to_string(files.size()) + " files byte-identical (" +
              std::to_string(checkpoints) + " checkpoints)"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-cmg-cli>\n";
    return 2;
  }
  const std::string cli = argv[1];
  testing::TempDir work("cmg-acceptance");
  const fs::path run_a = work.path() / "run_a", run_b = work.path() / "run_b";

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Lyapunov exponent of the logistic map", lyapunov_oracle},
      {"correlation dimension and DFA oracles", dimension_oracles},
      {"spectral entropy oracles", spectral_oracles},
      {"transposed-mask invariance", masking_invariant},
      {"analytic gradients vs finite differences", gradient_check},
      {"Gaussian six-class binning", binning},
      {"no leakage from test days", no_leakage},
      {"statistics oracles", statistics},
      {"end-to-end compare smoke run", [&] { return end_to_end(cli, run_a); }},
      {"byte-identical repeated runs", [&] { return determinism(cli, run_a, run_b); }},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << k + 1 << "] " << criteria[k].first << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
